#ifndef DROMLR_FEATURES_HPP
#define DROMLR_FEATURES_HPP

#include "dromlr/types.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace dromlr {

enum class FeatureKind { identity, random_relu, precomputed };

// Frozen feature map: phi(x) = max(0, P x + b) for the random-relu kind,
// phi(x) = x for identity. Immutable after construction.
class FeatureMap {
 public:
  FeatureMap(FeatureKind kind, Matrix projection, Vector offset)
      : kind_(kind), projection_(std::move(projection)), offset_(std::move(offset)) {}

  static FeatureMap identity(int dim) {
    return FeatureMap(FeatureKind::identity, Matrix::Identity(dim, dim),
                      Vector::Zero(dim));
  }

  FeatureKind kind() const { return kind_; }
  int dim_in() const { return static_cast<int>(projection_.cols()); }
  int dim_out() const { return static_cast<int>(projection_.rows()); }
  const Matrix& projection() const { return projection_; }
  const Vector& offset() const { return offset_; }

  Vector apply(const Vector& x) const {
    if (x.size() != projection_.cols()) {
      throw ValidationError("feature map expects dimension " +
                            std::to_string(projection_.cols()) + ", got " +
                            std::to_string(x.size()));
    }
    if (kind_ == FeatureKind::identity) return x;
    return ((projection_ * x + offset_).array().max(0.0)).matrix();
  }

 private:
  FeatureKind kind_;
  Matrix projection_;
  Vector offset_;
};

// Gaussian projection (std 1/sqrt(d_in)) with a uniform [-1, 1] offset,
// rectified. A fixed-seed stand-in for a pretrained feature extractor.
inline FeatureMap random_feature_map(int d_in, int d_out, std::uint64_t seed) {
  if (d_in < 1 || d_out < 1) throw ValidationError("feature map dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(d_in)));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix proj(d_out, d_in);
  for (int i = 0; i < d_out; ++i) {
    for (int j = 0; j < d_in; ++j) proj(i, j) = gauss(rng);
  }
  Vector offset(d_out);
  for (int i = 0; i < d_out; ++i) offset[i] = unif(rng);
  return FeatureMap(FeatureKind::random_relu, std::move(proj), std::move(offset));
}

inline Dataset apply_feature_map(const FeatureMap& fm, const Dataset& d) {
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(d.size()));
  for (const Sample& s : d.samples()) {
    samples.push_back({fm.apply(s.features), s.label});
  }
  return Dataset(std::move(samples));
}

// ---------------------------------------------------------------------------
// Feature files.
//   CSV:  header "label,f1,...,fd"; label is the 1-based class index.
//   DROF: magic "DROF", u32 N, u32 d, u32 K, N*d row-major float32 features,
//         then N u32 labels; all integers and floats little-endian.
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_double(const std::string& tok, const std::string& context) {
  double v;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ValidationError("malformed number '" + tok + "' in " + context);
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream ss(line);
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

}  // namespace detail

inline void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << "label";
  for (int j = 1; j <= d.dim(); ++j) out << ",f" << j;
  out << "\n";
  char buf[40];
  for (const Sample& s : d.samples()) {
    out << s.label.index();
    for (Eigen::Index j = 0; j < s.features.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.features[j]);
      out << ',' << buf;
    }
    out << "\n";
  }
}

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  const std::size_t dim = detail::split_csv_line(line).size() - 1;
  if (dim == 0) throw ValidationError(path + ": header has no feature columns");

  std::vector<Vector> features;
  std::vector<int> labels;
  int max_label = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto toks = detail::split_csv_line(line);
    if (toks.size() != dim + 1) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(dim + 1) + " columns, got " +
                            std::to_string(toks.size()));
    }
    const std::string ctx = path + ":" + std::to_string(lineno);
    const double raw_label = detail::parse_double(toks[0], ctx);
    const int label = static_cast<int>(raw_label);
    if (label < 1 || raw_label != label) {
      throw ValidationError(ctx + ": label must be a positive integer");
    }
    Vector x(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      x[static_cast<Eigen::Index>(j)] = detail::parse_double(toks[j + 1], ctx);
    }
    features.push_back(std::move(x));
    labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (features.empty()) throw ValidationError(path + ": no data rows");
  return Dataset::from_raw(features, labels, std::max(max_label, 2));
}

namespace detail {

inline std::uint32_t read_u32_le(std::istream& in, const std::string& path) {
  unsigned char b[4];
  const std::streamoff at = in.tellg();
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ValidationError(path + ": truncated at byte offset " + std::to_string(at));
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

inline void save_drof(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out.write("DROF", 4);
  detail::write_u32_le(out, static_cast<std::uint32_t>(d.size()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(d.dim()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(d.num_classes()));
  for (const Sample& s : d.samples()) {
    for (Eigen::Index j = 0; j < s.features.size(); ++j) {
      const float f = static_cast<float>(s.features[j]);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::write_u32_le(out, bits);
    }
  }
  for (const Sample& s : d.samples()) {
    detail::write_u32_le(out, static_cast<std::uint32_t>(s.label.index()));
  }
}

inline Dataset load_drof(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "DROF", 4) != 0) {
    throw ValidationError(path + ": bad magic (expected DROF)");
  }
  const std::uint32_t n = detail::read_u32_le(in, path);
  const std::uint32_t dim = detail::read_u32_le(in, path);
  const std::uint32_t k = detail::read_u32_le(in, path);
  if (n == 0 || dim == 0 || k < 2) {
    throw ValidationError(path + ": invalid header (N=" + std::to_string(n) +
                          ", d=" + std::to_string(dim) + ", K=" + std::to_string(k) + ")");
  }
  std::vector<Vector> features;
  features.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Vector x(static_cast<Eigen::Index>(dim));
    for (std::uint32_t j = 0; j < dim; ++j) {
      const std::uint32_t bits = detail::read_u32_le(in, path);
      float f;
      std::memcpy(&f, &bits, 4);
      x[static_cast<Eigen::Index>(j)] = static_cast<double>(f);
    }
    features.push_back(std::move(x));
  }
  std::vector<int> labels;
  labels.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t raw = detail::read_u32_le(in, path);
    if (raw < 1 || raw > k) {
      throw ValidationError(path + ": label " + std::to_string(raw) +
                            " outside [1.." + std::to_string(k) + "]");
    }
    labels.push_back(static_cast<int>(raw));
  }
  return Dataset::from_raw(features, labels, static_cast<int>(k));
}

// Load a precomputed-feature file by extension-independent format name.
inline Dataset load_features(const std::string& path, const std::string& format) {
  if (format == "csv") return load_csv(path);
  if (format == "drof") return load_drof(path);
  throw ValidationError("unknown feature format '" + format + "'");
}

}  // namespace dromlr

#endif  // DROMLR_FEATURES_HPP
