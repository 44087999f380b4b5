#ifndef DROMLR_IO_HPP
#define DROMLR_IO_HPP

#include "dromlr/features.hpp"

#include <fstream>

namespace dromlr {

namespace detail {

inline std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char b[4];
  const std::streamoff at = in.tellg();
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ValidationError(path + ": truncated at byte offset " + std::to_string(at));
  }
  return (static_cast<std::uint32_t>(b[0]) << 24) |
         (static_cast<std::uint32_t>(b[1]) << 16) |
         (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

}  // namespace detail

// IDX image/label pair (MNIST distribution format). Pixels are scaled to
// [0, 1] and images flattened row-major; raw labels l become class l + 1.
inline Dataset load_idx(const std::string& image_path, const std::string& label_path) {
  std::ifstream img(image_path, std::ios::binary);
  if (!img) throw ValidationError("cannot open " + image_path);
  std::ifstream lab(label_path, std::ios::binary);
  if (!lab) throw ValidationError("cannot open " + label_path);

  const std::uint32_t img_magic = detail::read_u32_be(img, image_path);
  if (img_magic != 0x00000803u) {
    throw ValidationError(image_path + ": bad magic (expected 0x00000803)");
  }
  const std::uint32_t lab_magic = detail::read_u32_be(lab, label_path);
  if (lab_magic != 0x00000801u) {
    throw ValidationError(label_path + ": bad magic (expected 0x00000801)");
  }
  const std::uint32_t n_img = detail::read_u32_be(img, image_path);
  const std::uint32_t rows = detail::read_u32_be(img, image_path);
  const std::uint32_t cols = detail::read_u32_be(img, image_path);
  const std::uint32_t n_lab = detail::read_u32_be(lab, label_path);
  if (n_img != n_lab) {
    throw ValidationError("image/label count mismatch: " + std::to_string(n_img) +
                          " vs " + std::to_string(n_lab));
  }
  if (n_img == 0 || rows == 0 || cols == 0) {
    throw ValidationError(image_path + ": empty image set");
  }

  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixel_buf(dim);
  std::vector<Vector> features;
  features.reserve(n_img);
  for (std::uint32_t i = 0; i < n_img; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixel_buf.data()),
                  static_cast<std::streamsize>(dim))) {
      throw ValidationError(image_path + ": truncated at image " + std::to_string(i));
    }
    Vector x(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      x[static_cast<Eigen::Index>(j)] = pixel_buf[j] / 255.0;
    }
    features.push_back(std::move(x));
  }

  std::vector<int> labels;
  labels.reserve(n_lab);
  int max_label = 0;
  for (std::uint32_t i = 0; i < n_lab; ++i) {
    unsigned char raw;
    if (!lab.read(reinterpret_cast<char*>(&raw), 1)) {
      throw ValidationError(label_path + ": truncated at label " + std::to_string(i));
    }
    labels.push_back(static_cast<int>(raw) + 1);
    max_label = std::max(max_label, static_cast<int>(raw) + 1);
  }
  return Dataset::from_raw(features, labels, std::max(max_label, 2));
}

// Dense matrix as CSV rows of full-precision doubles (coefficients, metrics).
inline void save_matrix(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    out << "\n";
  }
}

inline Matrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto toks = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& t : toks) {
      row.push_back(detail::parse_double(t, path + ":" + std::to_string(lineno)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": empty matrix file");
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

inline void save_vector(const Vector& v, const std::string& path) {
  Matrix m = v.transpose();
  save_matrix(m, path);
}

inline Vector load_vector(const std::string& path) {
  Matrix m = load_matrix(path);
  if (m.rows() == 1) return m.row(0).transpose();
  if (m.cols() == 1) return m.col(0);
  throw ValidationError(path + ": expected a single row or column");
}

// Dataset loader dispatch across the supported on-disk formats.
inline Dataset load_dataset(const std::string& path, const std::string& format,
                            const std::string& label_path = "") {
  if (format == "csv") return load_csv(path);
  if (format == "drof") return load_drof(path);
  if (format == "idx") {
    if (label_path.empty()) throw ValidationError("idx format needs a label file");
    return load_idx(path, label_path);
  }
  throw ValidationError("unknown data format '" + format + "'");
}

}  // namespace dromlr

#endif  // DROMLR_IO_HPP
