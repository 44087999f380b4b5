#ifndef DROMLR_TYPES_HPP
#define DROMLR_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dromlr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Malformed inputs: bad dimensions, invalid parameters, parse failures.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver could not produce a usable result.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Norm orders supported throughout: 1, 2 and infinity.
enum class Order { one, two, inf };

inline std::string order_name(Order o) {
  switch (o) {
    case Order::one: return "1";
    case Order::two: return "2";
    default: return "inf";
  }
}

inline Order parse_order(const std::string& s) {
  if (s == "1") return Order::one;
  if (s == "2") return Order::two;
  if (s == "inf" || s == "Inf" || s == "INF") return Order::inf;
  throw ValidationError("unknown norm order '" + s + "' (expected 1, 2 or inf)");
}

// Holder conjugate: 1/r + 1/s = 1 with the 1/inf = 0 convention.
inline Order dual_order(Order r) {
  switch (r) {
    case Order::one: return Order::inf;
    case Order::two: return Order::two;
    default: return Order::one;
  }
}

// 2^{1/s}, again with 1/inf = 0.
inline double two_pow_inv(Order s) {
  switch (s) {
    case Order::one: return 2.0;
    case Order::two: return std::sqrt(2.0);
    default: return 1.0;
  }
}

inline double vector_norm(const Vector& v, Order o) {
  switch (o) {
    case Order::one: return v.lpNorm<1>();
    case Order::two: return v.norm();
    default: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
}

// Index of the largest entry, lowest index on ties.
inline Eigen::Index argmax_lowest(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// One-hot label over K classes. Stored as the (1-based) class index.
class LabelVector {
 public:
  LabelVector(int class_index, int num_classes)
      : index_(class_index), num_classes_(num_classes) {
    if (num_classes_ < 2) {
      throw ValidationError("label needs at least 2 classes, got " +
                            std::to_string(num_classes_));
    }
    if (index_ < 1 || index_ > num_classes_) {
      throw ValidationError("class index " + std::to_string(index_) +
                            " out of range [1.." + std::to_string(num_classes_) + "]");
    }
  }

  int index() const { return index_; }          // 1-based
  int num_classes() const { return num_classes_; }

  Vector to_vector() const {
    Vector y = Vector::Zero(num_classes_);
    y[index_ - 1] = 1.0;
    return y;
  }

  friend bool operator==(const LabelVector& a, const LabelVector& b) {
    return a.index_ == b.index_ && a.num_classes_ == b.num_classes_;
  }

 private:
  int index_;
  int num_classes_;
};

inline LabelVector one_hot_encode(int class_index, int num_classes) {
  return LabelVector(class_index, num_classes);
}

struct Sample {
  Vector features;
  LabelVector label;
};

// Immutable collection of samples sharing a feature dimension and class count.
class Dataset {
 public:
  explicit Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw ValidationError("dataset must contain at least one sample");
    dim_ = static_cast<int>(samples_.front().features.size());
    num_classes_ = samples_.front().label.num_classes();
    for (const Sample& s : samples_) {
      if (static_cast<int>(s.features.size()) != dim_) {
        throw ValidationError("ragged dataset: feature dimensions differ");
      }
      if (s.label.num_classes() != num_classes_) {
        throw ValidationError("inconsistent class counts across samples");
      }
    }
  }

  static Dataset from_raw(const std::vector<Vector>& features,
                          const std::vector<int>& labels, int num_classes) {
    if (features.size() != labels.size()) {
      throw ValidationError("feature/label count mismatch");
    }
    std::vector<Sample> samples;
    samples.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
      samples.push_back({features[i], LabelVector(labels[i], num_classes)});
    }
    return Dataset(std::move(samples));
  }

  int size() const { return static_cast<int>(samples_.size()); }
  int dim() const { return dim_; }
  int num_classes() const { return num_classes_; }
  const Sample& operator[](int i) const { return samples_[static_cast<std::size_t>(i)]; }
  const std::vector<Sample>& samples() const { return samples_; }

  std::vector<int> class_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(num_classes_), 0);
    for (const Sample& s : samples_) counts[static_cast<std::size_t>(s.label.index() - 1)]++;
    return counts;
  }

 private:
  std::vector<Sample> samples_;
  int dim_ = 0;
  int num_classes_ = 0;
};

struct ValidationReport {
  int dim = 0;
  int num_classes = 0;
  int size = 0;
  std::vector<int> class_counts;
  std::vector<std::string> defects;
  bool ok() const { return defects.empty(); }
};

// Report-only inspection of raw samples (catches ragged rows before Dataset
// construction would reject them).
inline ValidationReport validate_samples(const std::vector<Sample>& samples) {
  ValidationReport rep;
  rep.size = static_cast<int>(samples.size());
  if (samples.empty()) {
    rep.defects.push_back("empty dataset");
    return rep;
  }
  rep.dim = static_cast<int>(samples.front().features.size());
  rep.num_classes = samples.front().label.num_classes();
  rep.class_counts.assign(static_cast<std::size_t>(rep.num_classes), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (static_cast<int>(s.features.size()) != rep.dim) {
      rep.defects.push_back("ragged row at sample " + std::to_string(i));
      continue;
    }
    if (s.label.num_classes() != rep.num_classes) {
      rep.defects.push_back("class count mismatch at sample " + std::to_string(i));
      continue;
    }
    if (!s.features.allFinite()) {
      rep.defects.push_back("non-finite feature in sample " + std::to_string(i));
    }
    rep.class_counts[static_cast<std::size_t>(s.label.index() - 1)]++;
  }
  for (int k = 0; k < rep.num_classes; ++k) {
    if (rep.class_counts[static_cast<std::size_t>(k)] == 0) {
      rep.defects.push_back("empty class " + std::to_string(k + 1));
    }
  }
  return rep;
}

inline ValidationReport validate_dataset(const Dataset& d) {
  return validate_samples(d.samples());
}

// Dual-order pair (r, s) used by the ambiguity set and its regularizer.
struct NormPair {
  Order r = Order::two;
  Order s = Order::two;

  NormPair() = default;
  explicit NormPair(Order feature_order)
      : r(feature_order), s(dual_order(feature_order)) {}
};

}  // namespace dromlr

#endif  // DROMLR_TYPES_HPP
