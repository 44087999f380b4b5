#ifndef DROMLR_MATNORM_HPP
#define DROMLR_MATNORM_HPP

#include "dromlr/types.hpp"

#include <Eigen/Eigenvalues>

namespace dromlr {

// Symmetric PSD weight matrix for the weighted ground metric.
class MetricMatrix {
 public:
  static constexpr double kSymTol = 1e-10;
  static constexpr double kPsdTol = 1e-8;

  explicit MetricMatrix(Matrix w, double eigen_floor = 1e-10)
      : entries_(std::move(w)), eigen_floor_(eigen_floor) {
    if (entries_.rows() != entries_.cols()) {
      throw ValidationError("metric matrix must be square");
    }
    if (!entries_.allFinite()) {
      throw ValidationError("metric matrix has non-finite entries");
    }
    const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymTol) {
      throw ValidationError("metric matrix is not symmetric (max asymmetry " +
                            std::to_string(asym) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_);
    min_eigenvalue_ = es.eigenvalues().minCoeff();
    if (min_eigenvalue_ < -kPsdTol) {
      throw ValidationError("metric matrix is not positive semidefinite");
    }
  }

  const Matrix& entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  double eigen_floor() const { return eigen_floor_; }
  double min_eigenvalue() const { return min_eigenvalue_; }
  bool positive_definite() const { return min_eigenvalue_ >= eigen_floor_; }

  static MetricMatrix identity(int p) { return MetricMatrix(Matrix::Identity(p, p)); }

 private:
  Matrix entries_;
  double eigen_floor_;
  double min_eigenvalue_;
};

namespace detail {

struct SingularPair {
  double value = 0.0;
  Vector left;   // u, normalized image direction
  Vector right;  // v, maximizing unit vector
};

// Top singular pair by power iteration on A'A. Deterministic: normalized
// all-ones start, tolerance 1e-12, cap 10000 iterations, dense
// eigendecomposition fallback if the iteration stalls.
inline SingularPair top_singular_pair(const Matrix& a) {
  SingularPair out;
  out.left = Vector::Zero(a.rows());
  out.right = Vector::Zero(a.cols());
  if (a.cwiseAbs().maxCoeff() == 0.0) return out;

  const Matrix gram = a.transpose() * a;
  Vector v = Vector::Ones(a.cols());
  v /= v.norm();
  bool converged = false;
  for (int it = 0; it < 10000; ++it) {
    Vector w = gram * v;
    const double wn = w.norm();
    if (wn == 0.0) break;  // v in the null space; fall back
    w /= wn;
    const double drift = 1.0 - std::abs(w.dot(v));
    v = w;
    if (drift < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    Eigen::Index top;
    es.eigenvalues().maxCoeff(&top);
    v = es.eigenvectors().col(top);
  }
  Vector av = a * v;
  out.value = av.norm();
  out.right = v;
  if (out.value > 0.0) out.left = av / out.value;
  return out;
}

inline void check_finite(const Matrix& a) {
  if (!a.allFinite()) throw ValidationError("matrix has non-finite entries");
}

}  // namespace detail

// Induced l_s norm: sup ||Ax||_s / ||x||_s.
//   s = 1:   max absolute column sum
//   s = inf: max absolute row sum
//   s = 2:   largest singular value (deterministic power iteration)
inline double induced_norm(const Matrix& a, Order s) {
  detail::check_finite(a);
  double best = 0.0;
  switch (s) {
    case Order::one:
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::abs(a(i, j));
        best = std::max(best, acc);
      }
      return best;
    case Order::inf:
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) acc += std::abs(a(i, j));
        best = std::max(best, acc);
      }
      return best;
    default:
      return detail::top_singular_pair(a).value;
  }
}

// A subgradient G of A -> ||A||_s with <G, A> = ||A||_s; ties to lowest index.
inline Matrix induced_norm_subgrad(const Matrix& a, Order s) {
  detail::check_finite(a);
  Matrix g = Matrix::Zero(a.rows(), a.cols());
  switch (s) {
    case Order::one: {
      Vector colsums = a.cwiseAbs().colwise().sum();
      const Eigen::Index j = argmax_lowest(colsums);
      if (colsums[j] == 0.0) return g;
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        g(i, j) = (a(i, j) > 0.0) ? 1.0 : (a(i, j) < 0.0 ? -1.0 : 0.0);
      }
      return g;
    }
    case Order::inf: {
      Vector rowsums = a.cwiseAbs().rowwise().sum();
      const Eigen::Index i = argmax_lowest(rowsums);
      if (rowsums[i] == 0.0) return g;
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        g(i, j) = (a(i, j) > 0.0) ? 1.0 : (a(i, j) < 0.0 ? -1.0 : 0.0);
      }
      return g;
    }
    default: {
      detail::SingularPair sp = detail::top_singular_pair(a);
      if (sp.value == 0.0) return g;
      return sp.left * sp.right.transpose();
    }
  }
}

// W^{-1/2} by symmetric eigendecomposition; requires min eigenvalue above the
// metric's floor.
inline Matrix psd_inv_sqrt(const MetricMatrix& w) {
  if (!w.positive_definite()) {
    throw ValidationError("singular metric: smallest eigenvalue " +
                          std::to_string(w.min_eigenvalue()) + " below floor " +
                          std::to_string(w.eigen_floor()));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(w.entries());
  Vector inv_sqrt = es.eigenvalues().array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

// ||W^{-1/2} B||_s, the regularizer of the weighted-metric formulation.
inline double weighted_induced_norm(const Matrix& b, const MetricMatrix& w, Order s) {
  return induced_norm(psd_inv_sqrt(w) * b, s);
}

}  // namespace dromlr

#endif  // DROMLR_MATNORM_HPP
