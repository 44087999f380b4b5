#ifndef DROMLR_LOSS_HPP
#define DROMLR_LOSS_HPP

#include "dromlr/types.hpp"

namespace dromlr {

namespace detail {

inline void check_loss_dims(const Matrix& coef, const Vector& x) {
  if (coef.rows() != x.size()) {
    throw ValidationError("coefficient rows (" + std::to_string(coef.rows()) +
                          ") do not match feature dimension (" +
                          std::to_string(x.size()) + ")");
  }
}

// log(1'e^v) with max subtraction; safe for logits up to ~1e4 in magnitude.
inline double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

}  // namespace detail

// p_i = e^{w_i'x} / sum_k e^{w_k'x}
inline Vector softmax_probs(const Matrix& coef, const Vector& x) {
  detail::check_loss_dims(coef, x);
  Vector logits = coef.transpose() * x;
  const double m = logits.maxCoeff();
  Vector probs = (logits.array() - m).exp();
  probs /= probs.sum();
  return probs;
}

// h_B(x, y) = log 1'e^{B'x} - y'B'x
inline double log_loss(const Matrix& coef, const Vector& x, const LabelVector& y) {
  detail::check_loss_dims(coef, x);
  if (coef.cols() != y.num_classes()) {
    throw ValidationError("coefficient columns do not match class count");
  }
  Vector logits = coef.transpose() * x;
  const double v = detail::log_sum_exp(logits) - logits[y.index() - 1];
  return std::max(0.0, v);
}

// d/dB h_B(x, y) = x (p - y)'
inline Matrix log_loss_grad(const Matrix& coef, const Vector& x, const LabelVector& y) {
  Vector residual = softmax_probs(coef, x);
  residual[y.index() - 1] -= 1.0;
  return x * residual.transpose();
}

// Mean log-loss over the dataset.
inline double empirical_loss(const Matrix& coef, const Dataset& d) {
  double acc = 0.0;
  for (const Sample& s : d.samples()) acc += log_loss(coef, s.features, s.label);
  return acc / d.size();
}

// Mean gradient over the dataset, same p x K layout as the coefficients.
inline Matrix empirical_loss_grad(const Matrix& coef, const Dataset& d) {
  Matrix g = Matrix::Zero(coef.rows(), coef.cols());
  for (const Sample& s : d.samples()) g += log_loss_grad(coef, s.features, s.label);
  return g / d.size();
}

}  // namespace dromlr

#endif  // DROMLR_LOSS_HPP
