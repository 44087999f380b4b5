#ifndef DROMLR_ATTACKS_HPP
#define DROMLR_ATTACKS_HPP

#include "dromlr/types.hpp"

#include <random>

namespace dromlr {

enum class AttackKind { wgn, uap };

inline std::string attack_name(AttackKind k) {
  return k == AttackKind::wgn ? "WGN" : "UAP";
}

struct AttackSpec {
  AttackKind kind = AttackKind::wgn;
  double sigma = 0.0;             // WGN per-feature standard deviation
  double k_inf = 0.0;             // UAP l-infinity budget
  double overshoot = 0.02;        // UAP boundary-crossing factor
  int max_passes = 10;
  double target_fool_rate = 1.0;  // stop once this fooling ratio is reached
  std::uint64_t seed = 0;

  void check() const {
    if (sigma < 0.0) throw ValidationError("sigma must be nonnegative");
    if (k_inf < 0.0) throw ValidationError("k_inf must be nonnegative");
    if (!(overshoot > 0.0)) throw ValidationError("overshoot must be positive");
    if (max_passes < 1) throw ValidationError("max_passes must be >= 1");
    if (!(target_fool_rate > 0.0 && target_fool_rate <= 1.0)) {
      throw ValidationError("target_fool_rate must lie in (0,1]");
    }
  }
};

// Independent zero-mean Gaussian noise on every feature; labels untouched.
inline Dataset wgn_attack(const Dataset& d, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ValidationError("sigma must be nonnegative");
  if (sigma == 0.0) return d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(d.size()));
  for (const Sample& s : d.samples()) {
    Vector x = s.features;
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] += noise(rng);
    samples.push_back({std::move(x), s.label});
  }
  return Dataset(std::move(samples));
}

// Minimal perturbation moving x across the nearest decision boundary of the
// linear classifier: with c = argmax B'x and f_k = (w_k - w_c)'x,
//   k* = argmin_{k != c} |f_k| / ||w_k - w_c||_2,
//   delta = (|f_k*| / ||w_k* - w_c||^2) (w_k* - w_c).
inline Vector deepfool_linear_step(const Matrix& coef, const Vector& x) {
  if (coef.rows() != x.size()) throw ValidationError("coefficient/feature dimension mismatch");
  const Vector logits = coef.transpose() * x;
  const Eigen::Index c = argmax_lowest(logits);

  double best_ratio = std::numeric_limits<double>::infinity();
  Eigen::Index best_k = -1;
  double best_norm2 = 0.0;
  for (Eigen::Index k = 0; k < coef.cols(); ++k) {
    if (k == c) continue;
    const double wnorm2 = (coef.col(k) - coef.col(c)).squaredNorm();
    if (wnorm2 == 0.0) continue;  // rival hyperplane identical to the winner's
    const double ratio = std::abs(logits[k] - logits[c]) / std::sqrt(wnorm2);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best_k = k;
      best_norm2 = wnorm2;
    }
  }
  if (best_k < 0) {
    throw SolverError("degenerate classifier: all rival hyperplanes coincide");
  }
  const double f = std::abs(logits[best_k] - logits[c]);
  return (f / best_norm2) * (coef.col(best_k) - coef.col(c));
}

// Fraction of samples whose predicted class changes under x + delta.
inline double fooling_ratio(const Dataset& d, const Matrix& coef, const Vector& delta) {
  int fooled = 0;
  for (const Sample& s : d.samples()) {
    const Eigen::Index before = argmax_lowest(coef.transpose() * s.features);
    const Eigen::Index after = argmax_lowest(coef.transpose() * (s.features + delta));
    if (before != after) ++fooled;
  }
  return static_cast<double>(fooled) / d.size();
}

struct UapResult {
  Vector delta;
  double fool_rate = 0.0;
  int passes = 0;
};

// Universal adversarial perturbation against the linear classifier: aggregate
// DeepFool steps over still-resistant samples, clamping to the l-infinity
// ball after every update.
inline UapResult uap(const Dataset& d, const Matrix& coef, const AttackSpec& spec) {
  spec.check();
  if (spec.kind != AttackKind::uap) throw ValidationError("attack spec is not UAP");
  if (coef.rows() != d.dim()) throw ValidationError("coefficient/dataset dimension mismatch");

  UapResult out;
  out.delta = Vector::Zero(d.dim());
  if (spec.k_inf == 0.0) {
    out.fool_rate = fooling_ratio(d, coef, out.delta);
    return out;
  }

  for (int pass = 0; pass < spec.max_passes; ++pass) {
    out.passes = pass + 1;
    for (const Sample& s : d.samples()) {
      const Eigen::Index before = argmax_lowest(coef.transpose() * s.features);
      const Vector shifted = s.features + out.delta;
      if (argmax_lowest(coef.transpose() * shifted) != before) continue;
      Vector step = deepfool_linear_step(coef, shifted);
      out.delta += (1.0 + spec.overshoot) * step;
      out.delta = out.delta.cwiseMax(-spec.k_inf).cwiseMin(spec.k_inf);
    }
    out.fool_rate = fooling_ratio(d, coef, out.delta);
    if (out.fool_rate >= spec.target_fool_rate) break;
  }
  return out;
}

// x_i + delta for every sample; labels unchanged.
inline Dataset apply_perturbation(const Dataset& d, const Vector& delta) {
  if (delta.size() != d.dim()) throw ValidationError("perturbation dimension mismatch");
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(d.size()));
  for (const Sample& s : d.samples()) {
    samples.push_back({s.features + delta, s.label});
  }
  return Dataset(std::move(samples));
}

}  // namespace dromlr

#endif  // DROMLR_ATTACKS_HPP
