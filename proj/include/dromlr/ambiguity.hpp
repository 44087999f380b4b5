#ifndef DROMLR_AMBIGUITY_HPP
#define DROMLR_AMBIGUITY_HPP

#include "dromlr/solver.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace dromlr {

// Measure-concentration constants. The defaults (c1 = c2 = 1, a = 2) are
// arbitrary placeholders; the constants are problem-dependent and unknown in
// general, so callers are expected to supply their own or cross-validate.
struct ConcentrationParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double a = 2.0;      // light-tail exponent, > 1
  double alpha = 0.05;  // confidence level

  void check() const {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw ValidationError("c1, c2 must be positive");
    if (!(a > 1.0)) throw ValidationError("tail exponent a must exceed 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  }
};

// Concentration-based radius:
//   L = log(c1/alpha)/c2
//   N >= L: (L/N)^{1/max(p+K,2)},  N < L: (L/N)^{1/a}
inline double radius_concentration(int n, int p, int k, const ConcentrationParams& params) {
  params.check();
  if (n < 1) throw ValidationError("N must be >= 1");
  if (p < 1 || k < 2) throw ValidationError("need p >= 1 and K >= 2");
  const double big_l = std::log(params.c1 / params.alpha) / params.c2;
  if (!(big_l > 0.0)) {
    throw ValidationError("log(c1/alpha) must be positive; increase c1 or decrease alpha");
  }
  const double ratio = big_l / n;
  const double exponent = (n >= big_l)
                              ? 1.0 / std::max(static_cast<double>(p + k), 2.0)
                              : 1.0 / params.a;
  return std::pow(ratio, exponent);
}

struct CvResult {
  double best_epsilon = 0.0;
  std::vector<double> validation_losses;  // aligned with the candidate grid
};

namespace detail {

// Stratified fold assignment: per-class seeded shuffle, round-robin deal.
inline std::vector<int> stratified_fold_ids(const Dataset& d, int folds,
                                            std::uint64_t seed) {
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(d.num_classes()));
  for (int i = 0; i < d.size(); ++i) {
    by_class[static_cast<std::size_t>(d[i].label.index() - 1)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(static_cast<std::size_t>(d.size()), 0);
  for (std::size_t k = 0; k < by_class.size(); ++k) {
    if (static_cast<int>(by_class[k].size()) < folds) {
      throw ValidationError("class " + std::to_string(k + 1) + " has " +
                            std::to_string(by_class[k].size()) +
                            " samples, fewer than " + std::to_string(folds) + " folds");
    }
    std::shuffle(by_class[k].begin(), by_class[k].end(), rng);
    for (std::size_t j = 0; j < by_class[k].size(); ++j) {
      fold_of[static_cast<std::size_t>(by_class[k][j])] = static_cast<int>(j % folds);
    }
  }
  return fold_of;
}

inline Dataset subset(const Dataset& d, const std::vector<int>& idx) {
  std::vector<Sample> samples;
  samples.reserve(idx.size());
  for (int i : idx) samples.push_back(d[i]);
  return Dataset(std::move(samples));
}

}  // namespace detail

// Stratified k-fold cross-validation over a radius grid. Returns the argmin
// epsilon (ties toward the smaller candidate) and the per-candidate mean
// held-out log-loss.
inline CvResult radius_cv(const Dataset& d, const std::vector<double>& grid, int folds,
                          const DroConfig& dro_template, const TrainConfig& cfg) {
  if (grid.empty()) throw ValidationError("epsilon grid is empty");
  if (folds < 2) throw ValidationError("need at least 2 folds");
  if (folds > d.size()) throw ValidationError("more folds than samples");

  const std::vector<int> fold_of = detail::stratified_fold_ids(d, folds, cfg.seed);

  std::vector<std::vector<int>> train_idx(static_cast<std::size_t>(folds));
  std::vector<std::vector<int>> held_idx(static_cast<std::size_t>(folds));
  for (int i = 0; i < d.size(); ++i) {
    for (int f = 0; f < folds; ++f) {
      (fold_of[static_cast<std::size_t>(i)] == f ? held_idx : train_idx)
          [static_cast<std::size_t>(f)].push_back(i);
    }
  }

  CvResult out;
  out.validation_losses.reserve(grid.size());
  double best_loss = std::numeric_limits<double>::infinity();
  for (double eps : grid) {
    DroConfig dro = dro_template;
    dro.epsilon = eps;
    double acc = 0.0;
    for (int f = 0; f < folds; ++f) {
      Dataset train = detail::subset(d, train_idx[static_cast<std::size_t>(f)]);
      Dataset held = detail::subset(d, held_idx[static_cast<std::size_t>(f)]);
      TrainResult r = train_dro_mlr(train, dro, cfg);
      acc += empirical_loss(r.coef, held);
    }
    const double mean_loss = acc / folds;
    out.validation_losses.push_back(mean_loss);
    if (mean_loss < best_loss || (mean_loss == best_loss && eps < out.best_epsilon)) {
      best_loss = mean_loss;
      out.best_epsilon = eps;
    }
  }
  return out;
}

// Inputs to the Rademacher-complexity generalization bound.
struct BoundInputs {
  double feature_bound = 0.0;  // R: max ||x||_s
  double coef_bound = 0.0;     // C-bar: ||B'||_s
  int n = 1;
  int k = 2;
  Order r = Order::two;
  double alpha = 0.05;

  void check() const {
    if (!(feature_bound > 0.0)) throw ValidationError("feature bound R must be positive");
    if (coef_bound < 0.0) throw ValidationError("coefficient bound must be nonnegative");
    if (n < 1 || k < 2) throw ValidationError("need N >= 1 and K >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  }
};

// Measure R and C-bar from the data and a trained coefficient matrix.
inline BoundInputs measure_bound_inputs(const Matrix& coef, const Dataset& d,
                                        const NormPair& norms, double alpha) {
  BoundInputs in;
  in.n = d.size();
  in.k = d.num_classes();
  in.r = norms.r;
  in.alpha = alpha;
  in.coef_bound = induced_norm(coef.transpose(), norms.s);
  double r_max = 0.0;
  for (const Sample& s : d.samples()) {
    r_max = std::max(r_max, vector_norm(s.features, norms.s));
  }
  in.feature_bound = r_max;
  return in;
}

// High-probability bound on the expected log-loss:
//   empirical + 2 T / sqrt(N) + T sqrt(8 log(2/alpha) / N),
// with T = log K + C-bar * R * (1 + K^{1/r}).
inline double generalization_bound(const BoundInputs& in, double empirical) {
  in.check();
  const double k_pow =
      in.r == Order::inf ? 1.0 : std::pow(static_cast<double>(in.k),
                                          in.r == Order::one ? 1.0 : 0.5);
  const double term = std::log(static_cast<double>(in.k)) +
                      in.coef_bound * in.feature_bound * (1.0 + k_pow);
  const double root_n = std::sqrt(static_cast<double>(in.n));
  return empirical + 2.0 * term / root_n +
         term * std::sqrt(8.0 * std::log(2.0 / in.alpha) / in.n);
}

// The trained objective value is itself the out-of-sample certificate.
inline double worst_case_certificate(const TrainResult& result, const Dataset& d,
                                     const DroConfig& dro) {
  return dro_objective(result.coef, d, dro);
}

}  // namespace dromlr

#endif  // DROMLR_AMBIGUITY_HPP
