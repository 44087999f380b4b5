#ifndef DROMLR_SOLVER_HPP
#define DROMLR_SOLVER_HPP

#include "dromlr/loss.hpp"
#include "dromlr/matnorm.hpp"
#include "dromlr/types.hpp"

#include <optional>

namespace dromlr {

// Ambiguity-set specification: dual-order pair, radius, optional ground metric.
struct DroConfig {
  NormPair norms;
  double epsilon = 0.0;
  std::optional<MetricMatrix> metric;

  void check() const {
    if (epsilon < 0.0) throw ValidationError("epsilon must be nonnegative");
    if (!(epsilon == epsilon)) throw ValidationError("epsilon must be finite");
  }
};

enum class StepSchedule { constant, inverse_sqrt };

struct TrainConfig {
  int max_iters = 2000;
  double step0 = 0.5;
  StepSchedule step_schedule = StepSchedule::inverse_sqrt;
  double tol = 1e-8;  // relative best-objective improvement over a 50-iter window
  std::uint64_t seed = 0;
  int record_every = 10;

  void check() const {
    if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
    if (!(step0 > 0.0)) throw ValidationError("step0 must be positive");
    if (tol < 0.0) throw ValidationError("tol must be nonnegative");
    if (record_every < 1) throw ValidationError("record_every must be >= 1");
  }
};

struct TrainResult {
  Matrix coef;
  std::vector<std::pair<int, double>> objective_trace;  // best-so-far values
  double final_objective = 0.0;
  bool converged = false;
};

namespace detail {

// One training problem with the metric transform precomputed.
struct DroProblem {
  const Dataset& data;
  double epsilon;
  Order s;
  double reg_scale;                       // epsilon * 2^{1/s}
  std::optional<Matrix> inv_sqrt_metric;  // W^{-1/2} when a metric is set

  DroProblem(const Dataset& d, const DroConfig& cfg)
      : data(d), epsilon(cfg.epsilon), s(cfg.norms.s),
        reg_scale(cfg.epsilon * two_pow_inv(cfg.norms.s)) {
    cfg.check();
    if (cfg.metric) {
      if (cfg.metric->dim() != d.dim()) {
        throw ValidationError("metric dimension does not match feature dimension");
      }
      inv_sqrt_metric = psd_inv_sqrt(*cfg.metric);
    }
  }

  double objective(const Matrix& coef) const {
    double reg = 0.0;
    if (reg_scale > 0.0) {
      reg = inv_sqrt_metric ? induced_norm(*inv_sqrt_metric * coef, s)
                            : induced_norm(coef, s);
    }
    return empirical_loss(coef, data) + reg_scale * reg;
  }

  Matrix subgradient(const Matrix& coef) const {
    Matrix g = empirical_loss_grad(coef, data);
    if (reg_scale > 0.0) {
      if (inv_sqrt_metric) {
        // d/dB ||MB||_s = M' G(MB); M symmetric here.
        g += reg_scale * (*inv_sqrt_metric *
                          induced_norm_subgrad(*inv_sqrt_metric * coef, s));
      } else {
        g += reg_scale * induced_norm_subgrad(coef, s);
      }
    }
    return g;
  }
};

}  // namespace detail

inline double dro_objective(const Matrix& coef, const Dataset& d, const DroConfig& cfg) {
  if (coef.rows() != d.dim() || coef.cols() != d.num_classes()) {
    throw ValidationError("coefficient shape does not match dataset");
  }
  return detail::DroProblem(d, cfg).objective(coef);
}

inline Matrix dro_subgradient(const Matrix& coef, const Dataset& d, const DroConfig& cfg) {
  if (coef.rows() != d.dim() || coef.cols() != d.num_classes()) {
    throw ValidationError("coefficient shape does not match dataset");
  }
  return detail::DroProblem(d, cfg).subgradient(coef);
}

// Subgradient descent on the regularized objective, started at B = 0, with
// best-so-far tracking. Deterministic full-batch updates.
inline TrainResult train_dro_mlr(const Dataset& d, const DroConfig& dro,
                                 const TrainConfig& cfg) {
  cfg.check();
  const detail::DroProblem prob(d, dro);

  Matrix coef = Matrix::Zero(d.dim(), d.num_classes());
  Matrix best_coef = coef;
  double best_obj = prob.objective(coef);  // log K at the start

  TrainResult result;
  result.objective_trace.emplace_back(0, best_obj);
  result.converged = false;

  std::vector<double> best_history;
  best_history.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
  best_history.push_back(best_obj);

  for (int t = 0; t < cfg.max_iters; ++t) {
    const double step = cfg.step_schedule == StepSchedule::constant
                            ? cfg.step0
                            : cfg.step0 / std::sqrt(static_cast<double>(t) + 1.0);
    coef -= step * prob.subgradient(coef);
    const double obj = prob.objective(coef);
    if (!std::isfinite(obj)) {
      throw SolverError("non-finite objective at iteration " + std::to_string(t + 1) +
                        " (step " + std::to_string(step) + ", epsilon " +
                        std::to_string(dro.epsilon) + ")");
    }
    if (obj < best_obj) {
      best_obj = obj;
      best_coef = coef;
    }
    best_history.push_back(best_obj);
    if ((t + 1) % cfg.record_every == 0) {
      result.objective_trace.emplace_back(t + 1, best_obj);
    }
    if (t + 1 >= 50) {
      const double before = best_history[best_history.size() - 51];
      const double rel = (before - best_obj) / std::max(std::abs(before), 1.0);
      if (rel < cfg.tol) {
        result.converged = true;
        if ((t + 1) % cfg.record_every != 0) {
          result.objective_trace.emplace_back(t + 1, best_obj);
        }
        break;
      }
    }
  }

  result.coef = best_coef;
  result.final_objective = best_obj;
  if (result.objective_trace.back().second != best_obj) {
    result.objective_trace.emplace_back(cfg.max_iters, best_obj);
  }
  return result;
}

// ERM baseline: the same solve with radius zero.
inline TrainResult train_erm(const Dataset& d, const TrainConfig& cfg) {
  DroConfig dro;
  dro.epsilon = 0.0;
  return train_dro_mlr(d, dro, cfg);
}

}  // namespace dromlr

#endif  // DROMLR_SOLVER_HPP
