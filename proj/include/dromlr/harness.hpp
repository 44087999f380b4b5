#ifndef DROMLR_HARNESS_HPP
#define DROMLR_HARNESS_HPP

#include "dromlr/ambiguity.hpp"
#include "dromlr/attacks.hpp"
#include "dromlr/features.hpp"
#include "dromlr/io.hpp"
#include "dromlr/metric.hpp"
#include "dromlr/solver.hpp"

#include <chrono>
#include <cstdio>
#include <random>

namespace dromlr {

struct EvalResult {
  double error_rate = 0.0;
  double log_loss = 0.0;
};

// Test error rate (argmax prediction, lowest index on ties) and mean log-loss.
inline EvalResult evaluate(const Matrix& coef, const Dataset& d) {
  if (coef.rows() != d.dim() || coef.cols() != d.num_classes()) {
    throw ValidationError("coefficient shape does not match dataset");
  }
  int wrong = 0;
  for (const Sample& s : d.samples()) {
    const Eigen::Index pred = argmax_lowest(coef.transpose() * s.features);
    if (static_cast<int>(pred) + 1 != s.label.index()) ++wrong;
  }
  return {static_cast<double>(wrong) / d.size(), empirical_loss(coef, d)};
}

// Balanced Gaussian mixture: class means are random directions scaled by
// `separation`, unit isotropic noise. The synthetic benchmark generator.
inline Dataset gaussian_mixture(int n, int p, int k, double separation,
                                std::uint64_t seed) {
  if (n < k) throw ValidationError("need at least one sample per class");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> means;
  means.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    Vector m(p);
    for (int j = 0; j < p; ++j) m[j] = gauss(rng);
    means.push_back(separation * m / m.norm());
  }
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = i % k;
    Vector x = means[static_cast<std::size_t>(c)];
    for (int j = 0; j < p; ++j) x[j] += gauss(rng);
    samples.push_back({std::move(x), LabelVector(c + 1, k)});
  }
  return Dataset(std::move(samples));
}

struct SplitFractions {
  // Defaults follow the 5:1:1 train/validation/test proportion.
  double train = 5.0 / 7.0;
  double validation = 1.0 / 7.0;
  double test = 1.0 / 7.0;

  void check() const {
    if (!(train > 0.0 && validation > 0.0 && test > 0.0)) {
      throw ValidationError("split fractions must be positive");
    }
    if (std::abs(train + validation + test - 1.0) > 1e-9) {
      throw ValidationError("split fractions must sum to 1");
    }
  }
};

struct DataSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

inline DataSplit split_dataset(const Dataset& d, const SplitFractions& frac,
                               std::uint64_t seed) {
  frac.check();
  std::vector<int> idx(static_cast<std::size_t>(d.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  const int n_val = std::max(1, static_cast<int>(frac.validation * d.size()));
  const int n_test = std::max(1, static_cast<int>(frac.test * d.size()));
  const int n_train = d.size() - n_val - n_test;
  if (n_train < 1) throw ValidationError("dataset too small for the requested split");

  auto take = [&](int from, int count) {
    std::vector<int> part(idx.begin() + from, idx.begin() + from + count);
    return detail::subset(d, part);
  };
  return {take(0, n_train), take(n_train, n_val), take(n_train + n_val, n_test)};
}

enum class ScenarioKind { train_perturbed, test_perturbed, adv_training_sweep };

inline std::string scenario_name(ScenarioKind s) {
  switch (s) {
    case ScenarioKind::train_perturbed: return "train-perturbed";
    case ScenarioKind::test_perturbed: return "test-perturbed";
    default: return "adv-training-sweep";
  }
}

inline ScenarioKind parse_scenario(const std::string& s) {
  if (s == "train-perturbed") return ScenarioKind::train_perturbed;
  if (s == "test-perturbed") return ScenarioKind::test_perturbed;
  if (s == "adv-training-sweep") return ScenarioKind::adv_training_sweep;
  throw ValidationError("unknown scenario '" + s + "'");
}

enum class EpsilonSource { fixed, cv_grid, concentration };

inline EpsilonSource parse_epsilon_source(const std::string& s) {
  if (s == "fixed") return EpsilonSource::fixed;
  if (s == "cv") return EpsilonSource::cv_grid;
  if (s == "concentration") return EpsilonSource::concentration;
  throw ValidationError("unknown epsilon source '" + s + "'");
}

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::train_perturbed;
  AttackSpec attack;
  std::vector<double> strengths;       // sigma or k values
  std::vector<int> perturbed_counts;   // sweep only
  SplitFractions split;
  EpsilonSource epsilon_source = EpsilonSource::fixed;
  double epsilon_fixed = 0.1;
  std::vector<double> cv_grid = {0.0, 0.01, 0.1, 1.0};
  int cv_folds = 3;
  ConcentrationParams concentration;
  NormPair norms{Order::two};
  bool use_metric = false;
  double metric_margin = 1.0;
  std::uint64_t seed = 0;
  TrainConfig train;
};

struct ReportRow {
  std::string model;     // "DRO-MLR" or "ERM"
  std::string scenario;
  std::string attack;
  double strength = 0.0;  // sigma, k, or perturbed count m
  double error_rate = 0.0;
  double log_loss = 0.0;
  double epsilon = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;
  double wall_time_seconds = 0.0;  // informational; kept out of the CSV rows

  void write_csv(std::ostream& out) const {
    out << "model,scenario,attack,strength,error_rate,log_loss,epsilon\n";
    char buf[40];
    for (const ReportRow& r : rows) {
      out << r.model << ',' << r.scenario << ',' << r.attack;
      for (double v : {r.strength, r.error_rate, r.log_loss, r.epsilon}) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out << ',' << buf;
      }
      out << '\n';
    }
  }

  std::string csv() const {
    std::ostringstream ss;
    write_csv(ss);
    return ss.str();
  }
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct ScenarioContext {
  const ScenarioConfig& cfg;
  DataSplit split;

  explicit ScenarioContext(const ScenarioConfig& cfg_, const Dataset& data)
      : cfg(cfg_), split(split_dataset(data, cfg_.split, cfg_.seed)) {}

  AttackSpec attack_at(double strength) const {
    AttackSpec spec = cfg.attack;
    if (spec.kind == AttackKind::wgn) {
      spec.sigma = strength;
    } else {
      spec.k_inf = strength;
    }
    return spec;
  }

  // Perturb a dataset. WGN draws fresh seeded noise; UAP applies a universal
  // perturbation computed on the validation split against `model`.
  Dataset perturb(const Dataset& d, double strength, const Matrix& model,
                  std::uint64_t salt) const {
    if (strength == 0.0) return d;
    const AttackSpec spec = attack_at(strength);
    if (spec.kind == AttackKind::wgn) {
      return wgn_attack(d, spec.sigma, mix_seed(cfg.seed, salt));
    }
    return apply_perturbation(d, uap(split.validation, model, spec).delta);
  }

  double choose_epsilon(const Dataset& selection_data) const {
    switch (cfg.epsilon_source) {
      case EpsilonSource::fixed:
        return cfg.epsilon_fixed;
      case EpsilonSource::concentration:
        return radius_concentration(split.train.size(), split.train.dim(),
                                    split.train.num_classes(), cfg.concentration);
      default: {
        DroConfig dro;
        dro.norms = cfg.norms;
        return radius_cv(selection_data, cfg.cv_grid, cfg.cv_folds, dro, cfg.train)
            .best_epsilon;
      }
    }
  }

  // Weighted metric learned from clean/perturbed validation pairs.
  std::optional<MetricMatrix> maybe_learn_metric(const Dataset& clean_val,
                                                 const Dataset& perturbed_val) const {
    if (!cfg.use_metric) return std::nullopt;
    std::vector<Vector> clean, perturbed;
    std::vector<LabelVector> labels;
    for (int i = 0; i < clean_val.size(); ++i) {
      clean.push_back(clean_val[i].features);
      perturbed.push_back(perturbed_val[i].features);
      labels.push_back(clean_val[i].label);
    }
    MetricProblem prob = build_metric_problem(clean, perturbed, labels, cfg.metric_margin);
    return learn_metric(prob).w;
  }

  TrainResult fit_dro(const Dataset& train, double epsilon,
                      const std::optional<MetricMatrix>& metric) const {
    DroConfig dro;
    dro.norms = cfg.norms;
    dro.epsilon = epsilon;
    dro.metric = metric;
    return train_dro_mlr(train, dro, cfg.train);
  }
};

}  // namespace detail

// Scenario (i): contaminated training data, clean test evaluation.
inline Report run_scenario_train_perturbed(const ScenarioConfig& cfg, const Dataset& data) {
  if (cfg.strengths.empty()) throw ValidationError("strengths list is empty");
  const auto t0 = std::chrono::steady_clock::now();
  detail::ScenarioContext ctx(cfg, data);
  Report report;

  // Surrogate model for generating UAP perturbations of the training data.
  const Matrix surrogate = train_erm(ctx.split.train, cfg.train).coef;

  std::uint64_t salt = 0;
  for (double strength : cfg.strengths) {
    Dataset train = ctx.perturb(ctx.split.train, strength, surrogate, salt++);
    Dataset val = ctx.perturb(ctx.split.validation, strength, surrogate, salt++);
    const double epsilon = ctx.choose_epsilon(val);
    const auto metric = ctx.maybe_learn_metric(ctx.split.validation, val);

    TrainResult dro = ctx.fit_dro(train, epsilon, metric);
    TrainResult erm = train_erm(train, cfg.train);
    EvalResult dro_eval = evaluate(dro.coef, ctx.split.test);
    EvalResult erm_eval = evaluate(erm.coef, ctx.split.test);

    report.rows.push_back({"DRO-MLR", scenario_name(cfg.scenario),
                           attack_name(cfg.attack.kind), strength,
                           dro_eval.error_rate, dro_eval.log_loss, epsilon});
    report.rows.push_back({"ERM", scenario_name(cfg.scenario),
                           attack_name(cfg.attack.kind), strength,
                           erm_eval.error_rate, erm_eval.log_loss, 0.0});
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Scenario (ii): clean training data, contaminated test evaluation. UAP is
// computed against the model under evaluation using validation data.
inline Report run_scenario_test_perturbed(const ScenarioConfig& cfg, const Dataset& data) {
  if (cfg.strengths.empty()) throw ValidationError("strengths list is empty");
  const auto t0 = std::chrono::steady_clock::now();
  detail::ScenarioContext ctx(cfg, data);
  Report report;

  std::uint64_t salt = 1000;
  for (double strength : cfg.strengths) {
    Dataset val = ctx.perturb(ctx.split.validation, strength,
                              train_erm(ctx.split.train, cfg.train).coef, salt++);
    const double epsilon = ctx.choose_epsilon(ctx.split.validation);
    const auto metric = ctx.maybe_learn_metric(ctx.split.validation, val);

    TrainResult dro = ctx.fit_dro(ctx.split.train, epsilon, metric);
    TrainResult erm = train_erm(ctx.split.train, cfg.train);

    Dataset dro_test = ctx.perturb(ctx.split.test, strength, dro.coef, salt);
    Dataset erm_test = ctx.perturb(ctx.split.test, strength, erm.coef, salt);
    ++salt;
    EvalResult dro_eval = evaluate(dro.coef, dro_test);
    EvalResult erm_eval = evaluate(erm.coef, erm_test);

    report.rows.push_back({"DRO-MLR", scenario_name(cfg.scenario),
                           attack_name(cfg.attack.kind), strength,
                           dro_eval.error_rate, dro_eval.log_loss, epsilon});
    report.rows.push_back({"ERM", scenario_name(cfg.scenario),
                           attack_name(cfg.attack.kind), strength,
                           erm_eval.error_rate, erm_eval.log_loss, 0.0});
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Adversarial-training sweep: replace m training samples with perturbed
// versions, evaluate on a fully perturbed test set, for each m.
inline Report run_adv_training_sweep(const ScenarioConfig& cfg, const Dataset& data) {
  if (cfg.perturbed_counts.empty()) throw ValidationError("perturbed_counts is empty");
  if (cfg.strengths.empty()) throw ValidationError("sweep needs an attack strength");
  const auto t0 = std::chrono::steady_clock::now();
  detail::ScenarioContext ctx(cfg, data);
  const double strength = cfg.strengths.front();
  Report report;

  const Matrix surrogate = train_erm(ctx.split.train, cfg.train).coef;
  Dataset perturbed_train = ctx.perturb(ctx.split.train, strength, surrogate, 7001);
  Dataset perturbed_val = ctx.perturb(ctx.split.validation, strength, surrogate, 7002);
  Dataset perturbed_test = ctx.perturb(ctx.split.test, strength, surrogate, 7003);

  // Seeded choice of which samples get replaced; nested across counts.
  std::vector<int> order(static_cast<std::size_t>(ctx.split.train.size()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(detail::mix_seed(cfg.seed, 7004));
  std::shuffle(order.begin(), order.end(), rng);

  const double epsilon = ctx.choose_epsilon(perturbed_val);
  const auto metric = ctx.maybe_learn_metric(ctx.split.validation, perturbed_val);

  for (int m : cfg.perturbed_counts) {
    if (m < 0 || m > ctx.split.train.size()) {
      throw ValidationError("perturbed count " + std::to_string(m) +
                            " outside [0.." + std::to_string(ctx.split.train.size()) + "]");
    }
    std::vector<Sample> samples(ctx.split.train.samples());
    for (int i = 0; i < m; ++i) {
      const int idx = order[static_cast<std::size_t>(i)];
      samples[static_cast<std::size_t>(idx)] = perturbed_train[idx];
    }
    Dataset mixed(std::move(samples));

    TrainResult dro = ctx.fit_dro(mixed, epsilon, metric);
    TrainResult erm = train_erm(mixed, cfg.train);
    EvalResult dro_eval = evaluate(dro.coef, perturbed_test);
    EvalResult erm_eval = evaluate(erm.coef, perturbed_test);

    report.rows.push_back({"DRO-MLR", scenario_name(cfg.scenario),
                           attack_name(cfg.attack.kind), static_cast<double>(m),
                           dro_eval.error_rate, dro_eval.log_loss, epsilon});
    report.rows.push_back({"ERM", scenario_name(cfg.scenario),
                           attack_name(cfg.attack.kind), static_cast<double>(m),
                           erm_eval.error_rate, erm_eval.log_loss, 0.0});
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

inline Report run_scenario(const ScenarioConfig& cfg, const Dataset& data) {
  switch (cfg.scenario) {
    case ScenarioKind::train_perturbed: return run_scenario_train_perturbed(cfg, data);
    case ScenarioKind::test_perturbed: return run_scenario_test_perturbed(cfg, data);
    default: return run_adv_training_sweep(cfg, data);
  }
}

}  // namespace dromlr

#endif  // DROMLR_HARNESS_HPP
