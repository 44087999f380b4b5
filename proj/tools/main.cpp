// dromlr: command-line front end for the DRO-MLR solver library.
//
// Subcommands: train, evaluate, attack, metric-learn, radius, bound,
// scenario, sweep. Every subcommand accepts --config FILE with flat
// key=value lines mirroring its flags; explicit flags override the file.
//
// Exit codes: 0 success, 2 validation/usage error, 3 solver non-convergence.

#include "dromlr/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>

namespace {

using json = nlohmann::json;
using namespace dromlr;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct DataArgs {
  std::string path;
  std::string format = "csv";
  std::string label_path;  // idx only
};

void add_data_options(CLI::App* cmd, DataArgs& args, bool required = true) {
  auto* data = cmd->add_option("--data", args.path, "Input dataset file");
  if (required) data->required();
  cmd->add_option("--format", args.format, "Data format")
      ->check(CLI::IsMember({"csv", "idx", "drof"}))
      ->capture_default_str();
  cmd->add_option("--labels", args.label_path, "IDX label file (idx format only)");
}

Dataset load_data(const DataArgs& args) {
  return load_dataset(args.path, args.format, args.label_path);
}

Order parse_r_flag(const std::string& r) { return parse_order(r); }

void emit(const json& summary, const std::string& out_path) {
  const std::string text = summary.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot open " + out_path + " for writing");
    out << text;
  }
}

json eval_json(const EvalResult& e) {
  return json{{"error_rate", e.error_rate}, {"log_loss", e.log_loss}};
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Expand `--config FILE` into flags. The file holds flat key=value lines
// mirroring the flag names; a key is skipped when the flag was given
// explicitly, so command-line flags always win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string config_path;
  for (auto it = args.begin(); it != args.end();) {
    if (*it == "--config" && std::next(it) != args.end()) {
      config_path = *std::next(it);
      it = args.erase(it, it + 2);
    } else if (it->rfind("--config=", 0) == 0) {
      config_path = it->substr(9);
      it = args.erase(it);
    } else {
      ++it;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw ValidationError("cannot open config file " + config_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(config_path + ":" + std::to_string(lineno) +
                            ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ValidationError(config_path + ":" + std::to_string(lineno) +
                            ": empty key");
    }
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (!given) args.push_back(flag + "=" + value);
  }
  return args;
}

// --- train ------------------------------------------------------------

struct TrainArgs {
  DataArgs data;
  std::string r = "2";
  double epsilon = 0.0;
  std::vector<double> cv_grid;
  int cv_folds = 3;
  std::string metric_file;
  std::uint64_t seed = 0;
  int max_iters = 2000;
  double step0 = 0.5;
  std::string schedule = "inverse-sqrt";
  double tol = 1e-8;
  std::string coef_out;
  std::string out;
};

int run_train(const TrainArgs& a) {
  Dataset d = load_data(a.data);

  DroConfig dro;
  dro.norms = NormPair(parse_r_flag(a.r));
  dro.epsilon = a.epsilon;
  if (!a.metric_file.empty()) dro.metric = MetricMatrix(load_matrix(a.metric_file));

  TrainConfig cfg;
  cfg.max_iters = a.max_iters;
  cfg.step0 = a.step0;
  cfg.step_schedule = a.schedule == "constant" ? StepSchedule::constant
                                               : StepSchedule::inverse_sqrt;
  cfg.tol = a.tol;
  cfg.seed = a.seed;

  json summary;
  if (!a.cv_grid.empty()) {
    CvResult cv = radius_cv(d, a.cv_grid, a.cv_folds, dro, cfg);
    dro.epsilon = cv.best_epsilon;
    summary["cv_validation_losses"] = cv.validation_losses;
  }

  TrainResult result = train_dro_mlr(d, dro, cfg);
  if (!a.coef_out.empty()) save_matrix(result.coef, a.coef_out);

  summary["epsilon"] = dro.epsilon;
  summary["final_objective"] = result.final_objective;
  summary["converged"] = result.converged;
  summary["iterations"] =
      result.objective_trace.empty() ? 0 : result.objective_trace.back().first;
  summary["certificate"] = worst_case_certificate(result, d, dro);
  summary["train"] = eval_json(evaluate(result.coef, d));
  emit(summary, a.out);
  return result.converged ? kExitOk : kExitSolver;
}

// --- evaluate ----------------------------------------------------------

struct EvaluateArgs {
  DataArgs data;
  std::string model;
  std::string out;
};

int run_evaluate(const EvaluateArgs& a) {
  Dataset d = load_data(a.data);
  emit(eval_json(evaluate(load_matrix(a.model), d)), a.out);
  return kExitOk;
}

// --- attack ------------------------------------------------------------

struct AttackArgs {
  DataArgs data;
  std::string kind = "wgn";
  double sigma = 0.1;
  double k_inf = 0.1;
  double overshoot = 0.02;
  int max_passes = 10;
  double target_fool_rate = 1.0;
  std::string model;
  std::uint64_t seed = 0;
  std::string out;
  std::string out_format = "csv";
  std::string summary_out;
};

int run_attack(const AttackArgs& a) {
  Dataset d = load_data(a.data);
  json summary{{"attack", a.kind}, {"n", d.size()}};
  Dataset perturbed = d;
  if (a.kind == "wgn") {
    perturbed = wgn_attack(d, a.sigma, a.seed);
    summary["sigma"] = a.sigma;
  } else {
    if (a.model.empty()) throw ValidationError("uap attack needs --model");
    AttackSpec spec;
    spec.kind = AttackKind::uap;
    spec.k_inf = a.k_inf;
    spec.overshoot = a.overshoot;
    spec.max_passes = a.max_passes;
    spec.target_fool_rate = a.target_fool_rate;
    UapResult r = uap(d, load_matrix(a.model), spec);
    perturbed = apply_perturbation(d, r.delta);
    summary["k"] = a.k_inf;
    summary["fool_rate"] = r.fool_rate;
    summary["passes"] = r.passes;
    summary["delta_inf_norm"] = r.delta.cwiseAbs().maxCoeff();
  }
  if (!a.out.empty()) {
    if (a.out_format == "csv") {
      save_csv(perturbed, a.out);
    } else if (a.out_format == "drof") {
      save_drof(perturbed, a.out);
    } else {
      throw ValidationError("attack output format must be csv or drof");
    }
    summary["out"] = a.out;
  }
  emit(summary, a.summary_out);
  return kExitOk;
}

// --- metric-learn -------------------------------------------------------

struct MetricArgs {
  std::string clean_path;
  std::string perturbed_path;
  std::string format = "csv";
  double margin = 1.0;
  std::string metric_out;
  std::string out;
};

int run_metric_learn(const MetricArgs& a) {
  Dataset clean = load_dataset(a.clean_path, a.format);
  Dataset perturbed = load_dataset(a.perturbed_path, a.format);
  if (clean.size() != perturbed.size() || clean.dim() != perturbed.dim()) {
    throw ValidationError("clean/perturbed datasets must align sample for sample");
  }
  std::vector<Vector> xs, xts;
  std::vector<LabelVector> labels;
  for (int i = 0; i < clean.size(); ++i) {
    xs.push_back(clean[i].features);
    xts.push_back(perturbed[i].features);
    labels.push_back(clean[i].label);
  }
  MetricSolution sol = learn_metric(build_metric_problem(xs, xts, labels, a.margin));
  if (!a.metric_out.empty()) save_matrix(sol.w.entries(), a.metric_out);
  emit(json{{"objective", sol.objective},
            {"slack_perturbed", sol.slack_perturbed},
            {"slack_clean", sol.slack_clean},
            {"iterations", sol.iterations},
            {"min_eigenvalue", sol.w.min_eigenvalue()}},
       a.out);
  return kExitOk;
}

// --- radius --------------------------------------------------------------

struct RadiusArgs {
  DataArgs data;
  std::string r = "2";
  std::vector<double> cv_grid;
  int cv_folds = 3;
  double c1 = 1.0, c2 = 1.0, a = 2.0, alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

int run_radius(const RadiusArgs& a) {
  Dataset d = load_data(a.data);
  json summary;
  if (!a.cv_grid.empty()) {
    DroConfig dro;
    dro.norms = NormPair(parse_r_flag(a.r));
    TrainConfig cfg;
    cfg.seed = a.seed;
    CvResult cv = radius_cv(d, a.cv_grid, a.cv_folds, dro, cfg);
    summary["method"] = "cv";
    summary["epsilon"] = cv.best_epsilon;
    summary["validation_losses"] = cv.validation_losses;
  } else {
    ConcentrationParams p;
    p.c1 = a.c1;
    p.c2 = a.c2;
    p.a = a.a;
    p.alpha = a.alpha;
    summary["method"] = "concentration";
    summary["epsilon"] =
        radius_concentration(d.size(), d.dim(), d.num_classes(), p);
  }
  emit(summary, a.out);
  return kExitOk;
}

// --- bound ---------------------------------------------------------------

struct BoundArgs {
  DataArgs data;
  std::string model;
  std::string r = "2";
  double alpha = 0.05;
  std::string out;
};

int run_bound(const BoundArgs& a) {
  Dataset d = load_data(a.data);
  Matrix coef = load_matrix(a.model);
  NormPair norms(parse_r_flag(a.r));
  BoundInputs in = measure_bound_inputs(coef, d, norms, a.alpha);
  const double empirical = empirical_loss(coef, d);
  emit(json{{"empirical_loss", empirical},
            {"bound", generalization_bound(in, empirical)},
            {"coef_bound", in.coef_bound},
            {"feature_bound", in.feature_bound},
            {"n", in.n},
            {"k", in.k},
            {"alpha", in.alpha}},
       a.out);
  return kExitOk;
}

// --- scenario / sweep -----------------------------------------------------

struct ScenarioArgs {
  DataArgs data;
  std::string scenario = "train-perturbed";
  std::string attack = "wgn";
  std::vector<double> strengths = {0.0, 0.5, 1.0};
  std::vector<int> counts;
  std::string epsilon_source = "fixed";
  double epsilon = 0.1;
  std::vector<double> cv_grid = {0.0, 0.01, 0.1, 1.0};
  int cv_folds = 3;
  std::string r = "2";
  bool use_metric = false;
  double metric_margin = 1.0;
  std::string metric_file;  // unused by scenarios but accepted for symmetry
  std::uint64_t seed = 0;
  int max_iters = 2000;
  std::string out;
  std::string summary_out;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& a, bool fixed_kind) {
  add_data_options(cmd, a.data);
  if (!fixed_kind) {
    cmd->add_option("--scenario", a.scenario, "Scenario kind")
        ->check(CLI::IsMember({"train-perturbed", "test-perturbed", "adv-training-sweep"}))
        ->capture_default_str();
  }
  cmd->add_option("--attack", a.attack, "Attack kind")
      ->check(CLI::IsMember({"wgn", "uap"}))
      ->capture_default_str();
  cmd->add_option("--strengths", a.strengths, "Attack strengths (sigma or k)")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--counts", a.counts, "Perturbed training counts (sweep)")
      ->delimiter(',');
  cmd->add_option("--epsilon-source", a.epsilon_source, "Radius selection")
      ->check(CLI::IsMember({"fixed", "cv", "concentration"}))
      ->capture_default_str();
  cmd->add_option("--epsilon", a.epsilon, "Fixed ambiguity radius")
      ->capture_default_str();
  cmd->add_option("--cv-grid", a.cv_grid, "Candidate radii for cross-validation")
      ->delimiter(',');
  cmd->add_option("--cv-folds", a.cv_folds, "Cross-validation folds")
      ->capture_default_str();
  cmd->add_option("--r", a.r, "Feature-space metric order")
      ->check(CLI::IsMember({"1", "2", "inf"}))
      ->capture_default_str();
  cmd->add_flag("--use-metric", a.use_metric, "Learn a weighted ground metric");
  cmd->add_option("--metric-margin", a.metric_margin, "Dissimilarity margin c")
      ->capture_default_str();
  cmd->add_option("--metric-file", a.metric_file,
                  "Precomputed metric matrix (ignored when --use-metric learns one)");
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd->add_option("--max-iters", a.max_iters, "Solver iteration cap")
      ->capture_default_str();
  cmd->add_option("--out", a.out, "Report CSV output path");
  cmd->add_option("--summary-out", a.summary_out, "JSON summary output path");
}

int run_scenario_cmd(const ScenarioArgs& a, const std::string& forced_kind) {
  Dataset d = load_data(a.data);

  ScenarioConfig cfg;
  cfg.scenario = parse_scenario(forced_kind.empty() ? a.scenario : forced_kind);
  cfg.attack.kind = a.attack == "uap" ? AttackKind::uap : AttackKind::wgn;
  cfg.strengths = a.strengths;
  cfg.perturbed_counts = a.counts;
  cfg.epsilon_source = parse_epsilon_source(a.epsilon_source);
  cfg.epsilon_fixed = a.epsilon;
  cfg.cv_grid = a.cv_grid;
  cfg.cv_folds = a.cv_folds;
  cfg.norms = NormPair(parse_r_flag(a.r));
  cfg.use_metric = a.use_metric;
  cfg.metric_margin = a.metric_margin;
  cfg.seed = a.seed;
  cfg.train.max_iters = a.max_iters;
  cfg.train.seed = a.seed;

  Report report = run_scenario(cfg, d);
  if (a.out.empty()) {
    report.write_csv(std::cout);
  } else {
    std::ofstream out(a.out);
    if (!out) throw ValidationError("cannot open " + a.out + " for writing");
    report.write_csv(out);
  }
  if (!a.summary_out.empty() || !a.out.empty()) {
    json summary{{"scenario", scenario_name(cfg.scenario)},
                 {"rows", report.rows.size()},
                 {"wall_time_seconds", report.wall_time_seconds}};
    if (!a.out.empty()) summary["report"] = a.out;
    emit(summary, a.summary_out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein distributionally robust multiclass logistic regression"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Fit a DRO-MLR model");
  add_data_options(train_cmd, train_args.data);
  train_cmd->add_option("--r", train_args.r, "Feature-space metric order")
      ->check(CLI::IsMember({"1", "2", "inf"}))
      ->capture_default_str();
  train_cmd->add_option("--epsilon", train_args.epsilon, "Ambiguity radius")
      ->capture_default_str();
  train_cmd->add_option("--cv-grid", train_args.cv_grid,
                        "Select epsilon by cross-validation over these radii")
      ->delimiter(',');
  train_cmd->add_option("--cv-folds", train_args.cv_folds, "Cross-validation folds")
      ->capture_default_str();
  train_cmd->add_option("--metric-file", train_args.metric_file,
                        "PSD weight matrix for the weighted ground metric");
  train_cmd->add_option("--seed", train_args.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--max-iters", train_args.max_iters, "Iteration cap")
      ->capture_default_str();
  train_cmd->add_option("--step0", train_args.step0, "Initial step size")
      ->capture_default_str();
  train_cmd->add_option("--step-schedule", train_args.schedule, "Step schedule")
      ->check(CLI::IsMember({"constant", "inverse-sqrt"}))
      ->capture_default_str();
  train_cmd->add_option("--tol", train_args.tol, "Convergence tolerance")
      ->capture_default_str();
  train_cmd->add_option("--coef-out", train_args.coef_out,
                        "Where to write the coefficient matrix (CSV)");
  train_cmd->add_option("--out", train_args.out, "JSON summary output path");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a saved model");
  add_data_options(eval_cmd, eval_args.data);
  eval_cmd->add_option("--model", eval_args.model, "Coefficient matrix (CSV)")->required();
  eval_cmd->add_option("--out", eval_args.out, "JSON summary output path");

  AttackArgs attack_args;
  auto* attack_cmd = app.add_subcommand("attack", "Perturb a dataset");
  add_data_options(attack_cmd, attack_args.data);
  attack_cmd->add_option("--attack", attack_args.kind, "Attack kind")
      ->check(CLI::IsMember({"wgn", "uap"}))
      ->capture_default_str();
  attack_cmd->add_option("--sigma", attack_args.sigma, "WGN standard deviation")
      ->capture_default_str();
  attack_cmd->add_option("--k", attack_args.k_inf, "UAP l-infinity budget")
      ->capture_default_str();
  attack_cmd->add_option("--overshoot", attack_args.overshoot, "UAP overshoot")
      ->capture_default_str();
  attack_cmd->add_option("--max-passes", attack_args.max_passes, "UAP pass cap")
      ->capture_default_str();
  attack_cmd->add_option("--target-fool-rate", attack_args.target_fool_rate,
                         "Stop once this fooling ratio is reached")
      ->capture_default_str();
  attack_cmd->add_option("--model", attack_args.model, "Coefficient matrix (UAP target)");
  attack_cmd->add_option("--seed", attack_args.seed, "Random seed")->capture_default_str();
  attack_cmd->add_option("--out", attack_args.out, "Perturbed dataset output path");
  attack_cmd->add_option("--out-format", attack_args.out_format, "Output format")
      ->check(CLI::IsMember({"csv", "drof"}))
      ->capture_default_str();
  attack_cmd->add_option("--summary-out", attack_args.summary_out,
                         "JSON summary output path");

  MetricArgs metric_args;
  auto* metric_cmd = app.add_subcommand("metric-learn",
                                        "Learn a PSD ground-metric weight matrix");
  metric_cmd->add_option("--clean", metric_args.clean_path, "Clean dataset")->required();
  metric_cmd->add_option("--perturbed", metric_args.perturbed_path,
                         "Aligned perturbed dataset")->required();
  metric_cmd->add_option("--format", metric_args.format, "Data format")
      ->check(CLI::IsMember({"csv", "drof"}))
      ->capture_default_str();
  metric_cmd->add_option("--margin", metric_args.margin, "Dissimilarity margin c")
      ->capture_default_str();
  metric_cmd->add_option("--metric-out", metric_args.metric_out,
                         "Where to write the learned matrix (CSV)");
  metric_cmd->add_option("--out", metric_args.out, "JSON summary output path");

  RadiusArgs radius_args;
  auto* radius_cmd = app.add_subcommand("radius", "Choose the ambiguity radius");
  add_data_options(radius_cmd, radius_args.data);
  radius_cmd->add_option("--r", radius_args.r, "Feature-space metric order")
      ->check(CLI::IsMember({"1", "2", "inf"}))
      ->capture_default_str();
  radius_cmd->add_option("--cv-grid", radius_args.cv_grid,
                         "Candidate radii; presence selects cross-validation")
      ->delimiter(',');
  radius_cmd->add_option("--cv-folds", radius_args.cv_folds, "Cross-validation folds")
      ->capture_default_str();
  radius_cmd->add_option("--c1", radius_args.c1, "Concentration constant c1")
      ->capture_default_str();
  radius_cmd->add_option("--c2", radius_args.c2, "Concentration constant c2")
      ->capture_default_str();
  radius_cmd->add_option("--a", radius_args.a, "Tail exponent a")
      ->capture_default_str();
  radius_cmd->add_option("--alpha", radius_args.alpha, "Confidence level")
      ->capture_default_str();
  radius_cmd->add_option("--seed", radius_args.seed, "Random seed")
      ->capture_default_str();
  radius_cmd->add_option("--out", radius_args.out, "JSON summary output path");

  BoundArgs bound_args;
  auto* bound_cmd = app.add_subcommand("bound", "Generalization bound for a model");
  add_data_options(bound_cmd, bound_args.data);
  bound_cmd->add_option("--model", bound_args.model, "Coefficient matrix (CSV)")->required();
  bound_cmd->add_option("--r", bound_args.r, "Feature-space metric order")
      ->check(CLI::IsMember({"1", "2", "inf"}))
      ->capture_default_str();
  bound_cmd->add_option("--alpha", bound_args.alpha, "Confidence level")
      ->capture_default_str();
  bound_cmd->add_option("--out", bound_args.out, "JSON summary output path");

  ScenarioArgs scenario_args;
  auto* scenario_cmd = app.add_subcommand("scenario", "Run a robustness benchmark scenario");
  add_scenario_options(scenario_cmd, scenario_args, false);

  ScenarioArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Adversarial-training sweep over m");
  add_scenario_options(sweep_cmd, sweep_args, true);

  std::string config_doc;
  for (CLI::App* cmd : {train_cmd, eval_cmd, attack_cmd, metric_cmd, radius_cmd,
                        bound_cmd, scenario_cmd, sweep_cmd}) {
    // Documented here; consumed by expand_config before CLI11 parses.
    cmd->add_option("--config", config_doc,
                    "Flat key=value file mirroring the flags; flags override");
  }

  try {
    std::vector<std::string> args =
        expand_config(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*train_cmd) return run_train(train_args);
    if (*eval_cmd) return run_evaluate(eval_args);
    if (*attack_cmd) return run_attack(attack_args);
    if (*metric_cmd) return run_metric_learn(metric_args);
    if (*radius_cmd) return run_radius(radius_args);
    if (*bound_cmd) return run_bound(bound_args);
    if (*scenario_cmd) return run_scenario_cmd(scenario_args, "");
    if (*sweep_cmd) return run_scenario_cmd(sweep_args, "adv-training-sweep");
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
