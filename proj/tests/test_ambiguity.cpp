#include "dromlr/ambiguity.hpp"
#include "dromlr/harness.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace dromlr;

namespace {

ConcentrationParams params_with(double c1, double c2, double a, double alpha) {
  ConcentrationParams p;
  p.c1 = c1;
  p.c2 = c2;
  p.a = a;
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST_CASE("concentration radius at the branch boundary") {
  // c1 = e * alpha makes L = 1/c2 = 1, so N = 1 sits exactly on the boundary
  // and (1/1)^{1/2} = 1.
  const double alpha = 0.1;
  ConcentrationParams p = params_with(std::exp(1.0) * alpha, 1.0, 2.0, alpha);
  REQUIRE(radius_concentration(1, 1, 2, p) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("concentration radius below the boundary uses the tail exponent") {
  const double alpha = 0.1;
  // L = log(c1/alpha)/c2 = 4 with c1 = alpha*e^4, c2 = 1.
  ConcentrationParams p = params_with(alpha * std::exp(4.0), 1.0, 2.0, alpha);
  // N = 2 < L = 4: value (4/2)^{1/2} = sqrt(2).
  REQUIRE(radius_concentration(2, 3, 4, p) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
  // N = 16 >= L = 4: exponent 1/max(p+K,2) = 1/7 -> (0.25)^{1/7}.
  REQUIRE(radius_concentration(16, 3, 4, p) ==
          Catch::Approx(std::pow(0.25, 1.0 / 7.0)).margin(1e-12));
}

TEST_CASE("concentration radius decreases strictly in N and alpha") {
  ConcentrationParams p = params_with(2.0, 0.5, 2.0, 0.05);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 2, 4, 8, 16, 64, 256}) {
    const double eps = radius_concentration(n, 3, 3, p);
    REQUIRE(eps < prev);
    prev = eps;
  }
  ConcentrationParams lo = params_with(2.0, 0.5, 2.0, 0.01);
  ConcentrationParams hi = params_with(2.0, 0.5, 2.0, 0.2);
  REQUIRE(radius_concentration(100, 3, 3, hi) < radius_concentration(100, 3, 3, lo));
}

TEST_CASE("concentration radius is continuous at the boundary when a = max(p+K,2)") {
  // p + K = 2 and a = 2: both branches share the exponent, so the function is
  // continuous across N = L.
  ConcentrationParams p = params_with(std::exp(3.0) * 0.1, 1.0, 2.0, 0.1);  // L = 3
  const double below = radius_concentration(2, 1, 1 + 1, p);
  const double above = radius_concentration(3, 1, 1 + 1, p);
  REQUIRE(below > above);
  // Same formula on both sides: (L/N)^{1/2}.
  REQUIRE(below == Catch::Approx(std::sqrt(3.0 / 2.0)).margin(1e-12));
  REQUIRE(above == Catch::Approx(std::sqrt(3.0 / 3.0)).margin(1e-12));
}

TEST_CASE("concentration radius rejects invalid parameters") {
  REQUIRE_THROWS_AS(radius_concentration(10, 2, 2, params_with(-1, 1, 2, 0.1)),
                    ValidationError);
  REQUIRE_THROWS_AS(radius_concentration(10, 2, 2, params_with(1, 1, 0.5, 0.1)),
                    ValidationError);
  REQUIRE_THROWS_AS(radius_concentration(10, 2, 2, params_with(1, 1, 2, 1.5)),
                    ValidationError);
  // log(c1/alpha) <= 0
  REQUIRE_THROWS_AS(radius_concentration(10, 2, 2, params_with(0.05, 1, 2, 0.1)),
                    ValidationError);
}

TEST_CASE("cross-validation returns the only candidate of a singleton grid") {
  Dataset d = gaussian_mixture(40, 3, 2, 1.0, 5);
  TrainConfig cfg;
  cfg.max_iters = 100;
  DroConfig dro;
  CvResult r = radius_cv(d, {0.37}, 3, dro, cfg);
  REQUIRE(r.best_epsilon == 0.37);
  REQUIRE(r.validation_losses.size() == 1);
}

TEST_CASE("duplicated grid entries do not change the selection") {
  Dataset d = gaussian_mixture(40, 3, 2, 1.0, 5);
  TrainConfig cfg;
  cfg.max_iters = 100;
  DroConfig dro;
  CvResult a = radius_cv(d, {0.0, 0.1}, 3, dro, cfg);
  CvResult b = radius_cv(d, {0.0, 0.1, 0.1, 0.0}, 3, dro, cfg);
  REQUIRE(a.best_epsilon == b.best_epsilon);
  REQUIRE(b.validation_losses[0] == b.validation_losses[3]);
  REQUIRE(b.validation_losses[1] == b.validation_losses[2]);
}

TEST_CASE("cross-validation picks a positive radius on contaminated data") {
  // Label-flip contamination makes the unregularized fit overconfident.
  Dataset clean = gaussian_mixture(60, 3, 2, 2.5, 17);
  std::vector<Sample> samples(clean.samples());
  std::mt19937_64 flip_rng(99);
  for (int i = 0; i < 18; ++i) {
    const std::size_t idx = flip_rng() % samples.size();
    const int k = samples[idx].label.index();
    samples[idx] = {samples[idx].features, LabelVector(k == 1 ? 2 : 1, 2)};
  }
  Dataset noisy(samples);
  TrainConfig cfg;
  cfg.max_iters = 800;
  cfg.step0 = 1.0;
  cfg.seed = 3;
  DroConfig dro;
  CvResult r = radius_cv(noisy, {0.0, 0.1}, 3, dro, cfg);
  REQUIRE(r.best_epsilon == 0.1);
}

TEST_CASE("stratification fails when a class has fewer samples than folds") {
  std::vector<Sample> samples{{Vector::Zero(2), LabelVector(1, 2)},
                              {Vector::Ones(2), LabelVector(1, 2)},
                              {Vector::Ones(2), LabelVector(1, 2)},
                              {-Vector::Ones(2), LabelVector(2, 2)}};
  Dataset d(samples);
  TrainConfig cfg;
  DroConfig dro;
  REQUIRE_THROWS_AS(radius_cv(d, {0.1}, 2, dro, cfg), ValidationError);
  REQUIRE_THROWS_AS(radius_cv(d, {}, 2, dro, cfg), ValidationError);
}

TEST_CASE("generalization bound with a vanishing coefficient term") {
  BoundInputs in;
  in.feature_bound = 3.0;
  in.coef_bound = 0.0;
  in.n = 100;
  in.k = 4;
  in.r = Order::two;
  in.alpha = 0.1;
  const double logk = std::log(4.0);
  const double expected = 0.7 + 2.0 * logk / 10.0 + logk * std::sqrt(8.0 * std::log(20.0) / 100.0);
  REQUIRE(generalization_bound(in, 0.7) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("quadrupling N halves the additive bound terms") {
  BoundInputs in;
  in.feature_bound = 1.0;
  in.coef_bound = 1.0;
  in.n = 100;
  in.k = 2;
  in.r = Order::two;
  in.alpha = 0.05;
  const double slack_n = generalization_bound(in, 0.0);
  in.n = 400;
  const double slack_4n = generalization_bound(in, 0.0);
  REQUIRE(slack_4n == Catch::Approx(slack_n / 2.0).margin(1e-12));
}

TEST_CASE("generalization bound hand evaluation") {
  // K = 2, r = 2, C = R = 1, N = 100, alpha = 0.05, empirical = 0.5.
  BoundInputs in;
  in.feature_bound = 1.0;
  in.coef_bound = 1.0;
  in.n = 100;
  in.k = 2;
  in.r = Order::two;
  in.alpha = 0.05;
  const double term = std::log(2.0) + 1.0 * (1.0 + std::sqrt(2.0));
  const double expected =
      0.5 + 2.0 * term / 10.0 + term * std::sqrt(8.0 * std::log(40.0) / 100.0);
  REQUIRE(generalization_bound(in, 0.5) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("the certificate is the objective at the trained coefficients") {
  Dataset d = gaussian_mixture(50, 3, 2, 1.0, 77);
  TrainConfig cfg;
  cfg.max_iters = 200;
  DroConfig dro;
  dro.epsilon = 0.2;
  TrainResult r = train_dro_mlr(d, dro, cfg);
  const double cert = worst_case_certificate(r, d, dro);
  REQUIRE(cert == Catch::Approx(r.final_objective).margin(1e-12));
  REQUIRE(cert >= empirical_loss(r.coef, d));

  DroConfig erm;
  erm.epsilon = 0.0;
  TrainResult r0 = train_dro_mlr(d, erm, cfg);
  REQUIRE(worst_case_certificate(r0, d, erm) ==
          Catch::Approx(empirical_loss(r0.coef, d)));
}
