#include "doctest.h"

#include <cmath>
#include <vector>

#include "pfol/adversary.hpp"
#include "pfol/base_learner.hpp"

using namespace pfol;

TEST_CASE("first round plays zero") {
  BaseLearner<double> b;
  CHECK(b.predict(1.0) == 0.0);
  CHECK(b.last_theta() == 0.0);
}

TEST_CASE("second round by hand") {
  BaseLearner<double> b;
  b.predict(1.0);
  b.update(1.0);
  const double w = b.predict(1.0);
  const double l4 = std::log(4.0);
  CHECK(b.last_alpha() == doctest::Approx(1.0 / (2.0 * l4 * l4)).epsilon(1e-14));
  CHECK(b.last_theta() == doctest::Approx(1.0 / 72.0).epsilon(1e-14));
  CHECK(w == doctest::Approx(-std::expm1(1.0 / 72.0) / (2.0 * l4 * l4)).epsilon(1e-14));
  CHECK(w == doctest::Approx(-0.00364).epsilon(1e-3));
}

TEST_CASE("state bookkeeping") {
  BaseLearner<double> b;
  b.predict(1.0);
  b.update(1.0);
  CHECK(b.grad_sum() == 1.0);
  CHECK(b.grad_sq_sum() == 1.0);
  CHECK(b.ratio_sum() == 1.0);

  b.predict(2.0);
  b.update(0.0);
  CHECK(b.round() == 2);
  CHECK(b.grad_sum() == 1.0);
  CHECK(b.grad_sq_sum() == 1.0);
  CHECK(b.ratio_sum() == 1.0);
}

TEST_CASE("contract violations") {
  BaseLearner<double> b;
  b.predict(1.0);
  CHECK_THROWS_AS(b.update(1.5), Error);
  try {
    b.update(1.5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kContractViolation);
  }
  BaseLearner<double> fresh;
  CHECK_THROWS_AS(fresh.update(0.1), Error);
  BaseLearner<double> shrinking;
  shrinking.predict(2.0);
  shrinking.update(0.0);
  CHECK_THROWS_AS(shrinking.predict(1.0), Error);
  CHECK_THROWS_AS(BaseLearner<double>(BaseConfig<double>{1.0, 0.7}), Error);
}

TEST_CASE("theta switches branch continuously") {
  // The two branches agree at |S| = 2kV/h.
  const double k = 3.0, v = 5.0, h = 2.0, s = 2.0 * k * v / h;
  const double quad = s * s / (4.0 * k * k * v);
  const double lin = s / (k * h) - v / (h * h);
  CHECK(quad == doctest::Approx(lin));
}

TEST_CASE("explicit bound at u = 0") {
  const std::vector<double> g{0.5, -1.0, 2.0, 0.25};
  const auto h = prefix_max_hints<double>(g, 1.0);
  const auto s = summarize<double>(g, h);
  CHECK(theorem_bound_half(s, 0.0, BaseConfig<double>{1.5, 0.5}) == doctest::Approx(8.0 * 2.0 * 1.5));
  double sq = 0.0;
  for (double x : g) sq += x * x;
  CHECK(theorem_bound_below_half(s, 0.0, BaseConfig<double>{1.5, 0.0}) == doctest::Approx(4.0 * 1.5 * std::sqrt(sq)));
  CHECK_THROWS_AS(theorem_bound_half(s, 0.0, BaseConfig<double>{1.0, 0.0}), Error);
  CHECK_THROWS_AS(theorem_bound_below_half(s, 0.0, BaseConfig<double>{1.0, 0.5}), Error);
}

TEST_CASE("explicit bound for one unit round at u = 1") {
  HintedRunSummary<double> s;
  s.add(1.0, 1.0);
  const double l4 = std::log(4.0);
  const double L = std::log(2.0 * l4 * l4 + 1.0);
  const double expected = 8.0 + 6.0 * std::sqrt(2.0 * L) + 6.0 * L;
  CHECK(theorem_bound_half(s, 1.0, BaseConfig<double>{}) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("odd in the gradient sequence") {
  SequenceGenSpec spec;
  spec.kind = SequenceKind::kGaussian;
  spec.seed = 3;
  const auto g = gen_sequence(spec, 500);
  std::vector<double> neg;
  for (double x : g) neg.push_back(-x);
  const auto h = prefix_max_hints<double>(g, 1.0);
  for (double p : {0.5, 0.25, 0.0}) {
    const BaseConfig<double> cfg{1.0, p};
    const auto a = run_base<double>(g, h, cfg);
    const auto b = run_base<double>(neg, h, cfg);
    for (std::size_t t = 0; t < g.size(); ++t) REQUIRE(b.w[t] == -a.w[t]);
  }
}

TEST_CASE("regret and alpha-sum bounds on seeded runs") {
  for (double p : {0.5, 0.25, 0.0}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      SequenceGenSpec spec;
      spec.kind = seed % 2 ? SequenceKind::kScaleJump : SequenceKind::kRademacher;
      spec.seed = seed;
      const auto g = gen_sequence(spec, 3000);
      const auto h = prefix_max_hints<double>(g, 1.0);
      const BaseConfig<double> cfg{1.0, p};
      const auto run = run_base<double>(g, h, cfg);
      CHECK(run.alpha_sum <= alpha_sum_limit(run.summary, cfg));
      for (double u : default_comparator_grid(1.0)) {
        double regret = 0.0;
        for (std::size_t t = 0; t < g.size(); ++t) regret += g[t] * (run.w[t] - u);
        CHECK(regret <= base_theorem_bound(run.summary, u, cfg) * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("prefix-max hints") {
  const std::vector<double> g{0.5, -3.0, 2.0, 4.0};
  const auto h = prefix_max_hints<double>(g, 1.0);
  CHECK(h == std::vector<double>{1.0, 3.0, 3.0, 4.0});
}
