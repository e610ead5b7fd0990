#include "doctest.h"

#include <cmath>
#include <vector>

#include "pfol/adversary.hpp"
#include "pfol/experiment.hpp"
#include "pfol/full_matrix.hpp"

using namespace pfol;

namespace {

// w e^w = x by bisection.
double lambert_oracle(double x) {
  double lo = 0.0, hi = std::max(1.0, std::log(x) + 1.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(mid) > x ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("Lambert W values") {
  CHECK(lambert_w(0.0) == 0.0);
  CHECK(lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lambert_w(1.0) == doctest::Approx(0.5671432904).epsilon(1e-10));
  for (double x : {1e-8, 0.1, 1.0, 7.5, 1e3, 1e6})
    CHECK(lambert_w(x) == doctest::Approx(lambert_oracle(x)).epsilon(1e-12));
  CHECK_THROWS_AS(lambert_w(-0.1), Error);
}

TEST_CASE("X function") {
  CHECK(x_fn(std::exp(1.0)) == doctest::Approx(0.0).scale(1.0));
  CHECK(x_fn(4.0 * std::exp(4.0)) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(std::isinf(x_fn(0.0)));
  for (double theta : {3.0, 10.0, 1e3, 1e9}) CHECK(x_fn(theta) <= std::sqrt(std::log(theta)));
}

TEST_CASE("rho") {
  CHECK(rho(2.0) == doctest::Approx(std::sqrt(2.0) * (1.0 - std::exp(-0.25))).epsilon(1e-15));
  CHECK(rho(2.0) == doctest::Approx(0.31278).epsilon(1e-4));
  CHECK(rho(1e6) == doctest::Approx(0.55650).epsilon(1e-4));
  CHECK(rho(1.0 + 1e-12) < 1e-11);
  CHECK_THROWS_AS(rho(1.0), Error);
}

TEST_CASE("phi at the origin is the continuous limit") {
  Matrix<double> sigma = Matrix<double>::Identity(2, 2);
  sigma(0, 0) = 4.0;
  const double at_zero = phi_value<double>(Vector<double>::Zero(2), sigma, 1.0, 1.0, 1.0);
  CHECK(at_zero == doctest::Approx(-0.5));
  const double near = phi_value<double>(Vector<double>::Constant(2, 1e-7), sigma, 1.0, 1.0, 1.0);
  CHECK(near == doctest::Approx(at_zero).epsilon(1e-4));
}

TEST_CASE("barrier conjugate is consistent with its gradient") {
  BallBarrier<double> b{1.5, 1.0};
  CHECK(b.conjugate(Vector<double>::Zero(2)) == 0.0);
  Vector<double> v(2);
  v << 0.7, -1.3;
  const Vector<double> w = b.conjugate_grad(v);
  CHECK(w.norm() < 1.5);
  // Fenchel-Young equality at the maximizer.
  CHECK(b.conjugate(v) == doctest::Approx(v.dot(w) - b.value(w)).epsilon(1e-12));
  const double step = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vector<double> dv = Vector<double>::Zero(2);
    dv(i) = step;
    const Vector<double> fd = (b.conjugate_grad(v + dv) - b.conjugate_grad(v - dv)) / (2.0 * step);
    CHECK((fd - b.conjugate_hessian(v).col(i)).norm() < 1e-7);
  }
}

TEST_CASE("dual value at zero statistics is eps") {
  FullMatrixConfig<double> cfg;
  cfg.eps = 0.7;
  const auto s = psi_star_value<double>(Vector<double>::Zero(2), Matrix<double>::Zero(2, 2), 3.0, cfg);
  CHECK(s.value == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(s.w.norm() < 1e-12);
}

TEST_CASE("first full-matrix prediction is zero") {
  FullMatrixLearner<double> fm(2, FullMatrixConfig<double>{});
  CHECK(fm.fm_predict(1.0).norm() < 1e-12);
  CHECK_THROWS_AS(fm.fm_update(Vector<double>::Constant(2, 1.0)), Error);
  CHECK_THROWS_AS(FullMatrixLearner<double>(5, FullMatrixConfig<double>{}), Error);
}

TEST_CASE("zero gradient leaves the statistics alone") {
  FullMatrixLearner<double> fm(2, FullMatrixConfig<double>{});
  fm.fm_predict(1.0);
  fm.fm_update(Vector<double>::Zero(2));
  CHECK(fm.g_sum().isZero());
  CHECK(fm.v().isZero());
  CHECK(fm.round() == 1);
}

TEST_CASE("prediction minimizes the primal objective") {
  FullMatrixConfig<double> cfg;
  Vector<double> G(2);
  G << 1.5, -0.4;
  Matrix<double> V(2, 2);
  V << 2.0, 0.3, 0.3, 1.0;
  const double h = 1.2;
  const auto sol = psi_star_value(G, V, h, cfg);
  const double best = fm_objective<double>(sol.w, G, V, h, cfg);
  std::uint64_t state = 5;
  for (int i = 0; i < 200; ++i) {
    SplitMix64 rng(state++);
    Vector<double> probe = sol.w;
    probe(0) += 0.05 * (rng.uniform() - 0.5);
    probe(1) += 0.05 * (rng.uniform() - 0.5);
    if (probe.norm() >= cfg.radius) continue;
    CHECK(fm_objective<double>(probe, G, V, h, cfg) >= best - 1e-7);
  }
}

TEST_CASE("regret bound at the origin is eps") {
  FullMatrixConfig<double> cfg;
  cfg.eps = 2.0;
  Matrix<double> V = Matrix<double>::Identity(2, 2) * 3.0;
  CHECK(fm_regret_bound<double>(V, 1.5, Vector<double>::Zero(2), cfg) == doctest::Approx(2.0));
  CHECK_THROWS_AS(fm_regret_bound<double>(V, 1.5, Vector<double>::Constant(2, 1.0), cfg), Error);
}

TEST_CASE("monotone potential and regret bound on a short run") {
  FullMatrixConfig<double> cfg;
  SequenceGenSpec spec;
  spec.kind = SequenceKind::kGaussian;
  spec.seed = 21;
  const auto g = gen_vector_sequence(spec, 40, 2);
  const auto h = nature_hints(g, 1.0);
  FullMatrixLearner<double> fm(2, cfg);
  std::vector<Vector<double>> ws;
  for (std::size_t t = 0; t < g.size(); ++t) {
    ws.push_back(fm.fm_predict(h[t]));
    const double before = fm.last_solution().value;
    fm.fm_update(g[t]);
    const double after = psi_star_value(fm.g_sum(), fm.v(), h[t], cfg).value;
    REQUIRE(g[t].dot(ws.back()) <= before - after + 1e-5);
  }
  Vector<double> u(2);
  u << 0.5, -0.5;
  double regret = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) regret += g[t].dot(ws[t] - u);
  CHECK(regret <= fm_regret_bound(fm.v(), fm.hint(), u, cfg));
}
