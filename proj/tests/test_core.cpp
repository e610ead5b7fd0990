#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "pfol/core.hpp"

using namespace pfol;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

TraceRow row(std::int64_t t, double g, double w) {
  TraceRow r;
  r.t = t;
  r.h = 1.0;
  r.g = Vector<double>::Constant(1, g);
  r.w = Vector<double>::Constant(1, w);
  return r;
}

}  // namespace

TEST_CASE("clip saturates and preserves sign") {
  CHECK(clip(5.0, 3.0) == 3.0);
  CHECK(clip(-2.0, 3.0) == -2.0);
  CHECK(clip(-7.0, 3.0) == -3.0);
  CHECK(code_of([] { clip(1.0, 0.0); }) == ErrorCode::kInvalidHint);
  CHECK(code_of([] { clip(1.0, -2.0); }) == ErrorCode::kInvalidHint);
}

TEST_CASE("clip is idempotent and moves g by max(0, |g| - h)") {
  std::uint64_t state = 17;
  auto next = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return double(state >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 1000; ++i) {
    const double g = (next() - 0.5) * 20.0;
    const double h = 0.01 + next() * 5.0;
    const double c = clip(g, h);
    CHECK(clip(c, h) == c);
    CHECK(std::abs(c - g) == doctest::Approx(std::max(0.0, std::abs(g) - h)).epsilon(1e-14));
    CHECK(std::abs(c) <= h);
  }
}

TEST_CASE("pair dual norm") {
  CHECK(dual_norm_pair(3.0, 0.0, 3.0, 1.0) == doctest::Approx(1.0));
  CHECK(dual_norm_pair(0.0, 2.0, 5.0, 2.0) == doctest::Approx(1.0));
  CHECK(dual_norm_pair(3.0, 4.0, 3.0, 4.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(code_of([] { dual_norm_pair(1.0, 1.0, 0.0, 1.0); }) == ErrorCode::kPrecondition);
}

TEST_CASE("dual norm is the dual of the weighted pair norm") {
  // |<(g, a), (x, y)>| <= ||(x, y)|| ||(g, a)||_*, with equality at the aligned point.
  const double h = 2.5, gamma = 0.7, g = -1.3, a = 0.4;
  const double x = g / (h * h), y = a / (gamma * gamma);
  const double lhs = g * x + a * y;
  CHECK(lhs == doctest::Approx(weighted_norm(x, y, h, gamma) * dual_norm_pair(g, a, h, gamma)));
  for (double angle = 0.0; angle < 6.3; angle += 0.1) {
    const double xs = std::cos(angle), ys = std::sin(angle);
    CHECK(std::abs(g * xs + a * ys) <= weighted_norm(xs, ys, h, gamma) * dual_norm_pair(g, a, h, gamma) + 1e-12);
  }
}

TEST_CASE("regret accounting") {
  Trace trace{row(1, 1.0, 0.0), row(2, 1.0, 0.0)};
  CHECK(regret_against(trace, 1.0) == -2.0);

  Trace same{row(1, 0.3, 2.0), row(2, -1.0, 2.0)};
  CHECK(regret_against(same, 2.0) == 0.0);

  CHECK(code_of([&] { regret_against(trace, Vector<double>::Zero(2)); }) == ErrorCode::kShape);
  CHECK(code_of([] { regret_against(Trace{}, 0.0); }) == ErrorCode::kPrecondition);
}

TEST_CASE("power regularizer pieces are consistent") {
  for (double q : {0.5, 1.0, 2.0, 3.0}) {
    for (bool scaled : {false, true}) {
      const auto psi = RegularizerSpec::power(q, scaled);
      for (double x : {-2.0, -0.3, 0.0, 0.7, 4.0}) {
        CHECK(psi_inverse(psi, psi_value(psi, std::abs(x))) == doctest::Approx(std::abs(x)));
        const double theta = psi_derivative(psi, x);
        CHECK(psi_conjugate_grad(psi, theta) == doctest::Approx(x));
        // Fenchel-Young equality at the matched pair.
        CHECK(psi_conjugate(psi, theta) == doctest::Approx(theta * x - psi_value(psi, x)).epsilon(1e-12));
      }
    }
  }
  CHECK(code_of([] { RegularizerSpec::power(0.0); }) == ErrorCode::kUnsupportedRegularizer);
  CHECK(code_of([] { RegularizerSpec::power(-1.0); }) == ErrorCode::kUnsupportedRegularizer);
}

TEST_CASE("default comparator grid") {
  const auto grid = default_comparator_grid(2.0);
  CHECK(grid.size() == 9);
  CHECK(grid[0] == 0.0);
  CHECK(std::count(grid.begin(), grid.end(), 200.0) == 1);
  CHECK(std::count(grid.begin(), grid.end(), -0.2) == 1);
}
