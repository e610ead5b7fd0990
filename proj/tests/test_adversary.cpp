#include "doctest.h"

#include <cmath>
#include <vector>

#include "pfol/adversary.hpp"

using namespace pfol;

namespace {
const AdversaryConfig kSquare{1.0, 1.0, 1.0, {1.0, false}};
}

TEST_CASE("SplitMix64 reference stream") {
  // First outputs for seed 0 of the published generator.
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("identical seeds give identical sequences") {
  for (auto kind : {SequenceKind::kRademacher, SequenceKind::kGaussian, SequenceKind::kPareto,
                    SequenceKind::kScaleJump, SequenceKind::kConstant}) {
    SequenceGenSpec spec;
    spec.kind = kind;
    spec.seed = 77;
    CHECK(gen_sequence(spec, 200) == gen_sequence(spec, 200));
  }
}

TEST_CASE("sequence shapes") {
  SequenceGenSpec spec;
  spec.scale = 2.5;
  spec.seed = 3;
  for (double g : gen_sequence(spec, 500)) CHECK(std::abs(g) == 2.5);

  spec.kind = SequenceKind::kScaleJump;
  spec.jump_factor = 10.0;
  const auto jump = gen_sequence(spec, 1000);
  double first = 0.0, second = 0.0;
  for (int t = 0; t < 500; ++t) first = std::max(first, std::abs(jump[t]));
  for (int t = 500; t < 1000; ++t) second = std::max(second, std::abs(jump[t]));
  CHECK(first <= 2.5);
  CHECK(second > 2.5);
  CHECK(second <= 25.0);

  spec.kind = SequenceKind::kPareto;
  for (double g : gen_sequence(spec, 500)) CHECK(std::abs(g) >= 2.5);

  CHECK(parse_sequence_kind("gaussian") == SequenceKind::kGaussian);
  CHECK_THROWS_AS(parse_sequence_kind("cauchy"), Error);
}

TEST_CASE("untriggered play returns h1") {
  Adversary adv(kSquare);
  for (int t = 1; t <= 20; ++t) {
    // The threshold is -2 - (t - 1) for psi = x^2, gamma = 1.
    CHECK(adv.threshold(t) == doctest::Approx(-2.0 - (t - 1)));
    CHECK(adv.adversary_next(-2.0 - (t - 1)) == 1.0);
  }
  CHECK(!adv.triggered());
}

TEST_CASE("trigger at round three") {
  Adversary adv(kSquare);
  CHECK(adv.adversary_next(0.0) == 1.0);
  CHECK(adv.adversary_next(0.0) == 1.0);
  CHECK(adv.adversary_next(-5.0) == -4.0);
  CHECK(adv.triggered());
  CHECK(*adv.tau() == 2);
  for (int t = 0; t < 5; ++t) CHECK(adv.adversary_next(-1e9) == 0.0);
}

TEST_CASE("certificates for psi = x^2") {
  Adversary quiet(kSquare);
  for (int t = 0; t < 10; ++t) quiet.adversary_next(0.0);
  const auto c = lower_bound_certificate(quiet, 10);
  CHECK(!c.triggered);
  CHECK(c.w_star == -20.0);
  CHECK(c.big_g == 1.0);
  const double hand = 1.0 + 1.0 / 32.0 + 100.0 + 5.0 * std::sqrt(10.0 * std::log(1.0 + 20.0 * std::sqrt(10.0)));
  CHECK(c.claimed_bound == doctest::Approx(hand).epsilon(1e-14));
  CHECK(c.validity.find("sufficiently large T") != std::string::npos);

  Adversary loud(kSquare);
  loud.adversary_next(0.0);
  loud.adversary_next(0.0);
  loud.adversary_next(-5.0);
  const auto d = lower_bound_certificate(loud, 3);
  CHECK(d.triggered);
  CHECK(d.w_star == 0.0);
  CHECK(d.big_g == 4.0);
  CHECK(d.claimed_bound == doctest::Approx(4.5));
}

TEST_CASE("pre-trigger floor") {
  // -2 eps tau h1 - psi*_gamma(2 tau h1) / 2 with psi* = theta^2 / 4.
  CHECK(never_triggered_floor(kSquare, 3) == doctest::Approx(-6.0 - 36.0 / 8.0));
  CHECK(never_triggered_floor(kSquare, 0) == 0.0);
}

TEST_CASE("gamma-scaled conjugates") {
  const RegularizerSpec psi{1.0, false};
  CHECK(psi_star_gamma(psi, 2.0, 4.0) == doctest::Approx(2.0 * 1.0));
  CHECK(psi_star_gamma_grad(psi, 2.0, 4.0) == doctest::Approx(1.0));
}
