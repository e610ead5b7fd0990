#include "pfol/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "pfol/adversary.hpp"
#include "pfol/base_learner.hpp"
#include "pfol/batch.hpp"
#include "pfol/epigraph.hpp"
#include "pfol/experiment.hpp"
#include "pfol/full_matrix.hpp"
#include "pfol/trace_io.hpp"
#include "pfol/unconstrained.hpp"

namespace pfol {

void CheckResult::bound(double value, double limit, double rel_slack) {
  ++samples;
  ratio_kind = true;
  const bool ok = value <= limit + rel_slack * std::abs(limit);
  pass = pass && ok;
  double ratio;
  if (limit > 0.0) ratio = value / limit;
  else ratio = value <= limit ? 0.0 : std::numeric_limits<double>::infinity();
  if (samples == 1 || ratio > worst) worst = ratio;
}

void CheckResult::require(bool ok) {
  ++samples;
  pass = pass && ok;
  if (!ok) worst += 1.0;  // counts failures
}

namespace {

SequenceGenSpec spec_of(SequenceKind kind, std::uint64_t seed, double scale = 1.0) {
  SequenceGenSpec s;
  s.kind = kind;
  s.seed = seed;
  s.scale = scale;
  s.jump_factor = 10.0;
  s.tail_alpha = 1.5;
  return s;
}

double uniform(SplitMix64& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double sum_gw(const std::vector<double>& g, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * w[i];
  return s;
}

double sum_of(const std::vector<double>& g) {
  double s = 0.0;
  for (double x : g) s += x;
  return s;
}

}  // namespace

BaseChecks check_base(int seeds, std::int64_t rounds, double p, double alpha_scale) {
  const SequenceKind kinds[] = {SequenceKind::kRademacher, SequenceKind::kGaussian, SequenceKind::kScaleJump};
  BaseChecks out;
  const BaseConfig<double> nominal{1.0, p};
  const BaseConfig<double> run_cfg{1.0, p, alpha_scale};
  for (int s = 0; s < seeds; ++s) {
    const auto g = gen_sequence(spec_of(kinds[s % 3], 0xB45E0000ULL + std::uint64_t(s)), rounds);
    const auto h = prefix_max_hints<double>(g, 1.0);
    const auto run = run_base<double>(g, h, run_cfg);
    const double gw = sum_gw(g, run.w), gs = sum_of(g);
    for (double u : default_comparator_grid(1.0))
      out.regret_bound.bound(gw - u * gs, base_theorem_bound(run.summary, u, nominal), 1e-9);
    out.alpha_sum.bound(run.alpha_sum, alpha_sum_limit(run.summary, nominal), 1e-9);

    std::vector<double> neg(g.size());
    std::transform(g.begin(), g.end(), neg.begin(), [](double x) { return -x; });
    const auto flipped = run_base<double>(neg, h, run_cfg);
    bool odd = true;
    for (std::size_t t = 0; t < g.size(); ++t) odd = odd && flipped.w[t] == -run.w[t];
    out.oddness.require(odd && run.w.front() == 0.0);
  }
  out.regret_bound.detail = "max regret/bound";
  out.alpha_sum.detail = "max alpha-sum/limit";
  out.oddness.detail = "failing runs";
  return out;
}

EpigraphChecks check_epigraph_runs(int seeds, std::int64_t rounds) {
  const SequenceKind kinds[] = {SequenceKind::kRademacher, SequenceKind::kGaussian, SequenceKind::kScaleJump,
                                SequenceKind::kPareto};
  const RegularizerSpec psis[] = {{1.0, false}, {1.0, true}, {0.5, false}, {2.0, true}};
  const double gammas[] = {1.0, 0.5, 3.0};
  EpigraphChecks out;
  for (int s = 0; s < seeds; ++s) {
    EpigraphConfig<double> ec;
    ec.psi = psis[s % 4];
    ec.gamma = gammas[s % 3];
    ec.p = (s / 4) % 2 ? 0.0 : 0.5;
    EpigraphLearner<double> learner(ec);
    const auto g = gen_sequence(spec_of(kinds[s % 4], 0xE9100000ULL + std::uint64_t(s)), rounds);
    const auto h = prefix_max_hints<double>(g, 1.0);

    CompositeRunSummary<double> summary;
    std::vector<double> x(g.size()), a(g.size());
    double prev = 1.0, ratio = 0.0;
    for (std::size_t t = 0; t < g.size(); ++t) {
      x[t] = learner.predict(h[t]);
      const double r = (h[t] - prev) / h[t];
      prev = h[t];
      ratio += r;
      a[t] = ec.gamma * r / (1.0 + ratio);
      learner.update(g[t], a[t]);
      const auto& rd = learner.last_round();
      out.feasibility.require(rd.y >= psi_value(ec.psi, rd.x) - 1e-9);
      const double dn = dual_norm_pair(g[t], a[t], h[t], ec.gamma);
      const bool moved = rd.x != rd.x_hat || rd.y != rd.y_hat;
      if (moved && dn > 0.0)
        out.dual_norm.require(std::abs(dual_norm_pair(rd.delta_x, rd.delta_y, h[t], ec.gamma) - dn) <= 1e-12 * dn);
      out.negdelta.require(rd.delta_y <= 0.0);
      out.deltamag.require(std::abs(rd.delta_x) <= std::sqrt(2.0) * std::abs(g[t]) * (1.0 + 1e-12) &&
                           std::abs(rd.delta_y) <= std::sqrt(2.0) * ec.gamma * (1.0 + 1e-12));
      if (t == 0) summary.first_hint = h[t];
      summary.last_hint = h[t];
      summary.sum_g2 += g[t] * g[t];
      summary.sum_a += a[t];
    }
    const auto k = base_guarantee_constants(BaseConfig<double>{ec.eps_x, ec.p}, rounds);
    for (double u : default_comparator_grid(1.0)) {
      double reg = 0.0;
      for (std::size_t t = 0; t < g.size(); ++t)
        reg += g[t] * (x[t] - u) + a[t] * (psi_value(ec.psi, x[t]) - psi_value(ec.psi, u));
      out.composite_regret.bound(reg, composite_regret_bound(summary, u, ec, k), 1e-9);
    }
  }
  out.feasibility.detail = out.dual_norm.detail = out.negdelta.detail = out.deltamag.detail = "failing rounds";
  out.composite_regret.detail = "max regret/bound";
  return out;
}

ProjectionChecks check_projection(int instances, int grid_points) {
  ProjectionChecks out;
  SplitMix64 rng(0x9A0EC7ULL);
  const RegularizerSpec square{1.0, false};
  int negative = 0;
  for (int i = 0; i < instances; ++i) {
    const double h = std::exp(uniform(rng, -1.5, 1.5));
    const double gamma = std::exp(uniform(rng, -1.5, 1.5));
    const double xh = uniform(rng, -5.0, 5.0);
    const double yh = xh * xh - std::exp(uniform(rng, -3.0, 3.5));
    const auto closed = project_quadratic_closed_form(xh, yh, h, gamma);
    const auto numeric = project_epigraph(xh, yh, h, gamma, square);
    const bool neg = closed.radicand < 0.0;
    negative += neg;
    out.fallback_exact.require(neg ? closed.path == ProjectionPath::kFallbackNegativeRadicand
                                   : closed.path == ProjectionPath::kClosedForm);
    if (closed.path == ProjectionPath::kClosedForm)
      out.closed_form_agreement.bound(std::abs(closed.point.x - numeric.x), 1e-8);
  }
  out.closed_form_agreement.detail = "max |x_closed - x_numeric| / 1e-8";
  out.fallback_exact.detail = "mismatches (" + std::to_string(negative) + " negative-radicand instances)";

  if (grid_points > 0) {
    const RegularizerSpec psis[] = {{1.0, false}, {0.5, false}, {2.0, true}, {1.0, true}};
    for (int i = 0; i < instances; ++i) {
      const RegularizerSpec psi = psis[i % 4];
      const double h = std::exp(uniform(rng, -1.5, 1.5));
      const double gamma = std::exp(uniform(rng, -1.5, 1.5));
      const double xh = uniform(rng, -5.0, 5.0);
      const double yh = uniform(rng, -10.0, 30.0);
      const auto pr = project_epigraph(xh, yh, h, gamma, psi);
      const double fp = h * h * (pr.x - xh) * (pr.x - xh) + gamma * gamma * (pr.y - yh) * (pr.y - yh);
      const double radius = std::hypot(h * xh, gamma * yh) / h;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < grid_points; ++j) {
        const double x = xh - radius + 2.0 * radius * j / (grid_points - 1);
        const double dy = std::max(0.0, psi_value(psi, x) - yh);
        best = std::min(best, h * h * (x - xh) * (x - xh) + gamma * gamma * dy * dy);
      }
      out.dominance.require(fp <= best * (1.0 + 1e-9) + 1e-12);
    }
    out.dominance.detail = "instances beaten by a grid point";
  }
  return out;
}

ScheduleChecks check_schedule(int seeds, std::int64_t rounds) {
  const SequenceKind kinds[] = {SequenceKind::kScaleJump, SequenceKind::kPareto, SequenceKind::kGaussian,
                                SequenceKind::kRademacher};
  const double qs[] = {1.0, 0.5, 2.0};
  const double gammas[] = {1.0, 0.3, 4.0};
  ScheduleChecks out;
  auto drive = [&](Unconstrained1d<double>& learner, const std::vector<double>& g) {
    for (std::size_t t = 0; t < g.size(); ++t) {
      learner.magnitude_step(g[t]);
      const auto& st = learner.last_step();
      out.a_zero_without_clipping.require((st.increment == 0.0) == (learner.last_a() == 0.0));
      const auto& tr = learner.tracker();
      out.ratio_sum.require(tr.ratio_sum <= std::min(std::log(tr.h / tr.h1), double(tr.rounds)) + 1e-12);
    }
  };
  auto finish = [&](const Unconstrained1d<double>& learner) {
    const auto& cfg = learner.config();
    const auto& tr = learner.tracker();
    out.a_sum.bound(learner.a_sum(), a_sum_limit(cfg.gamma, tr.h, tr.h1), 1e-12);
    out.penalty_sum.bound(learner.penalty_sum(), penalty_sum_limit(tr.h, tr.h1, cfg.gamma, cfg.psi), 1e-12);
  };

  for (int s = 0; s < seeds; ++s) {
    UnconstrainedConfig<double> uc;
    uc.psi = {qs[s % 3], true};
    uc.gamma = gammas[(s / 3) % 3];
    uc.h1 = s % 2 ? 0.01 : 1.0;
    const auto g = gen_sequence(spec_of(kinds[s % 4], 0x5C4ED000ULL + std::uint64_t(s), 1.0 + s % 5), rounds);
    Unconstrained1d<double> learner(uc);
    drive(learner, g);
    finish(learner);

    // Scaling g and h1 together scales every hint and leaves a_t alone.
    const double scale = 7.3;
    UnconstrainedConfig<double> scaled_cfg = uc;
    scaled_cfg.h1 = uc.h1 * scale;
    Unconstrained1d<double> a(uc), b(scaled_cfg);
    bool ok = true;
    for (std::size_t t = 0; t < std::min<std::size_t>(g.size(), 2000); ++t) {
      a.magnitude_step(g[t]);
      b.magnitude_step(g[t] * scale);
      ok = ok && b.tracker().h == a.tracker().h * scale &&
           std::abs(b.last_a() - a.last_a()) <= 1e-12 * std::max(1.0, a.last_a());
    }
    out.scale_covariance.require(ok);
  }

  // Against the lower-bound adversary, which spikes the gradient once.
  for (double q : qs) {
    UnconstrainedConfig<double> uc;
    uc.psi = {q, true};
    Unconstrained1d<double> learner(uc);
    Adversary adv(AdversaryConfig{1.0, 1.0, 1.0, {q, true}});
    for (std::int64_t t = 0; t < rounds; ++t) {
      const double w = learner.predict();
      learner.update(adv.adversary_next(w));
    }
    finish(learner);
  }
  out.a_sum.detail = "max sum_a/limit";
  out.penalty_sum.detail = "max penalty/limit";
  out.a_zero_without_clipping.detail = out.ratio_sum.detail = "failing rounds";
  out.scale_covariance.detail = "failing runs";
  return out;
}

CheckResult check_direction(const std::vector<int>& dims, int seeds, std::int64_t rounds) {
  const SequenceKind kinds[] = {SequenceKind::kGaussian, SequenceKind::kRademacher, SequenceKind::kPareto,
                                SequenceKind::kConstant, SequenceKind::kScaleJump};
  CheckResult out;
  for (int d : dims) {
    for (int s = 0; s < seeds; ++s) {
      const auto g = gen_vector_sequence(spec_of(kinds[s % 5], 0xD1500000ULL + std::uint64_t(100 * d + s)), rounds, d);
      DirectionLearner<double> learner(d);
      double lin = 0.0;
      Vector<double> total = Vector<double>::Zero(d);
      for (const auto& gt : g) {
        lin += gt.dot(learner.w);
        total += gt;
        learner.direction_step(gt);
      }
      out.bound(lin + total.norm(), 2.0 * std::sqrt(2.0 * learner.grad_sq_total), 1e-12);
    }
  }
  out.detail = "max (regret + ||sum g||) / (2 sqrt(2 sum ||g||^2))";
  return out;
}

SublinearityProbe sublinearity_probe(int seeds, std::int64_t rounds, double comparator) {
  SublinearityProbe out;
  double sum_t = 0.0, sum_2t = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto g = gen_sequence(spec_of(SequenceKind::kRademacher, 0x50B1000ULL + std::uint64_t(s)), 2 * rounds);
    Unconstrained1d<double> learner;
    double regret = 0.0, at_t = 0.0, learner_term = 0.0;
    for (std::int64_t t = 0; t < 2 * rounds; ++t) {
      const double w = learner.magnitude_step(g[t]);
      regret += g[t] * (w - comparator);
      learner_term += g[t] * w;
      if (t + 1 == rounds) at_t = regret;
    }
    out.ratios.push_back(regret / at_t);
    out.max_learner_term = std::max(out.max_learner_term, std::abs(learner_term));
    sum_t += at_t;
    sum_2t += regret;
  }
  for (double r : out.ratios) out.mean_of_ratios += r / double(seeds);
  out.ratio_of_means = sum_2t / sum_t;
  auto sorted = out.ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n) out.median_ratio = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return out;
}

FullMatrixChecks check_full_matrix(int runs, std::int64_t rounds) {
  FullMatrixChecks out;
  out.lambert.bound(std::abs(lambert_w(0.0)), 1e-300);
  for (double e = -12.0; e <= 6.0 + 1e-9; e += 0.01) {
    const double x = std::pow(10.0, e);
    const double w = lambert_w(x);
    out.lambert.bound(std::abs(w * std::exp(w) - x), 1e-12 * std::max(1.0, x));
  }
  out.lambert.detail = "max |W e^W - x| / (1e-12 max(1, x))";
  for (double e = -6.0; e <= 12.0 + 1e-9; e += 0.01) {
    const double theta = std::pow(10.0, e);
    out.x_bound.require(x_fn(theta) <= std::sqrt(std::max(0.0, std::log(theta))) + 1e-12);
  }
  out.x_bound.detail = "grid points above sqrt(ln_+ theta)";

  FullMatrixConfig<double> cfg;
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < runs; ++r) {
    const auto kind = r % 2 ? SequenceKind::kRademacher : SequenceKind::kGaussian;
    const auto g = gen_vector_sequence(spec_of(kind, 0xF0110000ULL + std::uint64_t(r), 1.0 + r % 3), rounds, 2);
    const auto h = nature_hints(g, 1.0);
    FullMatrixLearner<double> learner(2, cfg);
    std::vector<Vector<double>> ws;
    for (std::size_t t = 0; t < g.size(); ++t) {
      const Vector<double> w = learner.fm_predict(h[t]);
      const double before = learner.last_solution().value;
      learner.fm_update(g[t]);
      const double after = psi_star_value(learner.g_sum(), learner.v(), h[t], cfg).value;
      const double gap = g[t].dot(w) - (before - after);
      worst_gap = std::max(worst_gap, gap);
      out.monotonicity.require(gap <= 1e-5 && w.norm() < cfg.radius);
      ws.push_back(w);
    }
    for (double c : {0.0, 0.3, 0.6, 0.9}) {
      for (int k = 0; k < 8; ++k) {
        const double ang = 2.0 * std::numbers::pi * k / 8.0;
        Vector<double> u(2);
        u << c * std::cos(ang), c * std::sin(ang);
        double regret = 0.0;
        for (std::size_t t = 0; t < g.size(); ++t) regret += g[t].dot(ws[t] - u);
        out.regret_bound.bound(regret, fm_regret_bound(learner.v(), learner.hint(), u, cfg), 1e-9);
        if (c == 0.0) break;
      }
    }
  }
  out.monotonicity.detail = "failing steps; worst slack use " + format_double(worst_gap);
  out.regret_bound.detail = "max regret/bound";
  return out;
}

AdversaryChecks check_adversary(std::int64_t rounds) {
  AdversaryChecks out;
  const AdversaryConfig cfg{1.0, 1.0, 1.0, {1.0, false}};

  struct Player {
    std::string name;
    std::function<double(std::int64_t)> predict;
    std::function<void(double)> update;
  };
  BaseLearner<double> half({1.0, 0.5}), zero({1.0, 0.0});
  EpigraphLearner<double> epi;
  Unconstrained1d<double> unc;
  UnconstrainedNd<double> nd(1, UnconstrainedConfig<double>{});
  FullMatrixLearner<double> fm(1, FullMatrixConfig<double>{});
  const auto scalar = [](double x) { return Vector<double>::Constant(1, x); };
  auto hinted = [](BaseLearner<double>& b) {
    return Player{"base", [&b](std::int64_t) { return b.predict(1.0); }, [&b](double g) { b.update(clip(g, 1.0)); }};
  };
  std::vector<Player> players = {
      hinted(half),
      hinted(zero),
      {"epigraph", [&](std::int64_t) { return epi.predict(1.0); }, [&](double g) { epi.update(clip(g, 1.0), 0.0); }},
      {"unconstrained1d", [&](std::int64_t) { return unc.predict(); }, [&](double g) { unc.update(g); }},
      {"unconstrained_nd", [&](std::int64_t) { return nd.predict()(0); }, [&](double g) { nd.update(scalar(g)); }},
      {"full_matrix", [&](std::int64_t) { return fm.fm_predict(1.0)(0); },
       [&](double g) { fm.fm_update(scalar(clip(g, 1.0))); }},
      {"diver", [](std::int64_t t) { return -3.0 * double(t); }, [](double) {}},
      {"late_diver", [](std::int64_t t) { return t == 40 ? -1e6 : 0.5; }, [](double) {}},
  };

  for (auto& pl : players) {
    Adversary adv(cfg);
    std::vector<double> w, g;
    double partial = 0.0;
    for (std::int64_t t = 1; t <= rounds; ++t) {
      w.push_back(pl.predict(t));
      g.push_back(adv.adversary_next(w.back()));
      pl.update(g.back());
      if (!adv.triggered()) {
        partial += w.back() * g.back();
        const double floor = never_triggered_floor(cfg, t);
        out.never.require(partial >= floor - 1e-9 * (1.0 + std::abs(floor)));
      }
    }
    Adversary replay(cfg);
    bool same = true;
    for (std::size_t t = 0; t < w.size(); ++t) {
      const double gr = replay.adversary_next(w[t]);
      same = same && std::memcmp(&gr, &g[t], sizeof gr) == 0;
    }
    out.replay.require(same && replay.tau() == adv.tau());
  }

  // Untriggered, psi = x^2, gamma = 1, h1 = 1, T = 10: w* = -2 grad psi*(20) = -20.
  {
    Adversary adv(cfg);
    for (int t = 0; t < 10; ++t) adv.adversary_next(0.0);
    const auto c = lower_bound_certificate(adv, 10);
    const double expected = 1.0 + 1.0 / 32.0 + 100.0 + 5.0 * std::sqrt(10.0 * std::log(1.0 + 20.0 * std::sqrt(10.0)));
    out.certificate_values.require(!c.triggered && c.w_star == -20.0 && c.big_g == 1.0 &&
                                   std::abs(c.claimed_bound - expected) <= 1e-12 * expected);
  }
  // w_3 = -5 < -4 triggers: g_3 = -4, tau = 2, G = 4, w* = 0, bound 4 + 16/32.
  {
    Adversary adv(cfg);
    const double g1 = adv.adversary_next(0.0), g2 = adv.adversary_next(0.0), g3 = adv.adversary_next(-5.0);
    const double g4 = adv.adversary_next(100.0);
    const auto c = lower_bound_certificate(adv, 4);
    out.certificate_values.require(g1 == 1.0 && g2 == 1.0 && g3 == -4.0 && g4 == 0.0 && c.triggered &&
                                   c.w_star == 0.0 && c.big_g == 4.0 && c.claimed_bound == 4.5);
  }
  out.certificate_values.detail = "mismatched hand-derived cases";

  SplitMix64 rng(0xCE27ULL);
  for (int i = 0; i < 2000; ++i) {
    AdversaryConfig rc{std::exp(uniform(rng, -3, 3)), std::exp(uniform(rng, -3, 3)), std::exp(uniform(rng, -3, 3)),
                       {uniform(rng, 0.2, 3.0), rng.uniform() < 0.5}};
    const auto T = std::int64_t(1 + rng.next() % 100000);
    const double w = uniform(rng, -50, 50);
    const double big_g = rc.h1 * uniform(rng, 1.0, 100.0);
    out.certificate_nonnegative.require(certificate_bound(rc, big_g, w, T) >= 0.0);
  }
  out.certificate_nonnegative.detail = "negative certificates";
  out.replay.detail = "players whose replay diverged";
  out.never.detail = "failing pre-trigger rounds";
  return out;
}

BatchChecks check_batch(int seeds, std::int64_t early, std::int64_t late, double min_factor) {
  BatchChecks out;
  double early_sum = 0.0, late_sum = 0.0;
  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig cfg;
    cfg.rounds = late;
    cfg.seed = 0xBA7C0000ULL + std::uint64_t(s);
    cfg.batch = {3.0, 0.5};
    const auto r = online_to_batch(cfg);
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
      if (r.checkpoints[i] == early) early_sum += r.suboptimality[i];
      if (r.checkpoints[i] == late) late_sum += r.suboptimality[i];
    }
  }
  out.improvement = early_sum / late_sum;
  out.decay.require(out.improvement >= min_factor);
  out.decay.worst = out.improvement;
  out.decay.detail = "mean suboptimality ratio T=" + std::to_string(early) + " over T=" + std::to_string(late);

  ExperimentConfig zero;
  zero.rounds = late;
  zero.batch = {0.0, 0.0};
  const auto r = online_to_batch(zero);
  bool all_zero = !r.suboptimality.empty();
  for (double v : r.suboptimality) all_zero = all_zero && v == 0.0;
  out.zero_noise.require(all_zero);
  out.zero_noise.detail = "zero-noise runs with nonzero suboptimality";
  return out;
}

CheckResult check_determinism(const ExperimentConfig& config) {
  CheckResult out;
  std::ostringstream a, b;
  write_trace(run_experiment(config).trace, a);
  write_trace(run_experiment(config).trace, b);
  out.require(a.str() == b.str() && !a.str().empty());
  out.detail = std::to_string(a.str().size()) + " bytes compared";
  return out;
}

CheckResult check_report_consistency(const ExperimentConfig& config) {
  CheckResult out;
  const auto result = run_experiment(config);
  std::stringstream csv;
  write_trace(result.trace, csv);
  const Trace back = read_trace(csv);
  out.require(back == result.trace);
  for (const auto& rep : result.reports) out.require(regret_against(back, rep.comparator) == rep.regret);
  out.detail = "mismatched reports";
  return out;
}

}  // namespace pfol
