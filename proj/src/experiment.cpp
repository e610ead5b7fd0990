#include "pfol/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>

#include "pfol/base_learner.hpp"
#include "pfol/epigraph.hpp"
#include "pfol/full_matrix.hpp"
#include "pfol/trace_io.hpp"
#include "pfol/unconstrained.hpp"

namespace pfol {

std::vector<double> nature_hints(const std::vector<Vector<double>>& g, double h1) {
  std::vector<double> h(g.size());
  double cur = h1;
  for (std::size_t t = 0; t < g.size(); ++t) {
    cur = std::max(cur, g[t].norm());
    h[t] = cur;
  }
  return h;
}

namespace {

Vector<double> scalar_vec(double x) { return Vector<double>::Constant(1, x); }

// Sequence or adversary, seen through one interface.
class GradientSource {
 public:
  explicit GradientSource(const ExperimentConfig& cfg) : cfg_(cfg) {
    if (cfg.source == Source::kAdversary) {
      adversary_.emplace(AdversaryConfig{cfg.h1, cfg.gamma, cfg.eps, cfg.psi()});
    } else {
      if (cfg.dim == 1) {
        for (double x : gen_sequence(cfg.sequence, cfg.rounds)) seq_.push_back(scalar_vec(x));
      } else {
        seq_ = gen_vector_sequence(cfg.sequence, cfg.rounds, cfg.dim);
      }
      hints_ = nature_hints(seq_, cfg.h1);
    }
  }

  // Hint a hinted learner receives before round t (0-based).
  double hint(std::int64_t t) const { return adversary_ ? cfg_.h1 : hints_[t]; }

  Vector<double> gradient(std::int64_t t, const Vector<double>& w) {
    if (adversary_) return scalar_vec(adversary_->adversary_next(w(0)));
    return seq_[t];
  }

  bool adversarial() const { return adversary_.has_value(); }
  const Adversary& adversary() const { return *adversary_; }

 private:
  const ExperimentConfig& cfg_;
  std::vector<Vector<double>> seq_;
  std::vector<double> hints_;
  std::optional<Adversary> adversary_;
};

class TraceBuilder {
 public:
  void add(double h, const Vector<double>& g, const Vector<double>& w, double a, double clip_ratio_sum) {
    TraceRow r;
    r.t = static_cast<std::int64_t>(rows_.size()) + 1;
    r.h = h;
    r.g = g;
    r.w = w;
    r.a = a;
    sum_g2_ += g.squaredNorm();
    sum_a_ += a;
    regret_u0_ += g.dot(w);
    r.sum_g2 = sum_g2_;
    r.sum_a = sum_a_;
    r.clip_ratio_sum = clip_ratio_sum;
    r.regret_u0 = regret_u0_;
    rows_.push_back(std::move(r));
  }

  Trace take() { return std::move(rows_); }

 private:
  Trace rows_;
  double sum_g2_ = 0.0, sum_a_ = 0.0, regret_u0_ = 0.0;
};

struct Bound {
  std::string name;
  // Returns (checked quantity, bound) at u, given the plain regret at u.
  std::function<std::pair<double, double>(const Vector<double>& u, double regret)> eval;
};

template <typename F>
void guarded_round(std::int64_t t, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    throw Error(e.code(), "round " + std::to_string(t + 1) + ": " + e.what());
  }
}

// Ratio increment for nature hints, with h_0 = h1.
double hint_growth(double prev, double cur) { return (cur - prev) / cur; }

std::optional<Bound> run_base(const ExperimentConfig& cfg, GradientSource& src, TraceBuilder& tb) {
  const BaseConfig<double> bc{cfg.eps, cfg.p};
  BaseLearner<double> learner(bc);
  HintedRunSummary<double> summary;
  double prev = cfg.h1, ratio = 0.0;
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    guarded_round(t, [&] {
      const double h = src.hint(t);
      const Vector<double> w = scalar_vec(learner.predict(h));
      const Vector<double> g = src.gradient(t, w);
      const double fed = src.adversarial() ? clip(g(0), h) : g(0);
      learner.update(fed);
      summary.add(fed, h);
      ratio += hint_growth(prev, h);
      prev = h;
      tb.add(h, g, w, 0.0, ratio);
    });
  }
  if (src.adversarial()) return std::nullopt;
  return Bound{bc.half() ? "base_p_half" : "base_p_below_half",
               [summary, bc](const Vector<double>& u, double regret) {
                 return std::pair{regret, base_theorem_bound(summary, u(0), bc)};
               }};
}

std::optional<Bound> run_epigraph(const ExperimentConfig& cfg, GradientSource& src, TraceBuilder& tb) {
  EpigraphConfig<double> ec;
  ec.eps_x = cfg.eps;
  ec.eps_psi = cfg.eps_psi;
  ec.gamma = cfg.gamma;
  ec.p = cfg.p;
  ec.psi = cfg.psi();
  EpigraphLearner<double> learner(ec);
  CompositeRunSummary<double> summary;
  double prev = cfg.h1, ratio = 0.0, a_psi_w = 0.0;
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    guarded_round(t, [&] {
      const double h = src.hint(t);
      const Vector<double> w = scalar_vec(learner.predict(h));
      const Vector<double> g = src.gradient(t, w);
      const double r = hint_growth(prev, h);
      ratio += r;
      prev = h;
      const double a = cfg.gamma * r / (1.0 + ratio);
      const double fed = src.adversarial() ? clip(g(0), h) : g(0);
      learner.update(fed, a);
      if (t == 0) summary.first_hint = h;
      summary.last_hint = h;
      summary.sum_g2 += fed * fed;
      summary.sum_a += a;
      a_psi_w += a * psi_value(ec.psi, w(0));
      tb.add(h, g, w, a, ratio);
    });
  }
  if (src.adversarial()) return std::nullopt;
  const auto k = base_guarantee_constants(BaseConfig<double>{cfg.eps, cfg.p}, cfg.rounds);
  return Bound{"epigraph_composite", [summary, ec, k, a_psi_w](const Vector<double>& u, double regret) {
                 const double checked = regret + a_psi_w - summary.sum_a * psi_value(ec.psi, u(0));
                 return std::pair{checked, composite_regret_bound(summary, u(0), ec, k)};
               }};
}

UnconstrainedConfig<double> unconstrained_config(const ExperimentConfig& cfg) {
  UnconstrainedConfig<double> uc;
  uc.eps = cfg.eps;
  uc.eps_psi = cfg.eps_psi;
  uc.gamma = cfg.gamma;
  uc.h1 = cfg.h1;
  uc.p = cfg.p;
  uc.psi = cfg.psi();
  return uc;
}

std::optional<Bound> run_unconstrained1d(const ExperimentConfig& cfg, GradientSource& src, TraceBuilder& tb) {
  auto learner = std::make_shared<Unconstrained1d<double>>(unconstrained_config(cfg));
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    guarded_round(t, [&] {
      const double h = learner->tracker().h;
      const Vector<double> w = scalar_vec(learner->predict());
      const Vector<double> g = src.gradient(t, w);
      learner->update(g(0));
      tb.add(h, g, w, learner->last_a(), learner->tracker().ratio_sum);
    });
  }
  if (src.adversarial() || cfg.rounds == 0) return std::nullopt;
  return Bound{"unconstrained1d_composed", [learner](const Vector<double>& u, double regret) {
                 return std::pair{regret, unconstrained1d_bound(*learner, u(0))};
               }};
}

std::optional<Bound> run_unconstrained_nd(const ExperimentConfig& cfg, GradientSource& src, TraceBuilder& tb) {
  auto learner = std::make_shared<UnconstrainedNd<double>>(cfg.dim, unconstrained_config(cfg));
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    guarded_round(t, [&] {
      const double h = learner->magnitude().tracker().h;
      const Vector<double> w = learner->predict();
      const Vector<double> g = src.gradient(t, w);
      learner->update(g);
      tb.add(h, g, w, learner->magnitude().last_a(), learner->magnitude().tracker().ratio_sum);
    });
  }
  if (cfg.rounds == 0) return std::nullopt;
  return Bound{"magnitude_plus_direction", [learner](const Vector<double>& u, double regret) {
                 const double n = u.norm();
                 const double dir = 2.0 * std::sqrt(2.0 * learner->direction().grad_sq_total);
                 return std::pair{regret, unconstrained1d_bound(learner->magnitude(), n) + n * dir};
               }};
}

std::optional<Bound> run_full_matrix(const ExperimentConfig& cfg, GradientSource& src, TraceBuilder& tb) {
  FullMatrixConfig<double> fc;
  fc.sigma = cfg.sigma;
  fc.eps = cfg.eps;
  fc.gamma = cfg.gamma;
  fc.radius = cfg.radius;
  fc.mu = cfg.mu;
  FullMatrixLearner<double> learner(cfg.dim, fc);
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    guarded_round(t, [&] {
      const double h = src.hint(t);
      const Vector<double> w = learner.fm_predict(h);
      const Vector<double> g = src.gradient(t, w);
      learner.fm_update(g);
      tb.add(h, g, w, 0.0, 0.0);
    });
  }
  if (cfg.rounds == 0) return std::nullopt;
  const Matrix<double> v = learner.v();
  const double h = learner.hint();
  return Bound{"full_matrix_hint_regret", [v, h, fc](const Vector<double>& u, double regret) {
                 return std::pair{regret, fm_regret_bound(v, h, u, fc)};
               }};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  GradientSource src(config);
  TraceBuilder tb;
  std::optional<Bound> bound;
  switch (config.algorithm) {
    case Algorithm::kBase: bound = run_base(config, src, tb); break;
    case Algorithm::kEpigraph: bound = run_epigraph(config, src, tb); break;
    case Algorithm::kUnconstrained1d: bound = run_unconstrained1d(config, src, tb); break;
    case Algorithm::kUnconstrainedNd: bound = run_unconstrained_nd(config, src, tb); break;
    case Algorithm::kFullMatrix: bound = run_full_matrix(config, src, tb); break;
  }
  result.trace = tb.take();
  if (result.trace.empty()) return result;

  Vector<double> g_sum = Vector<double>::Zero(config.dim);
  for (const auto& row : result.trace) g_sum += row.g;
  Vector<double> dir = Vector<double>::Zero(config.dim);
  if (g_sum.norm() > 0.0) dir = -g_sum / g_sum.norm();
  else dir(0) = 1.0;

  for (double c : config.comparator_grid()) {
    if (config.algorithm == Algorithm::kFullMatrix && !(std::abs(c) < config.radius)) continue;
    RegretReport rep;
    rep.comparator = config.dim == 1 ? scalar_vec(c) : Vector<double>(c * dir);
    rep.regret = regret_against(result.trace, rep.comparator);
    rep.checked = rep.regret;
    if (bound) {
      const auto [checked, b] = bound->eval(rep.comparator, rep.regret);
      rep.checked = checked;
      rep.has_bound = true;
      rep.bound = b;
      rep.bound_name = bound->name;
      rep.pass = checked <= b + 1e-9 * std::abs(b);
    }
    result.all_pass = result.all_pass && rep.pass;
    result.reports.push_back(std::move(rep));
  }

  if (src.adversarial()) {
    result.certificate = lower_bound_certificate(src.adversary(), config.rounds);
    RegretReport rep;
    rep.comparator = scalar_vec(result.certificate->w_star);
    rep.regret = regret_against(result.trace, rep.comparator);
    rep.checked = rep.regret;
    rep.bound_name = "lower_bound_certificate";
    result.reports.push_back(std::move(rep));
  }
  return result;
}

nlohmann::json report_json(const ExperimentConfig& config, const ExperimentResult& result) {
  using nlohmann::json;
  json reports = json::array();
  for (const auto& r : result.reports) {
    json u = json::array();
    for (Eigen::Index i = 0; i < r.comparator.size(); ++i) u.push_back(r.comparator(i));
    json entry = {{"comparator", u}, {"regret", r.regret}, {"checked", r.checked}, {"bound_name", r.bound_name}};
    entry["bound"] = r.has_bound ? json(r.bound) : json(nullptr);
    entry["verdict"] = r.has_bound ? (r.pass ? "pass" : "fail") : "n/a";
    reports.push_back(entry);
  }
  json doc = {{"config", to_json(config)},
              {"rounds_played", result.trace.size()},
              {"reports", reports},
              {"all_pass", result.all_pass}};
  if (result.certificate) {
    const auto& c = *result.certificate;
    doc["certificate"] = {{"triggered", c.triggered},
                          {"w_star", c.w_star},
                          {"G", c.big_g},
                          {"claimed_bound", c.claimed_bound},
                          {"validity", c.validity}};
  }
  return doc;
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + out_dir + "': " + ec.message());
  write_trace(result.trace, (fs::path(out_dir) / config.trace_file).string());
  const auto path = (fs::path(out_dir) / config.report_file).string();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << report_json(config, result).dump(2) << '\n';
}

}  // namespace pfol
