#include "pfol/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pfol/checks.hpp"
#include "pfol/core.hpp"
#include "pfol/experiment.hpp"
#include "pfol/trace_io.hpp"

namespace pfol {

namespace {

using Ledger = std::vector<InvariantResult>;

void add(Ledger& out, const std::string& module, const std::string& name, const CheckResult& c) {
  InvariantResult r;
  r.module = module;
  r.name = name;
  r.pass = c.pass;
  r.margin = c.ratio_kind ? 1.0 - c.worst : (c.pass ? 0.0 : -c.worst);
  std::ostringstream d;
  d << c.detail << "; worst " << format_double(c.worst) << " over " << c.samples << " samples";
  r.detail = d.str();
  out.push_back(std::move(r));
}

CheckResult expect(bool ok, const std::string& detail) {
  CheckResult c;
  c.require(ok);
  c.detail = detail;
  return c;
}

template <typename F>
bool throws_code(F&& f, ErrorCode code) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

void core_module(Ledger& out) {
  add(out, "core", "clip_saturates",
      expect(clip(5.0, 2.0) == 2.0 && clip(-5.0, 2.0) == -2.0 && clip(1.0, 2.0) == 1.0 &&
                 throws_code([] { clip(1.0, 0.0); }, ErrorCode::kInvalidHint),
             "clip examples and h <= 0 rejection"));
  add(out, "core", "dual_norm_pair",
      expect(std::abs(dual_norm_pair(1.0, 1.0, 1.0, 1.0) - std::sqrt(2.0)) < 1e-15, "||(1,1)||_* = sqrt 2"));

  Trace trace;
  for (int t = 1; t <= 2; ++t) {
    TraceRow row;
    row.t = t;
    row.h = 1.0;
    row.g = Vector<double>::Constant(1, 1.0);
    row.w = Vector<double>::Constant(1, 0.0);
    trace.push_back(row);
  }
  add(out, "core", "regret_accounting",
      expect(regret_against(trace, 1.0) == -2.0 &&
                 throws_code([&] { regret_against(trace, Vector<double>::Zero(2)); }, ErrorCode::kShape),
             "g = (1, 1), w = 0, u = 1 gives -2"));

  ExperimentConfig cfg;
  cfg.rounds = 50;
  add(out, "core", "trace_roundtrip", check_report_consistency(cfg));
}

void base_module(Ledger& out, double alpha_scale) {
  for (double p : {0.5, 0.0}) {
    const auto c = check_base(6, 2000, p, alpha_scale);
    const std::string tag = p == 0.5 ? "_p_half" : "_p_zero";
    add(out, "base_learner", "regret_bound" + tag, c.regret_bound);
    add(out, "base_learner", "alpha_sum" + tag, c.alpha_sum);
    add(out, "base_learner", "oddness" + tag, c.oddness);
  }
}

void epigraph_module(Ledger& out) {
  const auto runs = check_epigraph_runs(8, 1000);
  add(out, "epigraph", "feasibility", runs.feasibility);
  add(out, "epigraph", "dual_norm", runs.dual_norm);
  add(out, "epigraph", "negdelta", runs.negdelta);
  add(out, "epigraph", "deltamag", runs.deltamag);
  add(out, "epigraph", "composite_regret", runs.composite_regret);
  const auto proj = check_projection(500, 1000);
  add(out, "epigraph", "closed_form_agreement", proj.closed_form_agreement);
  add(out, "epigraph", "fallback_exact", proj.fallback_exact);
  add(out, "epigraph", "projection_dominance", proj.dominance);
}

void unconstrained_module(Ledger& out) {
  const auto s = check_schedule(8, 2000);
  add(out, "unconstrained", "a_sum", s.a_sum);
  add(out, "unconstrained", "a_zero_without_clipping", s.a_zero_without_clipping);
  add(out, "unconstrained", "penalty_sum", s.penalty_sum);
  add(out, "unconstrained", "ratio_sum", s.ratio_sum);
  add(out, "unconstrained", "scale_covariance", s.scale_covariance);
  add(out, "unconstrained", "direction_regret", check_direction({2, 5}, 5, 1000));

  CheckResult composed;
  for (auto algo : {Algorithm::kUnconstrained1d, Algorithm::kUnconstrainedNd}) {
    for (auto kind : {SequenceKind::kRademacher, SequenceKind::kScaleJump}) {
      ExperimentConfig cfg;
      cfg.algorithm = algo;
      cfg.dim = algo == Algorithm::kUnconstrained1d ? 1 : 3;
      cfg.rounds = 1000;
      cfg.sequence.kind = kind;
      cfg.seed = cfg.sequence.seed = 11;
      for (const auto& rep : run_experiment(cfg).reports)
        if (rep.has_bound) composed.bound(rep.checked, rep.bound, 1e-9);
    }
  }
  composed.detail = "max regret/bound from harness reports";
  add(out, "unconstrained", "composed_bound", composed);
}

void full_matrix_module(Ledger& out) {
  const auto c = check_full_matrix(2, 60);
  add(out, "full_matrix", "lambert_identity", c.lambert);
  add(out, "full_matrix", "x_bound", c.x_bound);
  add(out, "full_matrix", "potential_monotonicity", c.monotonicity);
  add(out, "full_matrix", "regret_bound", c.regret_bound);
}

void adversary_module(Ledger& out) {
  const auto c = check_adversary(200);
  add(out, "adversary", "replay", c.replay);
  add(out, "adversary", "never_triggered", c.never);
  add(out, "adversary", "certificate_values", c.certificate_values);
  add(out, "adversary", "certificate_nonnegative", c.certificate_nonnegative);
}

void harness_module(Ledger& out) {
  ExperimentConfig cfg;
  cfg.rounds = 300;
  cfg.sequence.kind = SequenceKind::kPareto;
  cfg.seed = cfg.sequence.seed = 5;
  add(out, "harness_cli", "determinism", check_determinism(cfg));
  cfg.algorithm = Algorithm::kEpigraph;
  add(out, "harness_cli", "report_consistency", check_report_consistency(cfg));
  const auto b = check_batch(4, 100, 10000, 5.0);
  add(out, "harness_cli", "batch_decay", b.decay);
  add(out, "harness_cli", "batch_zero_noise", b.zero_noise);
}

using Runner = std::function<void(Ledger&, double)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"core", [](Ledger& l, double) { core_module(l); }},
      {"base_learner", base_module},
      {"epigraph", [](Ledger& l, double) { epigraph_module(l); }},
      {"unconstrained", [](Ledger& l, double) { unconstrained_module(l); }},
      {"full_matrix", [](Ledger& l, double) { full_matrix_module(l); }},
      {"adversary", [](Ledger& l, double) { adversary_module(l); }},
      {"harness_cli", [](Ledger& l, double) { harness_module(l); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& module_names() {
  static const std::vector<std::string> names = {"core",        "base_learner", "epigraph",   "unconstrained",
                                                 "full_matrix", "adversary",    "harness_cli"};
  return names;
}

std::vector<std::pair<std::string, std::string>> invariant_manifest() {
  return {
      {"core", "clip_saturates"},
      {"core", "dual_norm_pair"},
      {"core", "regret_accounting"},
      {"core", "trace_roundtrip"},
      {"base_learner", "regret_bound_p_half"},
      {"base_learner", "alpha_sum_p_half"},
      {"base_learner", "oddness_p_half"},
      {"base_learner", "regret_bound_p_zero"},
      {"base_learner", "alpha_sum_p_zero"},
      {"base_learner", "oddness_p_zero"},
      {"epigraph", "feasibility"},
      {"epigraph", "dual_norm"},
      {"epigraph", "negdelta"},
      {"epigraph", "deltamag"},
      {"epigraph", "composite_regret"},
      {"epigraph", "closed_form_agreement"},
      {"epigraph", "fallback_exact"},
      {"epigraph", "projection_dominance"},
      {"unconstrained", "a_sum"},
      {"unconstrained", "a_zero_without_clipping"},
      {"unconstrained", "penalty_sum"},
      {"unconstrained", "ratio_sum"},
      {"unconstrained", "scale_covariance"},
      {"unconstrained", "direction_regret"},
      {"unconstrained", "composed_bound"},
      {"full_matrix", "lambert_identity"},
      {"full_matrix", "x_bound"},
      {"full_matrix", "potential_monotonicity"},
      {"full_matrix", "regret_bound"},
      {"adversary", "replay"},
      {"adversary", "never_triggered"},
      {"adversary", "certificate_values"},
      {"adversary", "certificate_nonnegative"},
      {"harness_cli", "determinism"},
      {"harness_cli", "report_consistency"},
      {"harness_cli", "batch_decay"},
      {"harness_cli", "batch_zero_noise"},
  };
}

std::vector<InvariantResult> verify_invariants(const std::optional<std::vector<std::string>>& modules,
                                               double alpha_scale) {
  const std::vector<std::string> selected = modules ? *modules : module_names();
  std::set<std::string> seen;
  Ledger out;
  for (const auto& m : selected) {
    const auto it = runners().find(m);
    if (it == runners().end()) {
      std::string known;
      for (const auto& n : module_names()) known += (known.empty() ? "" : ", ") + n;
      throw Error(ErrorCode::kConfig, "unknown module '" + m + "' (known: " + known + ")");
    }
    if (!seen.insert(m).second) continue;
    it->second(out, alpha_scale);
  }

  // Every promised invariant of a selected module must appear exactly once.
  std::multiset<std::pair<std::string, std::string>> reported;
  for (const auto& r : out) reported.insert({r.module, r.name});
  std::vector<std::string> missing;
  for (const auto& entry : invariant_manifest())
    if (seen.count(entry.first) && reported.count(entry) != 1) missing.push_back(entry.first + "/" + entry.second);
  if (!missing.empty()) {
    InvariantResult r{"harness_cli", "manifest", false, -double(missing.size()), "unreported:"};
    for (const auto& m : missing) r.detail += " " + m;
    out.push_back(r);
  }
  return out;
}

bool all_pass(const std::vector<InvariantResult>& ledger) {
  return std::all_of(ledger.begin(), ledger.end(), [](const InvariantResult& r) { return r.pass; });
}

nlohmann::json to_json(const std::vector<InvariantResult>& ledger) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : ledger)
    arr.push_back({{"module", r.module}, {"name", r.name}, {"pass", r.pass}, {"margin", r.margin},
                   {"detail", r.detail}});
  return {{"all_pass", all_pass(ledger)}, {"invariants", arr}};
}

}  // namespace pfol
