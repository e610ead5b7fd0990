#include "pfol/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace pfol {

using nlohmann::json;

Algorithm parse_algorithm(const std::string& name) {
  if (name == "base") return Algorithm::kBase;
  if (name == "epigraph") return Algorithm::kEpigraph;
  if (name == "unconstrained1d") return Algorithm::kUnconstrained1d;
  if (name == "unconstrained_nd") return Algorithm::kUnconstrainedNd;
  if (name == "full_matrix") return Algorithm::kFullMatrix;
  throw Error(ErrorCode::kConfig, "unknown algorithm '" + name +
                                      "' (expected base, epigraph, unconstrained1d, unconstrained_nd or full_matrix)");
}

const char* to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kBase: return "base";
    case Algorithm::kEpigraph: return "epigraph";
    case Algorithm::kUnconstrained1d: return "unconstrained1d";
    case Algorithm::kUnconstrainedNd: return "unconstrained_nd";
    case Algorithm::kFullMatrix: return "full_matrix";
  }
  return "unknown";
}

std::vector<double> ExperimentConfig::comparator_grid() const {
  return comparators.empty() ? default_comparator_grid(h1) : comparators;
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kConfig, message);
}

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

}  // namespace

void ExperimentConfig::validate() const {
  require(rounds >= 0, "rounds must be non-negative");
  require(dim >= 1, "dimension must be at least 1");
  require(positive(eps), "learner.eps must be positive");
  require(!eps_psi || positive(*eps_psi), "learner.eps_psi must be positive");
  require(positive(gamma), "learner.gamma must be positive");
  require(positive(q), "learner.q must be positive");
  require(p >= 0.0 && p <= 0.5, "learner.p must lie in [0, 0.5]");
  require(positive(h1), "learner.h1 must be positive");
  require(positive(sigma), "learner.sigma must be positive");
  require(positive(radius), "learner.radius must be positive");
  require(positive(mu), "learner.mu must be positive");
  sequence.validate();

  const bool scalar_algo = algorithm == Algorithm::kBase || algorithm == Algorithm::kEpigraph ||
                           algorithm == Algorithm::kUnconstrained1d;
  if (scalar_algo) require(dim == 1, std::string(to_string(algorithm)) + " is one-dimensional; set dimension to 1");
  if (algorithm == Algorithm::kFullMatrix) {
    require(gamma > 1.0, "full_matrix requires learner.gamma > 1");
    require(dim <= 4, "full_matrix supports dimension <= 4");
  }
  if (source == Source::kAdversary) require(scalar_algo, "the adversary only plays against one-dimensional learners");
  for (double c : comparators) require(std::isfinite(c), "comparators must be finite");
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  require(obj.is_object(), where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw Error(ErrorCode::kConfig, "unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad value for ") + where + "." + key + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  reject_unknown(doc, {"algorithm", "dimension", "rounds", "seed", "source", "learner", "sequence", "comparators",
                       "output", "batch"},
                 "config");
  std::string algo = to_string(c.algorithm);
  read(doc, "algorithm", algo, "config");
  c.algorithm = parse_algorithm(algo);
  read(doc, "dimension", c.dim, "config");
  read(doc, "rounds", c.rounds, "config");
  read(doc, "seed", c.seed, "config");
  std::string source = "sequence";
  read(doc, "source", source, "config");
  if (source == "sequence") c.source = Source::kSequence;
  else if (source == "adversary") c.source = Source::kAdversary;
  else throw Error(ErrorCode::kConfig, "source must be 'sequence' or 'adversary', got '" + source + "'");

  if (doc.contains("learner")) {
    const json& l = doc.at("learner");
    reject_unknown(l, {"eps", "eps_psi", "gamma", "q", "psi_scaled", "p", "h1", "sigma", "radius", "mu"}, "learner");
    read(l, "eps", c.eps, "learner");
    if (l.contains("eps_psi")) {
      double v = 0.0;
      read(l, "eps_psi", v, "learner");
      c.eps_psi = v;
    }
    read(l, "gamma", c.gamma, "learner");
    read(l, "q", c.q, "learner");
    read(l, "psi_scaled", c.psi_scaled, "learner");
    read(l, "p", c.p, "learner");
    read(l, "h1", c.h1, "learner");
    read(l, "sigma", c.sigma, "learner");
    read(l, "radius", c.radius, "learner");
    read(l, "mu", c.mu, "learner");
  }
  if (doc.contains("sequence")) {
    const json& s = doc.at("sequence");
    reject_unknown(s, {"kind", "scale", "tail_alpha", "jump_factor"}, "sequence");
    std::string kind = to_string(c.sequence.kind);
    read(s, "kind", kind, "sequence");
    c.sequence.kind = parse_sequence_kind(kind);
    read(s, "scale", c.sequence.scale, "sequence");
    read(s, "tail_alpha", c.sequence.tail_alpha, "sequence");
    read(s, "jump_factor", c.sequence.jump_factor, "sequence");
  }
  read(doc, "comparators", c.comparators, "config");
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, {"trace", "report"}, "output");
    read(o, "trace", c.trace_file, "output");
    read(o, "report", c.report_file, "output");
  }
  if (doc.contains("batch")) {
    const json& b = doc.at("batch");
    reject_unknown(b, {"w_star", "noise"}, "batch");
    read(b, "w_star", c.batch.w_star, "batch");
    read(b, "noise", c.batch.noise, "batch");
  }
  c.sequence.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void apply_overrides(ExperimentConfig& c, const ConfigOverrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.rounds) c.rounds = *o.rounds;
  if (o.algorithm) c.algorithm = parse_algorithm(*o.algorithm);
  if (o.p) c.p = *o.p;
  if (o.q) c.q = *o.q;
  if (o.gamma) c.gamma = *o.gamma;
  if (o.eps) c.eps = *o.eps;
  if (o.h1) c.h1 = *o.h1;
  c.sequence.seed = c.seed;
  c.validate();
}

json to_json(const ExperimentConfig& c) {
  json learner = {{"eps", c.eps},   {"gamma", c.gamma}, {"q", c.q},           {"psi_scaled", c.psi_scaled},
                  {"p", c.p},       {"h1", c.h1},       {"sigma", c.sigma},   {"radius", c.radius},
                  {"mu", c.mu}};
  if (c.eps_psi) learner["eps_psi"] = *c.eps_psi;
  return {{"algorithm", to_string(c.algorithm)},
          {"dimension", c.dim},
          {"rounds", c.rounds},
          {"seed", c.seed},
          {"source", c.source == Source::kSequence ? "sequence" : "adversary"},
          {"learner", learner},
          {"sequence",
           {{"kind", to_string(c.sequence.kind)},
            {"scale", c.sequence.scale},
            {"tail_alpha", c.sequence.tail_alpha},
            {"jump_factor", c.sequence.jump_factor}}},
          {"comparators", c.comparators},
          {"output", {{"trace", c.trace_file}, {"report", c.report_file}}},
          {"batch", {{"w_star", c.batch.w_star}, {"noise", c.batch.noise}}}};
}

}  // namespace pfol
