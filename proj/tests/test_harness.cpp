#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pfol/batch.hpp"
#include "pfol/config.hpp"
#include "pfol/experiment.hpp"
#include "pfol/trace_io.hpp"
#include "pfol/verify.hpp"

using namespace pfol;
using nlohmann::json;

namespace {

ErrorCode config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config accepted");
  return ErrorCode::kIo;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("empty trace writes only the header") {
  std::ostringstream out;
  write_trace(Trace{}, out);
  CHECK(out.str() == std::string(kTraceHeader) + "\n");
  std::istringstream in(out.str());
  CHECK(read_trace(in).empty());
}

TEST_CASE("random rows round-trip bit-exactly") {
  SplitMix64 rng(99);
  Trace rows;
  for (int i = 0; i < 1000; ++i) {
    TraceRow r;
    r.t = i + 1;
    const Eigen::Index d = 1 + Eigen::Index(rng.next() % 3);
    r.g.resize(d);
    r.w.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      r.g(k) = rng.normal() * std::pow(10.0, double(rng.next() % 40) - 20.0);
      r.w(k) = -rng.normal() / 3.0;
    }
    r.h = rng.uniform() * 1e6;
    r.a = rng.uniform() / 7.0;
    r.sum_g2 = rng.uniform() * 1e300;
    r.sum_a = i % 7 == 0 ? -0.0 : rng.uniform();
    r.clip_ratio_sum = 5e-324 * double(i % 3);
    r.regret_u0 = rng.normal();
    rows.push_back(r);
  }
  std::stringstream buf;
  write_trace(rows, buf);
  const Trace back = read_trace(buf);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(back[i] == rows[i]);
    REQUIRE(bit_equal(back[i].sum_a, rows[i].sum_a));
  }
}

TEST_CASE("17 significant digits reparse exactly") {
  for (double x : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-310, 1.7976931348623157e308, -123.456e-7}) {
    const std::string s = format_double(x);
    CHECK(bit_equal(std::strtod(s.c_str(), nullptr), x));
  }
}

TEST_CASE("malformed traces are rejected") {
  std::istringstream no_header("1,2,3\n");
  CHECK_THROWS_AS(read_trace(no_header), Error);
  std::istringstream short_row(std::string(kTraceHeader) + "\n1,1,0.5\n");
  CHECK_THROWS_AS(read_trace(short_row), Error);
  CHECK_THROWS_AS(read_trace(std::string("/nonexistent/dir/trace.csv")), Error);
}

TEST_CASE("config parsing") {
  const json doc = {{"algorithm", "epigraph"},
                    {"rounds", 25},
                    {"seed", 4},
                    {"learner", {{"gamma", 2.0}, {"q", 0.5}, {"psi_scaled", true}}},
                    {"sequence", {{"kind", "pareto"}, {"scale", 0.5}}}};
  const auto cfg = parse_config(doc);
  CHECK(cfg.algorithm == Algorithm::kEpigraph);
  CHECK(cfg.rounds == 25);
  CHECK(cfg.gamma == 2.0);
  CHECK(cfg.psi().q == 0.5);
  CHECK(cfg.sequence.kind == SequenceKind::kPareto);
  CHECK(cfg.sequence.seed == 4);

  // Round trip through JSON.
  const auto again = parse_config(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("config errors") {
  CHECK(config_error({{"rounds", 10}, {"learnr", json::object()}}) == ErrorCode::kConfig);
  CHECK(config_error({{"learner", {{"epsilon", 1.0}}}}) == ErrorCode::kConfig);
  CHECK(config_error({{"algorithm", "adam"}}) == ErrorCode::kConfig);
  CHECK(config_error({{"learner", {{"p", 0.7}}}}) == ErrorCode::kConfig);
  CHECK(config_error({{"algorithm", "full_matrix"}, {"dimension", 2}, {"learner", {{"gamma", 1.0}}}}) ==
        ErrorCode::kConfig);
  CHECK(config_error({{"rounds", "ten"}}) == ErrorCode::kConfig);
  CHECK(config_error({{"learner", {{"q", -1.0}}}}) == ErrorCode::kConfig);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("overrides") {
  ExperimentConfig cfg;
  ConfigOverrides o;
  o.seed = 9;
  o.rounds = 12;
  o.algorithm = "base";
  o.p = 0.0;
  o.h1 = 2.0;
  apply_overrides(cfg, o);
  CHECK(cfg.seed == 9);
  CHECK(cfg.sequence.seed == 9);
  CHECK(cfg.rounds == 12);
  CHECK(cfg.algorithm == Algorithm::kBase);
  CHECK(cfg.p == 0.0);
  CHECK(cfg.h1 == 2.0);
  ConfigOverrides bad;
  bad.gamma = -1.0;
  CHECK_THROWS_AS(apply_overrides(cfg, bad), Error);
}

TEST_CASE("zero rounds give an empty result") {
  ExperimentConfig cfg;
  cfg.rounds = 0;
  const auto r = run_experiment(cfg);
  CHECK(r.trace.empty());
  CHECK(r.reports.empty());
  CHECK(r.all_pass);
}

TEST_CASE("zero gradients keep every learner at the origin") {
  for (auto algo : {Algorithm::kBase, Algorithm::kEpigraph, Algorithm::kUnconstrained1d}) {
    ExperimentConfig cfg;
    cfg.algorithm = algo;
    cfg.rounds = 50;
    cfg.sequence.kind = SequenceKind::kConstant;
    cfg.sequence.scale = 0.0;
    const auto r = run_experiment(cfg);
    for (const auto& row : r.trace) REQUIRE(row.w(0) == 0.0);
    for (const auto& rep : r.reports) CHECK(rep.regret == 0.0);
  }
}

TEST_CASE("base learner verdicts pass on a long rademacher run") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::kBase;
  cfg.rounds = 10000;
  cfg.sequence.kind = SequenceKind::kRademacher;
  const auto r = run_experiment(cfg);
  CHECK(r.reports.size() == 9);
  for (const auto& rep : r.reports) {
    CHECK(rep.has_bound);
    CHECK(rep.pass);
  }
}

TEST_CASE("every algorithm produces passing verdicts") {
  for (auto algo : {Algorithm::kEpigraph, Algorithm::kUnconstrained1d, Algorithm::kUnconstrainedNd,
                    Algorithm::kFullMatrix}) {
    ExperimentConfig cfg;
    cfg.algorithm = algo;
    cfg.dim = algo == Algorithm::kUnconstrainedNd || algo == Algorithm::kFullMatrix ? 2 : 1;
    cfg.gamma = algo == Algorithm::kFullMatrix ? 2.0 : 1.0;
    cfg.rounds = algo == Algorithm::kFullMatrix ? 60 : 2000;
    cfg.sequence.kind = SequenceKind::kScaleJump;
    cfg.seed = cfg.sequence.seed = 6;
    const auto r = run_experiment(cfg);
    CHECK(r.all_pass);
    for (const auto& rep : r.reports) CHECK(rep.regret == regret_against(r.trace, rep.comparator));
  }
}

TEST_CASE("adversary runs carry a certificate and no verdicts") {
  ExperimentConfig cfg;
  cfg.source = Source::kAdversary;
  cfg.rounds = 100;
  const auto r = run_experiment(cfg);
  REQUIRE(r.certificate.has_value());
  for (const auto& rep : r.reports) CHECK(!rep.has_bound);
  const auto doc = report_json(cfg, r);
  CHECK(doc.contains("certificate"));
  cfg.algorithm = Algorithm::kUnconstrainedNd;
  cfg.dim = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("outputs land on disk and re-read consistently") {
  const auto dir = std::filesystem::temp_directory_path() / "pfol_harness_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg;
  cfg.rounds = 200;
  const auto r = run_experiment(cfg);
  write_outputs(cfg, r, dir.string());
  const Trace back = read_trace((dir / cfg.trace_file).string());
  CHECK(back == r.trace);
  std::ifstream in(dir / cfg.report_file);
  const json doc = json::parse(in);
  CHECK(doc.at("reports").size() == r.reports.size());
  for (std::size_t i = 0; i < r.reports.size(); ++i)
    CHECK(doc["reports"][i]["regret"].get<double>() == regret_against(back, r.reports[i].comparator));
  std::filesystem::remove_all(dir);
}

TEST_CASE("batch checkpoints and zero noise") {
  CHECK(batch_checkpoints(100000) == std::vector<std::int64_t>{1, 10, 100, 1000, 10000, 100000});
  CHECK(batch_checkpoints(999) == std::vector<std::int64_t>{1, 10, 100});
  CHECK(batch_checkpoints(0).empty());

  ExperimentConfig cfg;
  cfg.rounds = 1000;
  cfg.batch = {0.0, 0.0};
  const auto r = online_to_batch(cfg);
  for (double s : r.suboptimality) CHECK(s == 0.0);

  cfg.batch = {3.0, 0.5};
  cfg.dim = 3;
  cfg.algorithm = Algorithm::kUnconstrainedNd;
  const auto v = online_to_batch(cfg);
  CHECK(v.suboptimality.back() < v.suboptimality.front());
}

TEST_CASE("verify ledger scoping") {
  CHECK(verify_invariants(std::vector<std::string>{}).empty());
  const auto core = verify_invariants(std::vector<std::string>{"core"});
  CHECK(!core.empty());
  CHECK(all_pass(core));
  for (const auto& r : core) CHECK(r.module == "core");
  CHECK_THROWS_AS(verify_invariants(std::vector<std::string>{"nonsense"}), Error);
}

TEST_CASE("doubled step sizes break the alpha-sum invariant") {
  const auto ledger = verify_invariants(std::vector<std::string>{"base_learner"}, 2.0);
  bool alpha_failed = false;
  for (const auto& r : ledger)
    if (r.name.rfind("alpha_sum", 0) == 0 && !r.pass) alpha_failed = true;
  CHECK(alpha_failed);
  CHECK(all_pass(verify_invariants(std::vector<std::string>{"base_learner"})));
}

TEST_CASE("manifest covers every module") {
  const auto manifest = invariant_manifest();
  for (const auto& m : module_names()) {
    bool found = false;
    for (const auto& e : manifest) found = found || e.first == m;
    CHECK_MESSAGE(found, m);
  }
}
