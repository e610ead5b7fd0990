#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pfol/batch.hpp"
#include "pfol/config.hpp"
#include "pfol/experiment.hpp"
#include "pfol/trace_io.hpp"
#include "pfol/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct RunArgs {
  std::string config;
  std::string out;
  pfol::ConfigOverrides overrides;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "JSON experiment config")->required();
  cmd->add_option("--out", args.out, "output directory")->required();
  cmd->add_option("--seed", args.overrides.seed, "override seed");
  cmd->add_option("--T", args.overrides.rounds, "override rounds");
  cmd->add_option("--algo", args.overrides.algorithm, "override algorithm");
  cmd->add_option("--p", args.overrides.p, "override p");
  cmd->add_option("--q", args.overrides.q, "override regularizer exponent q");
  cmd->add_option("--gamma", args.overrides.gamma, "override gamma");
  cmd->add_option("--eps", args.overrides.eps, "override eps");
  cmd->add_option("--h1", args.overrides.h1, "override first hint h1");
}

pfol::ExperimentConfig load(const RunArgs& args) {
  auto cfg = pfol::load_config(args.config);
  pfol::apply_overrides(cfg, args.overrides);
  return cfg;
}

int run(const RunArgs& args, bool force_adversary) {
  auto cfg = load(args);
  if (force_adversary) {
    cfg.source = pfol::Source::kAdversary;
    cfg.validate();
  }
  const auto result = pfol::run_experiment(cfg);
  pfol::write_outputs(cfg, result, args.out);
  int failed = 0;
  for (const auto& rep : result.reports)
    if (rep.has_bound && !rep.pass) ++failed;
  std::cout << result.trace.size() << " rounds, " << result.reports.size() << " reports, " << failed
            << " bound violations -> " << args.out << '\n';
  if (result.certificate)
    std::cout << "certificate: w* = " << pfol::format_double(result.certificate->w_star)
              << ", G = " << pfol::format_double(result.certificate->big_g)
              << ", bound = " << pfol::format_double(result.certificate->claimed_bound)
              << (result.certificate->triggered ? " (triggered)" : " (untriggered)") << '\n';
  return result.all_pass ? kOk : kVerifyFailed;
}

int batch(const RunArgs& args) {
  const auto cfg = load(args);
  const auto r = pfol::online_to_batch(cfg);
  std::error_code ec;
  std::filesystem::create_directories(args.out, ec);
  if (ec) throw pfol::Error(pfol::ErrorCode::kIo, "cannot create output directory '" + args.out + "'");
  const auto path = (std::filesystem::path(args.out) / "batch.json").string();
  std::ofstream out(path);
  if (!out) throw pfol::Error(pfol::ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << pfol::to_json(r).dump(2) << '\n';
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i)
    std::cout << "T=" << r.checkpoints[i] << " suboptimality=" << pfol::format_double(r.suboptimality[i]) << '\n';
  return kOk;
}

int verify(const std::vector<std::string>& modules, bool module_given, double fault) {
  std::optional<std::vector<std::string>> scope;
  if (module_given) {
    // A bare --module selects nothing.
    scope.emplace();
    for (const auto& m : modules)
      if (!m.empty()) scope->push_back(m);
  }
  const auto ledger = pfol::verify_invariants(scope, fault);
  for (const auto& r : ledger)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.module << '/' << r.name << " margin=" << pfol::format_double(r.margin)
              << "  " << r.detail << '\n';
  const bool ok = pfol::all_pass(ledger);
  std::cout << ledger.size() << " invariants, " << (ok ? "all pass" : "failures present") << '\n';
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parameter-free online learning harness"};
  app.require_subcommand(1);

  RunArgs run_args, adv_args, batch_args;
  add_run_options(app.add_subcommand("run", "run an experiment and check regret bounds"), run_args);
  add_run_options(app.add_subcommand("adversary", "play the lower-bound adversary"), adv_args);
  add_run_options(app.add_subcommand("batch", "online-to-batch conversion on a quadratic"), batch_args);

  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
  std::vector<std::string> modules;
  double fault = 1.0;
  auto* module_opt = verify_cmd->add_option("--module", modules, "restrict to a module (repeatable)")->expected(0, -1);
  verify_cmd->add_option("--inject-fault", fault, "multiply every base step size")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (app.got_subcommand("run")) return run(run_args, false);
    if (app.got_subcommand("adversary")) return run(adv_args, true);
    if (app.got_subcommand("batch")) return batch(batch_args);
    return verify(modules, module_opt->count() > 0, fault);
  } catch (const pfol::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case pfol::ErrorCode::kConfig:
      case pfol::ErrorCode::kIo:
      case pfol::ErrorCode::kUnsupportedRegularizer:
        return kConfigError;
      default:
        return kRuntimeError;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
