#include "pfol/batch.hpp"

#include <optional>

#include "pfol/adversary.hpp"
#include "pfol/unconstrained.hpp"

namespace pfol {

std::vector<std::int64_t> batch_checkpoints(std::int64_t rounds) {
  std::vector<std::int64_t> out;
  for (std::int64_t c = 1; c <= rounds; c *= 10) {
    out.push_back(c);
    if (c > rounds / 10) break;
  }
  return out;
}

BatchResult online_to_batch(const ExperimentConfig& config) {
  config.validate();
  if (!(config.batch.noise >= 0.0)) throw Error(ErrorCode::kConfig, "batch.noise must be non-negative");
  BatchResult result;
  result.seed = config.seed;
  result.objective = "0.5 * ||w - w_star||^2, w_star = " + std::to_string(config.batch.w_star) +
                     " per coordinate, noise +-" + std::to_string(config.batch.noise);
  result.checkpoints = batch_checkpoints(config.rounds);

  UnconstrainedConfig<double> uc;
  uc.eps = config.eps;
  uc.eps_psi = config.eps_psi;
  uc.gamma = config.gamma;
  uc.h1 = config.h1;
  uc.p = config.p;
  uc.psi = config.psi();
  std::optional<Unconstrained1d<double>> scalar;
  std::optional<UnconstrainedNd<double>> vector;
  if (config.dim == 1) scalar.emplace(uc);
  else vector.emplace(config.dim, uc);

  const Vector<double> w_star = Vector<double>::Constant(config.dim, config.batch.w_star);
  SplitMix64 rng(config.seed);
  Vector<double> w_total = Vector<double>::Zero(config.dim);
  Vector<double> noise(config.dim);
  std::size_t next = 0;
  for (std::int64_t t = 1; t <= config.rounds; ++t) {
    const Vector<double> w = scalar ? Vector<double>::Constant(1, scalar->predict()) : vector->predict();
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = config.batch.noise * rng.rademacher();
    const Vector<double> g = (w - w_star) + noise;
    if (scalar) scalar->update(g(0));
    else vector->update(g);
    w_total += w;
    if (next < result.checkpoints.size() && t == result.checkpoints[next]) {
      const Vector<double> gap = w_total / double(t) - w_star;
      result.suboptimality.push_back(0.5 * gap.squaredNorm());
      ++next;
    }
  }
  return result;
}

nlohmann::json to_json(const BatchResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i)
    rows.push_back({{"T", r.checkpoints[i]}, {"suboptimality", r.suboptimality[i]}});
  return {{"objective", r.objective}, {"seed", r.seed}, {"checkpoints", rows}};
}

}  // namespace pfol
