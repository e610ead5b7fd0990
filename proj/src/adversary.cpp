#include "pfol/adversary.hpp"

#include <algorithm>

namespace pfol {

SequenceKind parse_sequence_kind(const std::string& name) {
  if (name == "constant") return SequenceKind::kConstant;
  if (name == "rademacher") return SequenceKind::kRademacher;
  if (name == "gaussian") return SequenceKind::kGaussian;
  if (name == "pareto") return SequenceKind::kPareto;
  if (name == "scale_jump") return SequenceKind::kScaleJump;
  throw Error(ErrorCode::kConfig, "unknown sequence kind '" + name +
                                      "' (expected constant, rademacher, gaussian, pareto or scale_jump)");
}

const char* to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::kConstant: return "constant";
    case SequenceKind::kRademacher: return "rademacher";
    case SequenceKind::kGaussian: return "gaussian";
    case SequenceKind::kPareto: return "pareto";
    case SequenceKind::kScaleJump: return "scale_jump";
  }
  return "unknown";
}

void SequenceGenSpec::validate() const {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::kConfig, "sequence scale must be >= 0");
  if (kind == SequenceKind::kPareto && !(tail_alpha > 0.0))
    throw Error(ErrorCode::kConfig, "pareto tail_alpha must be positive");
  if (kind == SequenceKind::kScaleJump && !(jump_factor > 0.0))
    throw Error(ErrorCode::kConfig, "scale_jump jump_factor must be positive");
}

namespace {

double draw(const SequenceGenSpec& spec, SplitMix64& rng, std::int64_t t, std::int64_t rounds) {
  switch (spec.kind) {
    case SequenceKind::kConstant: return spec.scale;
    case SequenceKind::kRademacher: return spec.scale * rng.rademacher();
    case SequenceKind::kGaussian: return spec.scale * rng.normal();
    case SequenceKind::kPareto: {
      const double sgn = rng.rademacher();
      return sgn * spec.scale * std::pow(rng.uniform(), -1.0 / spec.tail_alpha);
    }
    case SequenceKind::kScaleJump: {
      const double base = spec.scale * rng.uniform() * rng.rademacher();
      return t < rounds / 2 ? base : base * spec.jump_factor;
    }
  }
  return 0.0;
}

}  // namespace

std::vector<double> gen_sequence(const SequenceGenSpec& spec, std::int64_t rounds) {
  spec.validate();
  if (rounds < 0) throw Error(ErrorCode::kConfig, "sequence length must be non-negative");
  SplitMix64 rng(spec.seed);
  std::vector<double> out(static_cast<std::size_t>(rounds));
  for (std::int64_t t = 0; t < rounds; ++t) out[t] = draw(spec, rng, t, rounds);
  return out;
}

std::vector<Vector<double>> gen_vector_sequence(const SequenceGenSpec& spec, std::int64_t rounds, Eigen::Index dim) {
  spec.validate();
  if (rounds < 0) throw Error(ErrorCode::kConfig, "sequence length must be non-negative");
  if (dim < 1) throw Error(ErrorCode::kConfig, "dimension must be at least 1");
  SplitMix64 rng(spec.seed);
  std::vector<Vector<double>> out(static_cast<std::size_t>(rounds), Vector<double>(dim));
  for (std::int64_t t = 0; t < rounds; ++t)
    for (Eigen::Index i = 0; i < dim; ++i) out[t](i) = draw(spec, rng, t, rounds);
  return out;
}

void AdversaryConfig::validate() const {
  psi.validate();
  if (!(h1 > 0.0)) throw Error(ErrorCode::kConfig, "adversary h1 must be positive");
  if (!(gamma > 0.0)) throw Error(ErrorCode::kConfig, "adversary gamma must be positive");
  if (!(eps > 0.0)) throw Error(ErrorCode::kConfig, "adversary eps must be positive");
}

Adversary::Adversary(AdversaryConfig config) : config_(config) { config_.validate(); }

double Adversary::threshold(std::int64_t t) const {
  return -2.0 * config_.eps - psi_star_gamma_grad(config_.psi, config_.gamma, 2.0 * config_.h1 * double(t - 1));
}

double Adversary::adversary_next(double w) {
  ++t_;
  if (tau_) return 0.0;
  if (w < threshold(t_)) {
    tau_ = t_ - 1;
    return -2.0 * double(t_ - 1) * config_.h1;
  }
  return config_.h1;
}

double certificate_bound(const AdversaryConfig& config, double big_g, double w_star, std::int64_t rounds) {
  const double T = double(rounds);
  const double gw = big_g * std::abs(w_star);
  double bound = config.eps * big_g + config.gamma / 8.0 * psi_conjugate(config.psi, big_g / config.gamma) +
                 config.gamma / 4.0 * psi_value(config.psi, w_star);
  if (gw > 0.0) bound += gw / 4.0 * std::sqrt(T * std::log1p(gw * std::sqrt(T) / (config.h1 * config.eps)));
  return bound;
}

LowerBoundCertificate lower_bound_certificate(const Adversary& adversary, std::int64_t rounds) {
  const auto& cfg = adversary.config();
  LowerBoundCertificate cert;
  cert.triggered = adversary.triggered();
  if (cert.triggered) {
    cert.w_star = 0.0;
    // G is a max that always includes h1, which matters when tau = 0.
    cert.big_g = std::max(cfg.h1, 2.0 * double(*adversary.tau()) * cfg.h1);
  } else {
    cert.w_star = -2.0 * psi_star_gamma_grad(cfg.psi, cfg.gamma, 2.0 * double(rounds) * cfg.h1);
    cert.big_g = cfg.h1;
  }
  cert.claimed_bound = certificate_bound(cfg, cert.big_g, cert.w_star, rounds);
  return cert;
}

double never_triggered_floor(const AdversaryConfig& config, std::int64_t tau) {
  const double x = 2.0 * double(tau) * config.h1;
  return -2.0 * config.eps * double(tau) * config.h1 - 0.5 * psi_star_gamma(config.psi, config.gamma, x);
}

}  // namespace pfol
