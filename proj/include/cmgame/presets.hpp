#ifndef CMGAME_PRESETS_HPP
#define CMGAME_PRESETS_HPP

#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cmgame/games.hpp"
#include "cmgame/optimizers.hpp"
#include "cmgame/spectral.hpp"

namespace cmgame {

/// Default arg(beta) for `cm` presets given only a magnitude.
inline constexpr double kDefaultMomentumArg = std::numbers::pi / 8;
inline constexpr double kDefaultStepSize = 0.1;
inline constexpr double kDefaultAdamStepSize = 1e-3;

/// Parses a real number or a multiple of pi: "0.5", "pi", "-pi/2", "3pi/4",
/// "3*pi/4", "pi/8".
inline double parse_real(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ') s.push_back(ch);
  const std::size_t p = s.find("pi");
  if (p == std::string::npos) return detail::parse_number<double>(s, text);
  std::string coef = s.substr(0, p);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double value = std::numbers::pi;
  if (coef == "-") {
    value = -value;
  } else if (!coef.empty() && coef != "+") {
    value *= detail::parse_number<double>(coef, text);
  }
  const std::string rest = s.substr(p + 2);
  if (!rest.empty()) {
    if (rest[0] != '/') throw UnknownPreset("cannot parse '" + std::string(text) + "'");
    value /= detail::parse_number<double>(rest.substr(1), text);
  }
  return value;
}

enum class OptimizerKind {
  kSgd,
  kSgdm,
  kCm,
  kAltCm,
  kNegMom,
  kAggMo,
  kRecurrent,
  kEg,
  kOg,
  kCAdam
};

/// A resolved optimizer preset; the step size is supplied separately.
struct OptimizerPreset {
  std::string name;
  OptimizerKind kind = OptimizerKind::kSgd;
  Complex beta{0.0, 0.0};
  RealVector betas;
  std::optional<RecurrentConfig> recurrent;
  double alpha_prime = 0.0;
  double beta2 = 0.999;

  [[nodiscard]] bool is_complex_momentum() const {
    return kind == OptimizerKind::kSgd || kind == OptimizerKind::kSgdm || kind == OptimizerKind::kCm ||
           kind == OptimizerKind::kNegMom;
  }
  [[nodiscard]] double default_alpha() const {
    return kind == OptimizerKind::kCAdam ? kDefaultAdamStepSize : kDefaultStepSize;
  }
};

namespace detail {

inline RealVector parse_list(std::string_view text, std::string_view context) {
  RealVector out;
  for (std::string_view f : split_fields(text, ',')) out.push_back(parse_number<double>(f, context));
  return out;
}

inline void expect_fields(const std::vector<std::string_view>& f, std::size_t lo, std::size_t hi,
                          std::string_view spec) {
  if (f.size() < lo || f.size() > hi) {
    throw UnknownPreset("wrong number of fields in optimizer preset '" + std::string(spec) + "'");
  }
}

inline RecurrentConfig load_recurrent(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnknownPreset("cannot open recurrent config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    const auto rows = j.at("betas").get<std::vector<RealVector>>();
    const std::size_t k = rows.size();
    DenseMatrix betas(k, k);
    for (std::size_t r = 0; r < k; ++r) {
      if (rows[r].size() != k) throw UnknownPreset("recurrent betas must be square");
      for (std::size_t c = 0; c < k; ++c) betas(r, c) = rows[r][c];
    }
    RecurrentConfig cfg;
    cfg.betas = std::move(betas);
    cfg.alphas = j.contains("alphas") ? j["alphas"].get<RealVector>() : RealVector{};
    cfg.grad_mask = j.contains("grad_mask") ? j["grad_mask"].get<std::vector<bool>>()
                                            : std::vector<bool>(k, true);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw UnknownPreset("bad recurrent config '" + path + "': " + e.what());
  }
}

}  // namespace detail

/// Parses `sgd`, `sgdm:<beta>`, `cm:<|beta|>[:<arg>]`, `altcm:<|beta|>[:<arg>]`,
/// `negmom:<beta>`, `aggmo:<b1,b2,...>`, `recurrent:<file>`, `eg:<alpha'>`,
/// `og:<alpha'>` and `cadam:<|b1|>:<arg b1>:<b2>`.
inline OptimizerPreset parse_optimizer(std::string_view spec) {
  const auto f = detail::split_fields(spec);
  OptimizerPreset p;
  p.name = std::string(spec);
  const std::string_view head = f[0];
  if (head == "sgd") {
    detail::expect_fields(f, 1, 1, spec);
    p.kind = OptimizerKind::kSgd;
  } else if (head == "sgdm") {
    detail::expect_fields(f, 2, 2, spec);
    p.kind = OptimizerKind::kSgdm;
    p.beta = parse_real(f[1]);
  } else if (head == "cm" || head == "altcm") {
    detail::expect_fields(f, 2, 3, spec);
    p.kind = head == "cm" ? OptimizerKind::kCm : OptimizerKind::kAltCm;
    const double arg = f.size() == 3 ? parse_real(f[2]) : kDefaultMomentumArg;
    p.beta = from_polar(parse_real(f[1]), arg);
  } else if (head == "negmom") {
    detail::expect_fields(f, 2, 2, spec);
    p.kind = OptimizerKind::kNegMom;
    p.beta = -std::abs(parse_real(f[1]));
  } else if (head == "aggmo") {
    detail::expect_fields(f, 2, 2, spec);
    p.kind = OptimizerKind::kAggMo;
    p.betas = detail::parse_list(f[1], spec);
  } else if (head == "recurrent") {
    if (f.size() < 2) throw UnknownPreset("recurrent preset needs a file");
    p.kind = OptimizerKind::kRecurrent;
    p.recurrent = detail::load_recurrent(std::string(spec.substr(head.size() + 1)));
  } else if (head == "eg" || head == "og") {
    detail::expect_fields(f, 2, 2, spec);
    p.kind = head == "eg" ? OptimizerKind::kEg : OptimizerKind::kOg;
    p.alpha_prime = parse_real(f[1]);
  } else if (head == "cadam") {
    detail::expect_fields(f, 4, 4, spec);
    p.kind = OptimizerKind::kCAdam;
    p.beta = from_polar(parse_real(f[1]), parse_real(f[2]));
    p.beta2 = parse_real(f[3]);
    if (p.beta2 < 0.0 || p.beta2 >= 1.0) throw UnknownPreset("cadam beta2 must lie in [0, 1)");
  } else {
    throw UnknownPreset("unknown optimizer preset '" + std::string(spec) + "'");
  }
  return p;
}

/// Builds the optimizer for `preset` with step size `alpha`, starting at omega0.
/// Multi-buffer presets split alpha evenly across buffers unless the recurrent
/// file supplies its own step sizes.
inline Optimizer instantiate(const OptimizerPreset& p, double alpha, JointParams omega0) {
  switch (p.kind) {
    case OptimizerKind::kSgd:
    case OptimizerKind::kSgdm:
    case OptimizerKind::kCm:
    case OptimizerKind::kNegMom:
      return make_sim_cm({Complex(alpha), p.beta}, std::move(omega0));
    case OptimizerKind::kAltCm:
      return make_alt_cm({Complex(alpha), p.beta}, std::move(omega0));
    case OptimizerKind::kAggMo: {
      const double share = alpha / static_cast<double>(p.betas.size());
      return make_aggregated({p.betas, RealVector(p.betas.size(), share)}, std::move(omega0));
    }
    case OptimizerKind::kRecurrent: {
      RecurrentConfig cfg = *p.recurrent;
      if (cfg.alphas.empty()) {
        const std::size_t k = cfg.betas.rows();
        cfg.alphas.assign(k, alpha / static_cast<double>(k));
      }
      return make_recurrent(std::move(cfg), std::move(omega0));
    }
    case OptimizerKind::kEg:
      return make_eg({alpha, p.alpha_prime}, std::move(omega0));
    case OptimizerKind::kOg:
      return make_og({alpha, p.alpha_prime}, std::move(omega0));
    case OptimizerKind::kCAdam:
      return make_complex_adam({p.beta, p.beta2, alpha, 1e-8}, std::move(omega0));
  }
  throw UnknownPreset("unhandled optimizer preset '" + p.name + "'");
}

/// Spectral radius of one alternating complex momentum step on the linear
/// field g(omega) = J omega, acting on [Re(mu), Im(mu), omega]. Built column by
/// column from the update itself.
inline double alternating_rate(const DenseMatrix& J, std::size_t split, Complex alpha, Complex beta) {
  const std::size_t d = J.rows();
  if (3 * d > kMaxDenseSpectrumDim) throw DimensionTooLarge("alternating_rate: 3d exceeds limit");
  const GameSpec game = quadratic_game(J, split);
  const CMConfig cfg{alpha, beta};
  DenseMatrix M(3 * d, 3 * d);
  for (std::size_t col = 0; col < 3 * d; ++col) {
    CMState s(JointParams(RealVector(d, 0.0), split));
    if (col < d) {
      s.mu[col] = 1.0;
    } else if (col < 2 * d) {
      s.mu[col - d] = Complex(0.0, 1.0);
    } else {
      s.omega.values[col - 2 * d] = 1.0;
    }
    s = step_alt_cm(std::move(s), cfg, game);
    const RealVector out = AugmentedJacobian::stack(s.mu, s.omega.values);
    for (std::size_t r = 0; r < 3 * d; ++r) M(r, col) = out[r];
  }
  return spectral_radius(M);
}

/// Linearised rate of the preset at the game's fixed point, when one is
/// available (complex momentum presets via the cubic path, alternating via the
/// dense operator).
inline std::optional<double> predicted_rate(const OptimizerPreset& p, double alpha, const GameSpec& game) {
  if (!game.fixed_point) return std::nullopt;
  if (p.is_complex_momentum()) {
    return convergence_rate(game_spectrum(game, *game.fixed_point), Complex(alpha), p.beta).rho;
  }
  if (p.kind == OptimizerKind::kAltCm && game.has_jacobian() && 3 * game.dim <= kMaxDenseSpectrumDim) {
    return alternating_rate(game.jacobian(*game.fixed_point), game.split, Complex(alpha), p.beta);
  }
  return std::nullopt;
}

/// Dirac-GAN starts at (1, 1); every other game at the all-ones vector.
inline JointParams default_start(const GameSpec& game) {
  return JointParams(RealVector(game.dim, 1.0), game.split);
}

}  // namespace cmgame

#endif  // CMGAME_PRESETS_HPP
