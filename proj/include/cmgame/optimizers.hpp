#ifndef CMGAME_OPTIMIZERS_HPP
#define CMGAME_OPTIMIZERS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cmgame/complex.hpp"
#include "cmgame/dense.hpp"
#include "cmgame/errors.hpp"
#include "cmgame/games.hpp"

namespace cmgame {

namespace detail {

/// Gradient at w in a per-thread scratch buffer. Valid until the next call on
/// the same thread; saves an allocation per evaluation in long runs.
inline std::span<const double> scratch_gradient(const GameSpec& game, std::span<const double> w) {
  thread_local RealVector buf;
  buf.resize(game.dim);
  game.grad(w, buf);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Complex momentum (simultaneous, alternating, real-expanded)
// ---------------------------------------------------------------------------

/// Step size alpha and momentum coefficient beta. Presets keep alpha real;
/// complex alpha follows the general Cartesian expansion.
struct CMConfig {
  Complex alpha{0.1, 0.0};
  Complex beta{0.0, 0.0};

  /// |beta| < 1 is needed for a decaying buffer. Not enforced.
  [[nodiscard]] bool buffer_decays() const { return std::abs(beta) < 1.0; }
};

/// Joint parameters plus complex buffer mu. For alternating updates the first
/// `omega.split` buffer entries belong to player A and the rest to player B.
struct CMState {
  JointParams omega;
  ComplexVector mu;

  CMState() = default;
  explicit CMState(JointParams w) : omega(std::move(w)), mu(omega.dim(), Complex{}) {}
};

/// Simultaneous complex momentum:
///   mu <- beta mu - g(omega),  omega <- omega + Re(alpha mu).
inline CMState step_sim_cm(CMState s, const CMConfig& cfg, const GameSpec& game) {
  require_same_dim(s.omega.dim(), game.dim, "step_sim_cm");
  require_same_dim(s.mu.size(), game.dim, "step_sim_cm buffer");
  const auto g = detail::scratch_gradient(game, s.omega.values);
  for (std::size_t i = 0; i < game.dim; ++i) {
    s.mu[i] = mul(cfg.beta, s.mu[i]) - g[i];
    s.omega.values[i] += mul(cfg.alpha, s.mu[i]).real();
  }
  return s;
}

/// Alternating complex momentum. Player A moves first; player B's gradient is
/// taken at the updated theta_A. Costs two sequential gradient evaluations.
inline CMState step_alt_cm(CMState s, const CMConfig& cfg, const GameSpec& game) {
  require_same_dim(s.omega.dim(), game.dim, "step_alt_cm");
  require_same_dim(s.mu.size(), game.dim, "step_alt_cm buffer");
  const std::size_t split = game.split;
  const auto ga = detail::scratch_gradient(game, s.omega.values);
  for (std::size_t i = 0; i < split; ++i) {
    s.mu[i] = mul(cfg.beta, s.mu[i]) - ga[i];
    s.omega.values[i] += mul(cfg.alpha, s.mu[i]).real();
  }
  const auto gb = detail::scratch_gradient(game, s.omega.values);
  for (std::size_t i = split; i < game.dim; ++i) {
    s.mu[i] = mul(cfg.beta, s.mu[i]) - gb[i];
    s.omega.values[i] += mul(cfg.alpha, s.mu[i]).real();
  }
  return s;
}

/// Complex momentum with the buffer held as two real vectors.
struct CMRealState {
  JointParams omega;
  RealVector mu_re;
  RealVector mu_im;

  CMRealState() = default;
  explicit CMRealState(JointParams w)
      : omega(std::move(w)), mu_re(omega.dim(), 0.0), mu_im(omega.dim(), 0.0) {}
};

/// Same trajectory as step_sim_cm using only real arithmetic. The parameter
/// update reads the buffer before it is advanced:
///   omega <- omega - Re(a) g + Re(a b) Re(mu) - Im(a b) Im(mu)
///   Re(mu) <- Re(b) Re(mu) - Im(b) Im(mu) - g
///   Im(mu) <- Im(b) Re(mu) + Re(b) Im(mu)
inline CMRealState step_sim_cm_real(CMRealState s, const CMConfig& cfg, const GameSpec& game) {
  require_same_dim(s.omega.dim(), game.dim, "step_sim_cm_real");
  require_same_dim(s.mu_re.size(), game.dim, "step_sim_cm_real buffer");
  require_same_dim(s.mu_im.size(), game.dim, "step_sim_cm_real buffer");
  const double br = cfg.beta.real();
  const double bi = cfg.beta.imag();
  const double ar = cfg.alpha.real();
  const double ai = cfg.alpha.imag();
  const double abr = ar * br - ai * bi;
  const double abi = ar * bi + ai * br;
  const auto g = detail::scratch_gradient(game, s.omega.values);
  for (std::size_t i = 0; i < game.dim; ++i) {
    const double re = s.mu_re[i];
    const double im = s.mu_im[i];
    s.omega.values[i] += -ar * g[i] + abr * re - abi * im;
    s.mu_re[i] = br * re - bi * im - g[i];
    s.mu_im[i] = bi * re + br * im;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Multi-buffer momentum
// ---------------------------------------------------------------------------

/// K real buffers coupled through betas(l, k): buffer k receives
/// sum_l betas(l, k) mu_l, minus the gradient when grad_mask[k] is set.
struct RecurrentConfig {
  DenseMatrix betas;
  RealVector alphas;
  std::vector<bool> grad_mask;

  [[nodiscard]] std::size_t buffer_count() const { return alphas.size(); }

  void validate() const {
    const std::size_t k = alphas.size();
    if (betas.rows() != k || betas.cols() != k || grad_mask.size() != k) {
      throw DimensionMismatch("RecurrentConfig: betas must be KxK and grad_mask length K (K = " +
                              std::to_string(k) + ")");
    }
  }

  /// Every buffer receives the gradient.
  static RecurrentConfig all_buffers(DenseMatrix betas, RealVector alphas) {
    std::vector<bool> mask(alphas.size(), true);
    return {std::move(betas), std::move(alphas), std::move(mask)};
  }

  /// Two buffers reproducing complex momentum with real step size alpha:
  /// buffer 0 is Re(mu), buffer 1 is Im(mu), and only Re(mu) sees the gradient.
  static RecurrentConfig complex_equivalent(double alpha, Complex beta) {
    DenseMatrix b{{beta.real(), beta.imag()}, {-beta.imag(), beta.real()}};
    return {std::move(b), RealVector{alpha, 0.0}, std::vector<bool>{true, false}};
  }
};

struct MultiBufferState {
  JointParams omega;
  std::vector<RealVector> buffers;

  MultiBufferState() = default;
  MultiBufferState(JointParams w, std::size_t k)
      : omega(std::move(w)), buffers(k, RealVector(omega.dim(), 0.0)) {}
};

inline MultiBufferState step_recurrent(MultiBufferState s, const RecurrentConfig& cfg,
                                       const GameSpec& game) {
  cfg.validate();
  const std::size_t k_count = cfg.buffer_count();
  require_same_dim(s.buffers.size(), k_count, "step_recurrent buffer count");
  require_same_dim(s.omega.dim(), game.dim, "step_recurrent");
  const auto g = detail::scratch_gradient(game, s.omega.values);

  std::vector<RealVector> next(k_count, RealVector(game.dim, 0.0));
  for (std::size_t k = 0; k < k_count; ++k) {
    require_same_dim(s.buffers[k].size(), game.dim, "step_recurrent buffer");
    RealVector& out = next[k];
    for (std::size_t l = 0; l < k_count; ++l) {
      const double b = cfg.betas(l, k);
      if (b == 0.0) continue;
      for (std::size_t i = 0; i < game.dim; ++i) out[i] += b * s.buffers[l][i];
    }
    if (cfg.grad_mask[k]) {
      for (std::size_t i = 0; i < game.dim; ++i) out[i] -= g[i];
    }
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t i = 0; i < game.dim; ++i) s.omega.values[i] += cfg.alphas[k] * next[k][i];
  }
  s.buffers = std::move(next);
  return s;
}

/// Aggregated momentum: K independent buffers with their own decay, each fed
/// the gradient, parameters moved by sum_k alphas[k] mu_k.
struct AggregatedConfig {
  RealVector betas;
  RealVector alphas;
};

inline MultiBufferState step_aggregated(MultiBufferState s, const AggregatedConfig& cfg,
                                        const GameSpec& game) {
  const std::size_t k_count = cfg.betas.size();
  require_same_dim(cfg.alphas.size(), k_count, "step_aggregated alphas");
  require_same_dim(s.buffers.size(), k_count, "step_aggregated buffer count");
  require_same_dim(s.omega.dim(), game.dim, "step_aggregated");
  const auto g = detail::scratch_gradient(game, s.omega.values);
  for (std::size_t k = 0; k < k_count; ++k) {
    RealVector& mu = s.buffers[k];
    require_same_dim(mu.size(), game.dim, "step_aggregated buffer");
    for (std::size_t i = 0; i < game.dim; ++i) {
      mu[i] = cfg.betas[k] * mu[i] - g[i];
      s.omega.values[i] += cfg.alphas[k] * mu[i];
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Extragradient and optimistic gradient
// ---------------------------------------------------------------------------

/// Step size alpha and a separately tuned extrapolation parameter alpha_prime.
struct EGOGConfig {
  double alpha = 0.1;
  double alpha_prime = 0.1;
};

struct PlainState {
  JointParams omega;
};

/// omega_half = omega - alpha' g(omega); omega <- omega - alpha g(omega_half).
inline PlainState step_eg(PlainState s, const EGOGConfig& cfg, const GameSpec& game) {
  require_same_dim(s.omega.dim(), game.dim, "step_eg");
  const auto g = detail::scratch_gradient(game, s.omega.values);
  RealVector half = s.omega.values;
  for (std::size_t i = 0; i < game.dim; ++i) half[i] -= cfg.alpha_prime * g[i];
  const auto gh = detail::scratch_gradient(game, half);
  for (std::size_t i = 0; i < game.dim; ++i) s.omega.values[i] -= cfg.alpha * gh[i];
  return s;
}

/// Optimistic gradient keeps the previous gradient, zero before the first step.
struct OGState {
  JointParams omega;
  RealVector prev_grad;

  OGState() = default;
  explicit OGState(JointParams w) : omega(std::move(w)), prev_grad(omega.dim(), 0.0) {}
};

/// omega <- omega - 2 alpha g^j + alpha' g^{j-1}.
inline OGState step_og(OGState s, const EGOGConfig& cfg, const GameSpec& game) {
  require_same_dim(s.omega.dim(), game.dim, "step_og");
  require_same_dim(s.prev_grad.size(), game.dim, "step_og previous gradient");
  const auto g = detail::scratch_gradient(game, s.omega.values);
  for (std::size_t i = 0; i < game.dim; ++i) {
    s.omega.values[i] += -2.0 * cfg.alpha * g[i] + cfg.alpha_prime * s.prev_grad[i];
  }
  s.prev_grad.assign(g.begin(), g.end());
  return s;
}

// ---------------------------------------------------------------------------
// Complex Adam variant
// ---------------------------------------------------------------------------

/// Adam with a complex first-moment coefficient and no first-moment bias
/// correction.
struct ComplexAdamConfig {
  Complex beta1{0.9, 0.0};
  double beta2 = 0.999;
  double alpha = 1e-3;
  double epsilon = 1e-8;
};

struct ComplexAdamState {
  JointParams omega;
  ComplexVector mu;
  RealVector v;
  std::size_t t = 0;  // completed steps

  ComplexAdamState() = default;
  explicit ComplexAdamState(JointParams w)
      : omega(std::move(w)), mu(omega.dim(), Complex{}), v(omega.dim(), 0.0) {}
};

/// One step at (1-based) index j = t + 1:
///   mu <- beta1 mu - g,  v <- beta2 v + (1 - beta2) g^2,
///   v_hat = v / (1 - beta2^j),  omega <- omega + alpha Re(mu) / (sqrt(v_hat) + eps).
inline ComplexAdamState step_complex_adam(ComplexAdamState s, const ComplexAdamConfig& cfg,
                                          const GameSpec& game) {
  require_same_dim(s.omega.dim(), game.dim, "step_complex_adam");
  require_same_dim(s.mu.size(), game.dim, "step_complex_adam buffer");
  require_same_dim(s.v.size(), game.dim, "step_complex_adam second moment");
  const auto g = detail::scratch_gradient(game, s.omega.values);
  for (double gi : g) {
    if (!std::isfinite(gi)) throw NonfiniteGradient("step_complex_adam: nonfinite gradient");
  }
  s.t += 1;
  const double correction = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < game.dim; ++i) {
    s.mu[i] = mul(cfg.beta1, s.mu[i]) - g[i];
    s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double v_hat = s.v[i] / correction;
    s.omega.values[i] += cfg.alpha * s.mu[i].real() / (std::sqrt(v_hat) + cfg.epsilon);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Uniform stepping interface
// ---------------------------------------------------------------------------

/// Each method bundles its configuration and state; step() advances one update
/// and returns the number of gradient evaluations it consumed.
struct SimCM {
  CMConfig config;
  CMState state;
  static constexpr std::size_t kEvalsPerStep = 1;
  std::size_t step(const GameSpec& g) {
    state = step_sim_cm(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

struct AltCM {
  CMConfig config;
  CMState state;
  static constexpr std::size_t kEvalsPerStep = 2;
  std::size_t step(const GameSpec& g) {
    state = step_alt_cm(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

struct SimCMReal {
  CMConfig config;
  CMRealState state;
  static constexpr std::size_t kEvalsPerStep = 1;
  std::size_t step(const GameSpec& g) {
    state = step_sim_cm_real(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

struct Recurrent {
  RecurrentConfig config;
  MultiBufferState state;
  static constexpr std::size_t kEvalsPerStep = 1;
  std::size_t step(const GameSpec& g) {
    state = step_recurrent(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

struct Aggregated {
  AggregatedConfig config;
  MultiBufferState state;
  static constexpr std::size_t kEvalsPerStep = 1;
  std::size_t step(const GameSpec& g) {
    state = step_aggregated(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

struct ExtraGradient {
  EGOGConfig config;
  PlainState state;
  static constexpr std::size_t kEvalsPerStep = 2;
  std::size_t step(const GameSpec& g) {
    state = step_eg(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

struct OptimisticGradient {
  EGOGConfig config;
  OGState state;
  static constexpr std::size_t kEvalsPerStep = 1;
  std::size_t step(const GameSpec& g) {
    state = step_og(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

struct ComplexAdam {
  ComplexAdamConfig config;
  ComplexAdamState state;
  static constexpr std::size_t kEvalsPerStep = 1;
  std::size_t step(const GameSpec& g) {
    state = step_complex_adam(std::move(state), config, g);
    return kEvalsPerStep;
  }
  [[nodiscard]] const RealVector& params() const { return state.omega.values; }
};

using Optimizer = std::variant<SimCM, AltCM, SimCMReal, Recurrent, Aggregated, ExtraGradient,
                               OptimisticGradient, ComplexAdam>;

inline std::size_t step(Optimizer& opt, const GameSpec& game) {
  return std::visit([&](auto& m) { return m.step(game); }, opt);
}

inline const RealVector& params(const Optimizer& opt) {
  return std::visit([](const auto& m) -> const RealVector& { return m.params(); }, opt);
}

// Factories starting from omega0 with zero buffers.

inline Optimizer make_sim_cm(CMConfig cfg, JointParams omega0) {
  return SimCM{cfg, CMState(std::move(omega0))};
}
inline Optimizer make_alt_cm(CMConfig cfg, JointParams omega0) {
  return AltCM{cfg, CMState(std::move(omega0))};
}
inline Optimizer make_sim_cm_real(CMConfig cfg, JointParams omega0) {
  return SimCMReal{cfg, CMRealState(std::move(omega0))};
}
inline Optimizer make_recurrent(RecurrentConfig cfg, JointParams omega0) {
  cfg.validate();
  const std::size_t k = cfg.buffer_count();
  return Recurrent{std::move(cfg), MultiBufferState(std::move(omega0), k)};
}
inline Optimizer make_aggregated(AggregatedConfig cfg, JointParams omega0) {
  require_same_dim(cfg.alphas.size(), cfg.betas.size(), "make_aggregated");
  const std::size_t k = cfg.betas.size();
  return Aggregated{std::move(cfg), MultiBufferState(std::move(omega0), k)};
}
inline Optimizer make_eg(EGOGConfig cfg, JointParams omega0) {
  return ExtraGradient{cfg, PlainState{std::move(omega0)}};
}
inline Optimizer make_og(EGOGConfig cfg, JointParams omega0) {
  return OptimisticGradient{cfg, OGState(std::move(omega0))};
}
inline Optimizer make_complex_adam(ComplexAdamConfig cfg, JointParams omega0) {
  return ComplexAdam{cfg, ComplexAdamState(std::move(omega0))};
}

}  // namespace cmgame

#endif  // CMGAME_OPTIMIZERS_HPP
