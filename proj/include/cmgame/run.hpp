#ifndef CMGAME_RUN_HPP
#define CMGAME_RUN_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cmgame/games.hpp"
#include "cmgame/optimizers.hpp"
#include "cmgame/status.hpp"

namespace cmgame {

/// Distance above which a run is declared divergent.
inline constexpr double kDivergenceDistance = 1e8;

struct StopCriteria {
  std::size_t max_steps = 100000;
  double tol = 1e-6;
  /// When true, tol is scaled by the initial distance.
  bool relative = false;
  /// Optional cap on cumulative gradient evaluations.
  std::optional<std::size_t> max_grad_evals;
};

struct ConvergenceReport {
  /// distances[j] is the distance at iterate j (j = 0 is the start). Measured to
  /// the fixed point, or the gradient norm when the game has none.
  std::vector<double> distances;
  /// grad_evals[j] is the cumulative evaluation count after j steps.
  std::vector<std::size_t> grad_evals;
  RunStatus status = RunStatus::kBudgetExhausted;
  /// First j with distance <= tolerance; empty when never reached.
  std::optional<std::size_t> steps_to_tol;
  std::optional<std::size_t> evals_to_tol;
  /// Asymptotic per-step contraction factor; NaN when too few samples.
  double measured_rate = std::numeric_limits<double>::quiet_NaN();
  bool distance_is_gradient_norm = false;

  [[nodiscard]] bool converged() const { return status == RunStatus::kConverged; }
  [[nodiscard]] std::size_t steps_taken() const {
    return distances.empty() ? 0 : distances.size() - 1;
  }
  [[nodiscard]] std::size_t total_grad_evals() const {
    return grad_evals.empty() ? 0 : grad_evals.back();
  }
};

/// Least-squares slope of log(distance) against iteration over the trailing
/// half of `distances` (the first 10% is a transient and always skipped),
/// returned as exp(slope). Zero or nonfinite samples are ignored.
inline double estimate_linear_rate(std::span<const double> distances) {
  const std::size_t n = distances.size();
  const auto skip = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n)));
  const std::size_t first = std::max(skip, n / 2);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t j = first; j < n; ++j) {
    const double d = distances[j];
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    const double x = static_cast<double>(j);
    const double y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mm = static_cast<double>(m);
  const double denom = mm * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::exp((mm * sxy - sx * sy) / denom);
}

/// Called after every iterate (including the start) with the step index, the
/// parameters, and the cumulative evaluation count.
using RunObserver =
    std::function<void(std::size_t step, std::span<const double> omega, std::size_t evals)>;

namespace detail {

inline double distance_to(std::span<const double> omega, const GameSpec& game) {
  double acc = 0.0;
  if (game.fixed_point) {
    const RealVector& star = *game.fixed_point;
    for (std::size_t i = 0; i < omega.size(); ++i) acc += (omega[i] - star[i]) * (omega[i] - star[i]);
  } else {
    for (double g : game.gradient(omega)) acc += g * g;
  }
  return std::sqrt(acc);
}

}  // namespace detail

/// Runs `opt` on `game` until the distance falls to the tolerance, the budget is
/// exhausted, or the iterate diverges (nonfinite or distance above 1e8).
inline ConvergenceReport run(const GameSpec& game, Optimizer opt, const StopCriteria& stop,
                             const RunObserver& observer = {}) {
  require_same_dim(params(opt).size(), game.dim, "run");
  ConvergenceReport report;
  report.distance_is_gradient_norm = !game.fixed_point.has_value();

  const double d0 = detail::distance_to(params(opt), game);
  const double tol = stop.relative ? stop.tol * d0 : stop.tol;
  report.distances.push_back(d0);
  report.grad_evals.push_back(0);
  if (observer) observer(0, params(opt), 0);

  std::size_t evals = 0;
  if (d0 <= tol) {
    report.status = RunStatus::kConverged;
    report.steps_to_tol = 0;
    report.evals_to_tol = 0;
  } else if (!std::isfinite(d0) || d0 > kDivergenceDistance) {
    report.status = RunStatus::kDiverged;
  } else {
    for (std::size_t j = 1; j <= stop.max_steps; ++j) {
      if (stop.max_grad_evals && evals >= *stop.max_grad_evals) break;
      try {
        evals += step(opt, game);
      } catch (const NonfiniteGradient&) {
        report.status = RunStatus::kDiverged;
        break;
      }
      const double d = detail::distance_to(params(opt), game);
      report.distances.push_back(d);
      report.grad_evals.push_back(evals);
      if (observer) observer(j, params(opt), evals);
      if (!std::isfinite(d) || d > kDivergenceDistance) {
        report.status = RunStatus::kDiverged;
        break;
      }
      if (d <= tol) {
        report.status = RunStatus::kConverged;
        report.steps_to_tol = j;
        report.evals_to_tol = evals;
        break;
      }
    }
  }
  report.measured_rate = estimate_linear_rate(report.distances);
  return report;
}

}  // namespace cmgame

#endif  // CMGAME_RUN_HPP
