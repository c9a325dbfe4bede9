#ifndef CMGAME_SPECTRAL_HPP
#define CMGAME_SPECTRAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cmgame/complex.hpp"
#include "cmgame/cubic.hpp"
#include "cmgame/dense.hpp"
#include "cmgame/errors.hpp"
#include "cmgame/parallel.hpp"
#include "cmgame/status.hpp"

namespace cmgame {

/// Spectral radius threshold below which dynamics count as convergent. Values
/// within 1e-12 of 1 are treated as non-convergent.
inline constexpr double kConvergenceMargin = 1e-12;

inline bool is_contractive(double rho) { return rho < 1.0 - kConvergenceMargin; }

/// Jacobian of one complex momentum step acting on the stacked state
/// [Re(mu), Im(mu), omega] for the linear field g(omega) = J omega:
///
///   [ Re(b) I     -Im(b) I     -J           ]
///   [ Im(b) I      Re(b) I      0           ]
///   [ Re(a b) I   -Im(a b) I    I - Re(a) J ]
struct AugmentedJacobian {
  DenseMatrix R;

  [[nodiscard]] std::size_t state_dim() const { return R.rows(); }

  /// Stacks [Re(mu), Im(mu), omega].
  static RealVector stack(std::span<const Complex> mu, std::span<const double> omega) {
    RealVector s;
    s.reserve(3 * omega.size());
    for (const Complex& m : mu) s.push_back(m.real());
    for (const Complex& m : mu) s.push_back(m.imag());
    s.insert(s.end(), omega.begin(), omega.end());
    return s;
  }
};

inline AugmentedJacobian build_R(const DenseMatrix& J, Complex alpha, Complex beta) {
  if (!J.square()) throw NonSquare("build_R: Jacobian must be square");
  const std::size_t d = J.rows();
  const Complex ab = alpha * beta;
  const DenseMatrix I = DenseMatrix::identity(d);
  DenseMatrix R(3 * d, 3 * d);
  R.set_block(0, 0, beta.real() * I);
  R.set_block(0, d, -beta.imag() * I);
  R.set_block(0, 2 * d, -1.0 * J);
  R.set_block(d, 0, beta.imag() * I);
  R.set_block(d, d, beta.real() * I);
  R.set_block(2 * d, 0, ab.real() * I);
  R.set_block(2 * d, d, -ab.imag() * I);
  R.set_block(2 * d, 2 * d, I - alpha.real() * J);
  return {std::move(R)};
}

/// The 3x3 block of R restricted to the eigenspace of lambda.
inline ComplexDenseMatrix build_R_block(Complex lambda, Complex alpha, Complex beta) {
  const double a = beta.real();
  const double b = beta.imag();
  const double c = alpha.real();
  const double d = alpha.imag();
  return ComplexDenseMatrix{{a, -b, -lambda},
                            {b, a, 0.0},
                            {a * c - b * d, -(b * c + a * d), 1.0 - c * lambda}};
}

/// det(R_k - x I) for the block of eigenvalue lambda = r + i u, with
/// a = Re(beta), b = Im(beta), c = Re(alpha), d = Im(alpha):
///
///   p(x) = -a^2 x + a^2 + a c r x + i a c u x + 2 a x^2 - 2 a x - b^2 x + b^2
///          + b d r x + i b d u x - c r x^2 - i c u x^2 - x^3 + x^2
inline CubicPolynomial char_poly(Complex lambda, Complex alpha, Complex beta) {
  const double a = beta.real();
  const double b = beta.imag();
  const double c = alpha.real();
  const double d = alpha.imag();
  const double r = lambda.real();
  const double u = lambda.imag();
  const Complex i{0.0, 1.0};
  CubicPolynomial p;
  p.c3 = -1.0;
  p.c2 = 2.0 * a - c * r - i * c * u + 1.0;
  p.c1 = -a * a + a * c * r + i * a * c * u - 2.0 * a - b * b + b * d * r + i * b * d * u;
  p.c0 = a * a + b * b;
  return p;
}

// Special cases of char_poly. Each is written out in its own reduced form so
// it can be checked against the general polynomial.

/// Purely imaginary eigenvalue lambda = i u:
///   p(x) = -a^2 x + a^2 + i a c u x + 2 a x^2 - 2 a x - b^2 x + b^2
///          + i b d u x - i c u x^2 - x^3 + x^2
inline CubicPolynomial char_poly_imaginary(double u, Complex alpha, Complex beta) {
  const double a = beta.real();
  const double b = beta.imag();
  const double c = alpha.real();
  const double d = alpha.imag();
  const Complex i{0.0, 1.0};
  return {-1.0, 2.0 * a - i * c * u + 1.0,
          -a * a + i * a * c * u - 2.0 * a - b * b + i * b * d * u, a * a + b * b};
}

/// Imaginary eigenvalue i u and real step size c:
///   p(x) = x (-a^2 + i a c u - 2 a - b^2) + a^2 + x^2 (2 a - i c u + 1) + b^2 - x^3
inline CubicPolynomial char_poly_imaginary_real_step(double u, double c, Complex beta) {
  const double a = beta.real();
  const double b = beta.imag();
  const Complex i{0.0, 1.0};
  return {-1.0, 2.0 * a - i * c * u + 1.0, -a * a + i * a * c * u - 2.0 * a - b * b, a * a + b * b};
}

/// Eigenvalue lambda = i |lambda| with step size alpha = alpha_prime / |lambda|;
/// the eigenvalue drops out entirely:
///   p(x) = x (Re(b) (i a' - 2) - |b|^2) + x^2 (2 Re(b) - i a' + 1) + |b|^2 - x^3
inline CubicPolynomial char_poly_proportional_step(double alpha_prime, Complex beta) {
  const double re = beta.real();
  const double m2 = std::norm(beta);
  const Complex i{0.0, 1.0};
  return {-1.0, 2.0 * re - i * alpha_prime + 1.0, re * (i * alpha_prime - 2.0) - m2, m2};
}

/// As char_poly_proportional_step with beta purely imaginary (Re(beta) = 0):
///   p(x) = |b|^2 - x |b|^2 - x^2 (i a' - 1) - x^3
inline CubicPolynomial char_poly_proportional_step_imaginary_beta(double alpha_prime,
                                                                  double beta_mag) {
  const double m2 = beta_mag * beta_mag;
  const Complex i{0.0, 1.0};
  return {-1.0, -(i * alpha_prime - 1.0), -m2, m2};
}

inline double max_root_magnitude(const std::array<Complex, 3>& roots) {
  return std::max({std::abs(roots[0]), std::abs(roots[1]), std::abs(roots[2])});
}

/// Predicted linear rate of simultaneous complex momentum from the spectrum of
/// the game Jacobian.
struct RatePrediction {
  double rho = 0.0;
  std::vector<std::pair<Complex, std::array<Complex, 3>>> per_eigenvalue_roots;
  bool converges = false;
};

inline RatePrediction convergence_rate(std::span<const Complex> spectrum, Complex alpha,
                                       Complex beta) {
  RatePrediction out;
  out.per_eigenvalue_roots.reserve(spectrum.size());
  for (const Complex& lambda : spectrum) {
    const auto roots = solve_cubic(char_poly(lambda, alpha, beta));
    out.rho = std::max(out.rho, max_root_magnitude(roots));
    out.per_eigenvalue_roots.emplace_back(lambda, roots);
  }
  out.converges = is_contractive(out.rho);
  return out;
}

/// Spectral radius of the full 3d x 3d augmented matrix. Test oracle for
/// convergence_rate; requires 3d <= 64.
inline double rate_for_full_R(const DenseMatrix& J, Complex alpha, Complex beta) {
  if (!J.square()) throw NonSquare("rate_for_full_R: Jacobian must be square");
  if (3 * J.rows() > kMaxDenseSpectrumDim) {
    throw DimensionTooLarge("rate_for_full_R: 3d exceeds " + std::to_string(kMaxDenseSpectrumDim));
  }
  return spectral_radius(build_R(J, alpha, beta).R);
}

// ---------------------------------------------------------------------------
// Grid search over (alpha, |beta|, arg beta)
// ---------------------------------------------------------------------------

struct GridCell {
  double alpha = 0.0;
  double beta_mag = 0.0;
  double beta_arg = 0.0;
  /// Predicted spectral radius; NaN when not computed.
  double rho = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::size_t> steps;
  std::optional<std::size_t> grad_evals;
  bool converged = false;
  /// Set when the cell was simulated.
  std::optional<RunStatus> status;
  double measured_rate = std::numeric_limits<double>::quiet_NaN();
  /// Value minimised by the search; +inf for unusable cells.
  double objective = std::numeric_limits<double>::infinity();

  [[nodiscard]] Complex beta() const { return from_polar(beta_mag, beta_arg); }
};

struct GridSearchResult {
  /// Cells in grid order: alpha outermost, then |beta|, then arg beta.
  std::vector<GridCell> cells;
  std::size_t best_index = 0;

  [[nodiscard]] const GridCell& best() const { return cells.at(best_index); }
};

/// Strict ordering used to pick the best cell: objective, then smaller |beta|,
/// then smaller alpha, then smaller |arg beta|.
inline bool better_cell(const GridCell& x, const GridCell& y) {
  if (x.objective != y.objective) return x.objective < y.objective;
  if (x.beta_mag != y.beta_mag) return x.beta_mag < y.beta_mag;
  if (x.alpha != y.alpha) return x.alpha < y.alpha;
  return std::abs(x.beta_arg) < std::abs(y.beta_arg);
}

using CellEvaluator = std::function<void(GridCell&)>;

/// Evaluates every (alpha, |beta|, arg beta) cell; `evaluate` fills the metrics
/// and objective of the cell it is handed.
inline GridSearchResult grid_search(std::span<const double> alpha_grid,
                                    std::span<const double> mag_grid,
                                    std::span<const double> arg_grid,
                                    const CellEvaluator& evaluate, unsigned workers = 0) {
  if (alpha_grid.empty() || mag_grid.empty() || arg_grid.empty()) {
    throw EmptyGrid("grid_search: every grid needs at least one point");
  }
  GridSearchResult res;
  res.cells.reserve(alpha_grid.size() * mag_grid.size() * arg_grid.size());
  for (double a : alpha_grid)
    for (double m : mag_grid)
      for (double p : arg_grid) {
        GridCell c;
        c.alpha = a;
        c.beta_mag = m;
        c.beta_arg = p;
        res.cells.push_back(c);
      }
  parallel_for(res.cells.size(), [&](std::size_t i) { evaluate(res.cells[i]); }, workers);
  for (std::size_t i = 1; i < res.cells.size(); ++i) {
    if (better_cell(res.cells[i], res.cells[res.best_index])) res.best_index = i;
  }
  return res;
}

/// Grid search minimising the predicted spectral radius for a known spectrum.
inline GridSearchResult grid_search(std::span<const Complex> spectrum,
                                    std::span<const double> alpha_grid,
                                    std::span<const double> mag_grid,
                                    std::span<const double> arg_grid, unsigned workers = 0) {
  const ComplexVector spec(spectrum.begin(), spectrum.end());
  return grid_search(
      alpha_grid, mag_grid, arg_grid,
      [&spec](GridCell& c) {
        const RatePrediction p = convergence_rate(spec, Complex(c.alpha, 0.0), c.beta());
        c.rho = p.rho;
        c.converged = p.converges;
        c.objective = p.rho;
      },
      workers);
}

}  // namespace cmgame

#endif  // CMGAME_SPECTRAL_HPP
