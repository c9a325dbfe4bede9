#ifndef CMGAME_CUBIC_HPP
#define CMGAME_CUBIC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cmgame/complex.hpp"
#include "cmgame/errors.hpp"

namespace cmgame {

/// c3*x^3 + c2*x^2 + c1*x + c0 with complex coefficients.
struct CubicPolynomial {
  Complex c3;
  Complex c2;
  Complex c1;
  Complex c0;

  [[nodiscard]] Complex operator()(Complex x) const { return ((c3 * x + c2) * x + c1) * x + c0; }

  [[nodiscard]] Complex derivative(Complex x) const { return (3.0 * c3 * x + 2.0 * c2) * x + c1; }

  [[nodiscard]] double max_coefficient_magnitude() const {
    return std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  }
};

namespace detail {

inline Complex principal_cbrt(Complex z) {
  if (z == Complex{}) return {};
  return std::polar(std::cbrt(std::abs(z)), std::arg(z) / 3.0);
}

// Single Newton step, kept only when it lowers the residual.
inline Complex polish_root(const CubicPolynomial& p, Complex x) {
  const Complex fx = p(x);
  const Complex dfx = p.derivative(x);
  if (fx == Complex{} || dfx == Complex{}) return x;
  const Complex y = x - fx / dfx;
  return std::abs(p(y)) < std::abs(fx) ? y : x;
}

}  // namespace detail

/// All three roots (with multiplicity) of a cubic.
///
/// Reduces to the depressed cubic t^3 + p t + q = 0 and applies Cardano's
/// formula using the principal cube root of whichever of the two candidate
/// radicands has the larger magnitude, then polishes each root with one
/// Newton step.
///
/// Throws DegenerateCubic when |c3| is below 1e-14 relative to the largest
/// coefficient.
inline std::array<Complex, 3> solve_cubic(const CubicPolynomial& poly) {
  const double scale = poly.max_coefficient_magnitude();
  if (scale == 0.0 || std::abs(poly.c3) < 1e-14 * scale) {
    throw DegenerateCubic("solve_cubic: leading coefficient is numerically zero");
  }
  const Complex a = poly.c2 / poly.c3;
  const Complex b = poly.c1 / poly.c3;
  const Complex c = poly.c0 / poly.c3;

  const Complex shift = -a / 3.0;
  const Complex p = b - a * a / 3.0;
  const Complex q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;

  const Complex disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  const Complex cand1 = -q / 2.0 + disc;
  const Complex cand2 = -q / 2.0 - disc;
  const Complex u = detail::principal_cbrt(std::abs(cand1) >= std::abs(cand2) ? cand1 : cand2);

  // Unit cube roots.
  const Complex w1{-0.5, std::numbers::sqrt3 / 2.0};
  const Complex w2 = std::conj(w1);

  std::array<Complex, 3> roots;
  if (u == Complex{}) {
    // Both radicands vanish, so p = q = 0: triple root at the shift.
    roots = {shift, shift, shift};
  } else {
    const Complex v = -p / (3.0 * u);
    roots = {u + v + shift, w1 * u + w2 * v + shift, w2 * u + w1 * v + shift};
  }
  for (auto& r : roots) r = detail::polish_root(poly, r);
  return roots;
}

}  // namespace cmgame

#endif  // CMGAME_CUBIC_HPP
