#ifndef CMGAME_COMPLEX_HPP
#define CMGAME_COMPLEX_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace cmgame {

/// Cartesian complex scalar. Used for the momentum coefficient, complex step
/// sizes, buffer entries and spectra.
using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

inline double magnitude(Complex z) { return std::abs(z); }

/// Principal argument in (-pi, pi].
inline double phase(Complex z) {
  const double a = std::arg(z);
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

inline Complex from_polar(double mag, double arg) { return std::polar(mag, arg); }

/// Textbook product (ac - bd) + i(ad + bc). Skips the inf/nan recovery of
/// operator*, which otherwise compiles to a library call in hot loops.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// Product via the polar representation: magnitudes multiply, phases add.
inline Complex polar_product(Complex a, Complex b) {
  return from_polar(magnitude(a) * magnitude(b), phase(a) + phase(b));
}

}  // namespace cmgame

#endif  // CMGAME_COMPLEX_HPP
