#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cmgame/complex.hpp"
#include "cmgame/cubic.hpp"
#include "cmgame/dense.hpp"
#include "oracles.hpp"

namespace cmgame {
namespace {

using std::numbers::pi;

TEST(ComplexScalar, PhaseIsInHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(phase(Complex(-1.0, 0.0)), pi);
  EXPECT_DOUBLE_EQ(phase(Complex(-1.0, -0.0)), pi);
  EXPECT_DOUBLE_EQ(phase(Complex(0.0, -1.0)), -pi / 2);
  EXPECT_DOUBLE_EQ(magnitude(Complex(3.0, 4.0)), 5.0);
}

TEST(ComplexScalar, PolarRoundTripAndProductAgree) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Complex z1 = oracle::random_complex(rng, 3.0);
    const Complex z2 = oracle::random_complex(rng, 3.0);
    const Complex back = from_polar(magnitude(z1), phase(z1));
    EXPECT_LE(std::abs(back - z1), 1e-12 * std::max(1.0, std::abs(z1)));
    const Complex cart = z1 * z2;
    EXPECT_LE(std::abs(polar_product(z1, z2) - cart), 1e-12 * std::max(1.0, std::abs(cart)));
  }
}

TEST(SolveCubic, CubeRootsOfUnity) {
  const auto roots = solve_cubic({1.0, 0.0, 0.0, -1.0});
  const ComplexVector expected{1.0, Complex(-0.5, std::sqrt(3.0) / 2), Complex(-0.5, -std::sqrt(3.0) / 2)};
  EXPECT_LT(oracle::multiset_distance({roots.begin(), roots.end()}, expected), 1e-12);
}

TEST(SolveCubic, TripleRootAtZero) {
  const auto roots = solve_cubic({1.0, 0.0, 0.0, 0.0});
  for (const Complex& r : roots) EXPECT_EQ(r, Complex{});
}

TEST(SolveCubic, ShiftedTripleRoot) {
  // (x - 2)^3
  const auto roots = solve_cubic({1.0, -6.0, 12.0, -8.0});
  for (const Complex& r : roots) EXPECT_LT(std::abs(r - 2.0), 1e-5);
}

TEST(SolveCubic, RejectsDegenerateLeadingCoefficient) {
  EXPECT_THROW(solve_cubic({1e-16, 1.0, 2.0, 3.0}), DegenerateCubic);
  EXPECT_THROW(solve_cubic({0.0, 0.0, 0.0, 0.0}), DegenerateCubic);
  EXPECT_NO_THROW(solve_cubic({1e-10, 1.0, 2.0, 3.0}));
}

TEST(SolveCubic, RandomComplexCubicsHaveSmallResiduals) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 100; ++i) {
    CubicPolynomial p{oracle::random_complex(rng, 2.0), oracle::random_complex(rng, 2.0),
                      oracle::random_complex(rng, 2.0), oracle::random_complex(rng, 2.0)};
    const double bound = 1e-9 * std::max(1.0, p.max_coefficient_magnitude());
    for (const Complex& x : solve_cubic(p)) EXPECT_LE(std::abs(p(x)), bound) << "cubic " << i;
  }
}

TEST(SolveCubic, RootsMatchDurandKernerOracle) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 50; ++i) {
    CubicPolynomial p{oracle::random_complex(rng), oracle::random_complex(rng),
                      oracle::random_complex(rng), oracle::random_complex(rng)};
    const auto roots = solve_cubic(p);
    const auto ref = oracle::polynomial_roots({p.c3, p.c2, p.c1, p.c0});
    EXPECT_LT(oracle::multiset_distance({roots.begin(), roots.end()}, ref), 1e-8);
  }
}

TEST(SolveCubic, RealCoefficientsGiveConjugateClosedRoots) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const auto roots = solve_cubic({u(rng), u(rng), u(rng), u(rng)});
    ComplexVector conj;
    for (const Complex& r : roots) conj.push_back(std::conj(r));
    EXPECT_LT(oracle::multiset_distance({roots.begin(), roots.end()}, conj), 1e-9);
  }
}

TEST(DenseSpectrum, RotationGenerator) {
  const auto ev = dense_spectrum(DenseMatrix{{0.0, 1.0}, {-1.0, 0.0}});
  EXPECT_LT(oracle::multiset_distance(ev, {Complex(0, 1), Complex(0, -1)}), 1e-12);
  EXPECT_NEAR(spectral_radius(DenseMatrix{{0.0, 1.0}, {-1.0, 0.0}}), 1.0, 1e-12);
}

TEST(DenseSpectrum, Identity) {
  const auto ev = dense_spectrum(DenseMatrix::identity(3));
  ASSERT_EQ(ev.size(), 3u);
  for (const Complex& l : ev) EXPECT_LT(std::abs(l - 1.0), 1e-12);
  EXPECT_NEAR(spectral_radius(0.5 * DenseMatrix::identity(4)), 0.5, 1e-12);
}

TEST(DenseSpectrum, Random6x6MatchesExpandedCharacteristicPolynomial) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix m = oracle::random_matrix(6, 6, rng);
    const auto ev = dense_spectrum(m);
    const auto ref = oracle::polynomial_roots(oracle::char_poly_coefficients(m));
    EXPECT_LT(oracle::multiset_distance(ev, ref), 1e-6);
    double rho = 0;
    for (const Complex& l : ev) rho = std::max(rho, std::abs(l));
    EXPECT_NEAR(spectral_radius(m), rho, 1e-10);
  }
}

TEST(DenseSpectrum, EigenvaluesAnnihilateCharacteristicPolynomial) {
  std::mt19937_64 rng(6);
  const DenseMatrix m = oracle::random_matrix(8, 8, rng);
  const auto coeff = oracle::char_poly_coefficients(m);
  for (const Complex& l : dense_spectrum(m)) EXPECT_LT(std::abs(oracle::horner(coeff, l)), 1e-7);
}

TEST(DenseSpectrum, ComplexMatrix) {
  // Upper triangular: eigenvalues on the diagonal.
  const ComplexDenseMatrix m{{Complex(1, 2), 3.0}, {0.0, Complex(-1, 0.5)}};
  EXPECT_LT(oracle::multiset_distance(dense_spectrum(m), {Complex(1, 2), Complex(-1, 0.5)}), 1e-12);
}

TEST(DenseSpectrum, Errors) {
  EXPECT_THROW(dense_spectrum(DenseMatrix(2, 3)), NonSquare);
  EXPECT_THROW(spectral_radius(DenseMatrix(2, 3)), NonSquare);
  EXPECT_THROW(dense_spectrum(DenseMatrix(65, 65)), DimensionTooLarge);
  EXPECT_THROW(DenseMatrix(2, 2, std::vector<double>{1.0}), DimensionMismatch);
}

}  // namespace
}  // namespace cmgame
