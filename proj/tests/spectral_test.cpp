#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cmgame/optimizers.hpp"
#include "cmgame/spectral.hpp"
#include "oracles.hpp"

namespace cmgame {
namespace {

using std::numbers::pi;

std::array<Complex, 3> roots_of(const CubicPolynomial& p) { return solve_cubic(p); }

double root_set_distance(const std::array<Complex, 3>& a, const ComplexVector& b) {
  return oracle::multiset_distance(ComplexVector(a.begin(), a.end()), b);
}

double root_set_distance(const std::array<Complex, 3>& a, const std::array<Complex, 3>& b) {
  return root_set_distance(a, ComplexVector(b.begin(), b.end()));
}

struct RandomCase {
  Complex lambda, alpha, beta;
};

RandomCase random_case(std::mt19937_64& rng, bool complex_alpha) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Complex lambda = from_polar(0.05 + 3.0 * u(rng), (2 * u(rng) - 1) * pi);
  const Complex alpha(0.01 + u(rng), complex_alpha ? 0.3 * (2 * u(rng) - 1) : 0.0);
  const Complex beta = from_polar(u(rng), (2 * u(rng) - 1) * pi);
  return {lambda, alpha, beta};
}

TEST(BuildR, ScalarExample) {
  const AugmentedJacobian R = build_R(DenseMatrix{{0.0}}, 1.0, 0.5);
  EXPECT_EQ(R.R, (DenseMatrix{{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.5, 0.0, 1.0}}));
  EXPECT_NEAR(rate_for_full_R(DenseMatrix{{0.0}}, 1.0, 0.5), 1.0, 1e-12);
}

TEST(BuildR, BlockLayout) {
  const DenseMatrix J{{1.0, 2.0}, {3.0, 4.0}};
  const Complex alpha(0.3, 0.1), beta(0.4, 0.7);
  const DenseMatrix& R = build_R(J, alpha, beta).R;
  const Complex ab = alpha * beta;
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(R(i, i), 0.4);
    EXPECT_EQ(R(i, 2 + i), -0.7);
    EXPECT_EQ(R(2 + i, i), 0.7);
    EXPECT_EQ(R(2 + i, 2 + i), 0.4);
    EXPECT_DOUBLE_EQ(R(4 + i, i), ab.real());
    EXPECT_DOUBLE_EQ(R(4 + i, 2 + i), -ab.imag());
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(R(i, 4 + j), -J(i, j));
      EXPECT_EQ(R(2 + i, 4 + j), 0.0);
      EXPECT_DOUBLE_EQ(R(4 + i, 4 + j), (i == j ? 1.0 : 0.0) - 0.3 * J(i, j));
    }
  }
  EXPECT_THROW(build_R(DenseMatrix(2, 3), 0.1, 0.1), NonSquare);
}

TEST(BuildR, SimulationEqualsMatrixPowers) {
  std::mt19937_64 rng(31);
  const DenseMatrix J = oracle::random_matrix(3, 3, rng);
  const GameSpec g = quadratic_game(J, 1);
  for (const CMConfig cfg : {CMConfig{Complex(0.1), from_polar(0.8, 0.4)},
                             CMConfig{Complex(0.05, 0.03), from_polar(0.6, -2.0)}}) {
    const DenseMatrix R = build_R(J, cfg.alpha, cfg.beta).R;
    CMState s(JointParams({0.3, -0.2, 0.5}, 1));
    RealVector z = AugmentedJacobian::stack(s.mu, s.omega.values);
    double worst = 0;
    for (int j = 0; j < 100; ++j) {
      s = step_sim_cm(std::move(s), cfg, g);
      z = R.apply(z);
      const RealVector sim = AugmentedJacobian::stack(s.mu, s.omega.values);
      for (std::size_t i = 0; i < z.size(); ++i)
        worst = std::max(worst, std::abs(sim[i] - z[i]) / std::max(1.0, std::abs(z[i])));
    }
    EXPECT_LE(worst, 1e-10);
  }
}

TEST(BuildR, ZeroMomentumContainsGradientDescentSpectrum) {
  std::mt19937_64 rng(32);
  const DenseMatrix J = oracle::random_matrix(3, 3, rng);
  const ComplexVector full = dense_spectrum(build_R(J, 0.2, 0.0).R);
  for (const Complex& l : dense_spectrum(J)) {
    const Complex target = 1.0 - 0.2 * l;
    double best = 1e9;
    for (const Complex& m : full) best = std::min(best, std::abs(m - target));
    EXPECT_LT(best, 1e-8);
  }
}

TEST(CharPoly, RootsMatchDenseBlock) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 200; ++t) {
    const RandomCase c = random_case(rng, t % 2 == 1);
    const auto roots = roots_of(char_poly(c.lambda, c.alpha, c.beta));
    const ComplexVector dense = dense_spectrum(build_R_block(c.lambda, c.alpha, c.beta));
    EXPECT_LT(root_set_distance(roots, dense), 1e-8) << "case " << t;
  }
}

TEST(CharPoly, AgreesWithFaddeevLeVerrier) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 50; ++t) {
    const RandomCase c = random_case(rng, true);
    const ComplexDenseMatrix Rk = build_R_block(c.lambda, c.alpha, c.beta);
    const std::vector<Complex> coeffs = oracle::char_poly_coefficients(Rk);  // det(xI - Rk), monic
    const CubicPolynomial p = char_poly(c.lambda, c.alpha, c.beta);
    // det(Rk - xI) = -det(xI - Rk) for a 3x3 block.
    EXPECT_LT(std::abs(p.c3 + coeffs[0]), 1e-12);
    EXPECT_LT(std::abs(p.c2 + coeffs[1]), 1e-12);
    EXPECT_LT(std::abs(p.c1 + coeffs[2]), 1e-12);
    EXPECT_LT(std::abs(p.c0 + coeffs[3]), 1e-12);
  }
}

TEST(CharPoly, ConjugateEigenvaluesShareRootMagnitude) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 200; ++t) {
    const RandomCase c = random_case(rng, false);
    const double m1 = max_root_magnitude(roots_of(char_poly(c.lambda, c.alpha, c.beta)));
    const double m2 = max_root_magnitude(roots_of(char_poly(std::conj(c.lambda), c.alpha, c.beta)));
    EXPECT_NEAR(m1, m2, 1e-10);
  }
}

TEST(CharPoly, SimplifiedFormsAgree) {
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const RandomCase c = random_case(rng, true);
    const double uu = c.lambda.imag();
    EXPECT_LT(root_set_distance(roots_of(char_poly_imaginary(uu, c.alpha, c.beta)),
                                roots_of(char_poly(Complex(0.0, uu), c.alpha, c.beta))),
              1e-10);
    const double step = c.alpha.real();
    EXPECT_LT(root_set_distance(roots_of(char_poly_imaginary_real_step(uu, step, c.beta)),
                                roots_of(char_poly(Complex(0.0, uu), step, c.beta))),
              1e-10);
    // The proportional-step forms take lambda = i |lambda|.
    const double up = std::abs(uu);
    const double ap = 2.0 * u(rng);
    EXPECT_LT(root_set_distance(roots_of(char_poly_proportional_step(ap, c.beta)),
                                roots_of(char_poly(Complex(0.0, up), ap / up, c.beta))),
              1e-10);
    const double mag = std::abs(c.beta);
    EXPECT_LT(root_set_distance(roots_of(char_poly_proportional_step_imaginary_beta(ap, mag)),
                                roots_of(char_poly(Complex(0.0, up), ap / up, Complex(0.0, mag)))),
              1e-10);
  }
}

TEST(CharPoly, ProportionalStepIsScaleFree) {
  const Complex beta = from_polar(0.986, pi - pi / 16);
  const double ref = max_root_magnitude(roots_of(char_poly(Complex(0, 1), 0.75, beta)));
  for (double c : {0.1, 1.0, 10.0}) {
    EXPECT_NEAR(max_root_magnitude(roots_of(char_poly(Complex(0, c), 0.75 / c, beta))), ref, 1e-12);
    EXPECT_NEAR(max_root_magnitude(roots_of(char_poly(Complex(0, -c), 0.75 / c, beta))), ref, 1e-12);
  }
}

TEST(CharPoly, CorollarySelections) {
  const double m1 =
      max_root_magnitude(roots_of(char_poly(Complex(0, 1), 0.75, from_polar(0.986, pi - pi / 16))));
  const double m2 = max_root_magnitude(roots_of(char_poly(Complex(0, 1), 0.025, from_polar(0.9, pi / 16))));
  EXPECT_NEAR(m1, 0.9998, 5e-5);
  EXPECT_NEAR(m2, 0.973, 5e-4);
  EXPECT_LT(m1, 1.0);
  EXPECT_LT(m2, 1.0);
}

TEST(ConvergenceRate, CooperativeGradientDescent) {
  const ComplexVector spec{1.0};
  const RatePrediction p = convergence_rate(spec, 1.0, 0.0);
  EXPECT_LT(p.rho, 1e-12);
  EXPECT_TRUE(p.converges);
  ASSERT_EQ(p.per_eigenvalue_roots.size(), 1u);
}

TEST(ConvergenceRate, RhoIsLargestStoredRoot) {
  const ComplexVector spec{Complex(0.3, 1.0), Complex(0.3, -1.0), Complex(2.0, 0.0)};
  const RatePrediction p = convergence_rate(spec, 0.2, from_polar(0.5, 0.7));
  double m = 0;
  for (const auto& [l, roots] : p.per_eigenvalue_roots) m = std::max(m, max_root_magnitude(roots));
  EXPECT_EQ(p.rho, m);
}

TEST(ConvergenceRate, RealMomentumCannotSolveBilinearGames) {
  const ComplexVector spec{Complex(0, 1), Complex(0, -1)};
  double worst = 1e9;
  for (int i = 1; i <= 50; ++i) {
    for (int k = 0; k < 50; ++k) {
      const double alpha = 2.0 * i / 50.0;
      const double beta = k / 50.0;
      const RatePrediction p = convergence_rate(spec, alpha, beta);
      worst = std::min(worst, p.rho);
      EXPECT_FALSE(p.converges) << alpha << " " << beta;
    }
  }
  EXPECT_GE(worst, 1.0 - 1e-12);
}

TEST(ConvergenceRate, CorollaryHoldsAcrossScales) {
  struct Selection {
    double alpha_prime, mag, arg;
  };
  for (const Selection s : {Selection{0.75, 0.986, pi - pi / 16}, Selection{0.025, 0.9, pi / 16}}) {
    for (double c : {0.1, 1.0, 10.0}) {
      const ComplexVector spec{Complex(0, c), Complex(0, -c)};
      EXPECT_TRUE(convergence_rate(spec, s.alpha_prime / c, from_polar(s.mag, s.arg)).converges);
    }
  }
}

TEST(ConvergenceRate, DiracPredictionIsContractive) {
  const RatePrediction p = convergence_rate(*dirac_gan().analytic_spectrum, 0.1, from_polar(0.9, pi / 8));
  EXPECT_TRUE(p.converges);
  EXPECT_NEAR(p.rho, 0.98569, 1e-4);
}

TEST(FullR, AgreesWithCubicPath) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const DenseMatrix M = oracle::random_matrix(4, 4, rng);
    const DenseMatrix A = M - M.transpose();
    const Complex alpha = 0.05 + 0.5 * u(rng);
    const Complex beta = from_polar(u(rng), (2 * u(rng) - 1) * pi);
    const double cubic = convergence_rate(dense_spectrum(A), alpha, beta).rho;
    EXPECT_NEAR(rate_for_full_R(A, alpha, beta), cubic, 1e-8);
  }
}

TEST(FullR, DiagonalizableGames) {
  std::mt19937_64 rng(38);
  for (int t = 0; t < 5; ++t) {
    const GameSpec g = bilinear_game(oracle::random_matrix(3, 2, rng));
    const DenseMatrix J = g.jacobian(RealVector(5, 0.0));
    const Complex beta = from_polar(0.7, 1.2);
    EXPECT_NEAR(rate_for_full_R(J, 0.2, beta), convergence_rate(*g.analytic_spectrum, 0.2, beta).rho, 1e-8);
  }
}

TEST(FullR, BilinearRealMomentumDiverges) {
  EXPECT_GT(rate_for_full_R(bilinear_jacobian(DenseMatrix{{1.0}}), 0.1, 0.9), 1.0);
}

TEST(FullR, RejectsLargeMatrices) {
  EXPECT_THROW(rate_for_full_R(DenseMatrix::identity(22), 0.1, 0.1), DimensionTooLarge);
  EXPECT_NO_THROW(rate_for_full_R(DenseMatrix::identity(21), 0.1, 0.1));
}

TEST(GridSearch, DiracBestMomentumIsAlmostPositive) {
  const RealVector alphas{0.1};
  const RealVector mags = linspace(0.0, 0.99, 100);
  const RealVector args = linspace(0.0, pi, 100);
  const GridSearchResult res = grid_search(*dirac_gan().analytic_spectrum, alphas, mags, args);
  EXPECT_EQ(res.cells.size(), 10000u);
  EXPECT_GT(res.best().beta_arg, 0.0);
  EXPECT_LT(res.best().beta_arg, pi / 4);
  EXPECT_TRUE(res.best().converged);
  for (const GridCell& c : res.cells) EXPECT_GE(c.rho, res.best().rho);
}

TEST(GridSearch, CooperativeSpectrumPrefersRealMomentum) {
  const ComplexVector spec{1.0, 0.5, 0.1};
  const RealVector alphas = linspace(0.1, 2.0, 20);
  const RealVector mags = linspace(0.0, 0.95, 20);
  const RealVector args = linspace(0.0, pi, 17);
  const GridSearchResult res = grid_search(spec, alphas, mags, args);
  EXPECT_EQ(res.best().beta_arg, 0.0);
  EXPECT_GT(res.best().beta_mag, 0.0);
}

TEST(GridSearch, SingleCell) {
  const RealVector one{0.3};
  const RealVector arg{0.2};
  const GridSearchResult res = grid_search(ComplexVector{Complex(0, 1)}, one, one, arg);
  ASSERT_EQ(res.cells.size(), 1u);
  EXPECT_EQ(res.best_index, 0u);
  EXPECT_EQ(res.best().alpha, 0.3);
}

TEST(GridSearch, OrderAndTieBreaking) {
  const RealVector alphas{0.2, 0.1};
  const RealVector mags{0.5, 0.3};
  const RealVector args{-0.4, 0.4, 0.1};
  const GridSearchResult res =
      grid_search(alphas, mags, args, [](GridCell& c) { c.objective = 1.0; }, 3);
  ASSERT_EQ(res.cells.size(), 12u);
  EXPECT_EQ(res.cells[0].alpha, 0.2);
  EXPECT_EQ(res.cells[0].beta_mag, 0.5);
  EXPECT_EQ(res.cells[1].beta_arg, 0.4);
  EXPECT_EQ(res.cells[3].beta_mag, 0.3);
  EXPECT_EQ(res.cells[6].alpha, 0.1);
  EXPECT_EQ(res.best().alpha, 0.1);
  EXPECT_EQ(res.best().beta_mag, 0.3);
  EXPECT_EQ(res.best().beta_arg, 0.1);
}

TEST(GridSearch, UnusableCellsNeverWin) {
  const RealVector alphas{0.1, 0.2};
  const RealVector mags{0.5};
  const RealVector args{0.0};
  const GridSearchResult res = grid_search(alphas, mags, args, [](GridCell& c) {
    if (c.alpha > 0.15) c.objective = 7.0;
  });
  EXPECT_EQ(res.best().alpha, 0.2);
}

TEST(GridSearch, EmptyGridThrows) {
  const RealVector none;
  const RealVector one{0.1};
  EXPECT_THROW(grid_search(ComplexVector{1.0}, none, one, one), EmptyGrid);
}

TEST(GridSearch, DeterministicAcrossWorkerCounts) {
  const RealVector alphas = linspace(0.05, 0.5, 7);
  const RealVector mags = linspace(0.0, 0.95, 9);
  const RealVector args = linspace(-pi, pi, 11);
  const ComplexVector spec{Complex(0.2, 1.0), Complex(0.2, -1.0)};
  const GridSearchResult a = grid_search(spec, alphas, mags, args, 1);
  const GridSearchResult b = grid_search(spec, alphas, mags, args, 4);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  EXPECT_EQ(a.best_index, b.best_index);
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].rho, b.cells[i].rho);
}

}  // namespace
}  // namespace cmgame
