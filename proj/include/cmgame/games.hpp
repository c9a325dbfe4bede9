#ifndef CMGAME_GAMES_HPP
#define CMGAME_GAMES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/SVD>

#include "cmgame/complex.hpp"
#include "cmgame/dense.hpp"
#include "cmgame/errors.hpp"

namespace cmgame {

/// Joint parameters omega = [theta_A, theta_B]; `split` is the number of
/// leading entries owned by player A.
struct JointParams {
  RealVector values;
  std::size_t split = 0;

  JointParams() = default;
  JointParams(RealVector v, std::size_t s) : values(std::move(v)), split(s) {
    if (split > values.size()) {
      throw DimensionMismatch("JointParams: split " + std::to_string(split) + " exceeds dimension " +
                              std::to_string(values.size()));
    }
  }

  [[nodiscard]] std::size_t dim() const { return values.size(); }
  [[nodiscard]] std::span<const double> player_a() const { return {values.data(), split}; }
  [[nodiscard]] std::span<const double> player_b() const {
    return {values.data() + split, values.size() - split};
  }
};

/// Writes the joint gradient at `omega` into `out` (same length).
using GradientFn = std::function<void(std::span<const double> omega, std::span<double> out)>;
using JacobianFn = std::function<DenseMatrix(std::span<const double> omega)>;

/// A differentiable two-player game seen through its joint-gradient field.
/// Both players descend on their block of the field.
struct GameSpec {
  std::string name;
  std::size_t dim = 0;
  std::size_t split = 0;
  GradientFn grad;
  JacobianFn jacobian;  // empty when unavailable
  std::optional<RealVector> fixed_point;
  std::optional<ComplexVector> analytic_spectrum;
  // Set for quadratic games, where grad(omega) == linear_map * omega.
  std::optional<DenseMatrix> linear_map;

  [[nodiscard]] bool has_jacobian() const { return static_cast<bool>(jacobian); }

  [[nodiscard]] RealVector gradient(std::span<const double> omega) const {
    require_same_dim(omega.size(), dim, "GameSpec::gradient");
    RealVector out(dim);
    grad(omega, out);
    return out;
  }
};

/// Central finite-difference Jacobian of the gradient oracle.
inline DenseMatrix finite_difference_jacobian(const GameSpec& game, std::span<const double> omega,
                                              double h = 1e-5) {
  require_same_dim(omega.size(), game.dim, "finite_difference_jacobian");
  const std::size_t d = game.dim;
  DenseMatrix jac(d, d);
  RealVector probe(omega.begin(), omega.end());
  RealVector plus(d), minus(d);
  for (std::size_t c = 0; c < d; ++c) {
    const double x0 = probe[c];
    probe[c] = x0 + h;
    game.grad(probe, plus);
    probe[c] = x0 - h;
    game.grad(probe, minus);
    probe[c] = x0;
    for (std::size_t r = 0; r < d; ++r) jac(r, c) = (plus[r] - minus[r]) / (2.0 * h);
  }
  return jac;
}

/// Game with linear joint gradient grad(omega) = J * omega and fixed point 0.
inline GameSpec quadratic_game(DenseMatrix J, std::size_t split, std::string name = "quadratic") {
  if (!J.square()) throw NonSquare("quadratic_game: Jacobian must be square");
  if (split > J.rows()) throw DimensionMismatch("quadratic_game: split exceeds dimension");
  GameSpec g;
  g.name = std::move(name);
  g.dim = J.rows();
  g.split = split;
  g.grad = [J](std::span<const double> w, std::span<double> out) {
    const std::size_t d = J.rows();
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += J(r, c) * w[c];
      out[r] = acc;
    }
  };
  g.jacobian = [J](std::span<const double>) { return J; };
  g.fixed_point = RealVector(g.dim, 0.0);
  g.linear_map = std::move(J);
  return g;
}

namespace detail {

// Logistic function without overflow for large |t|.
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

/// Dirac-GAN: min_x max_y -log(1 + exp(-x y)) - log 2.
///
/// The joint gradient is [df/dx, -df/dy] = [y s, -x s] with s = sigmoid(-x y).
/// At the origin the Jacobian is [[0, 1/2], [-1/2, 0]], with spectrum +-i/2.
inline GameSpec dirac_gan() {
  GameSpec g;
  g.name = "dirac";
  g.dim = 2;
  g.split = 1;
  g.grad = [](std::span<const double> w, std::span<double> out) {
    const double s = detail::sigmoid(-w[0] * w[1]);
    out[0] = w[1] * s;
    out[1] = -w[0] * s;
  };
  g.jacobian = [](std::span<const double> w) {
    const double x = w[0];
    const double y = w[1];
    const double s = detail::sigmoid(-x * y);
    const double ds = s * (1.0 - s);  // sigma'(-xy)
    return DenseMatrix{{-y * y * ds, s - x * y * ds}, {-s + x * y * ds, x * x * ds}};
  };
  g.fixed_point = RealVector{0.0, 0.0};
  g.analytic_spectrum = ComplexVector{{0.0, 0.5}, {0.0, -0.5}};
  return g;
}

/// Joint Jacobian of the bilinear zero-sum game min_x max_y x^T A y:
/// [[0, A], [-A^T, 0]].
inline DenseMatrix bilinear_jacobian(const DenseMatrix& A) {
  const std::size_t da = A.rows();
  const std::size_t db = A.cols();
  DenseMatrix J(da + db, da + db);
  J.set_block(0, da, A);
  J.set_block(da, 0, -1.0 * A.transpose());
  return J;
}

/// Bilinear zero-sum game min_x max_y x^T A y. The spectrum is {+-i sigma_k}
/// over the singular values of A, plus zeros for the unmatched dimensions.
inline GameSpec bilinear_game(const DenseMatrix& A) {
  const std::size_t da = A.rows();
  const std::size_t db = A.cols();
  GameSpec g = quadratic_game(bilinear_jacobian(A), da, "bilinear");

  ComplexVector spectrum;
  if (da > 0 && db > 0) {
    Eigen::MatrixXd ea(da, db);
    for (std::size_t r = 0; r < da; ++r)
      for (std::size_t c = 0; c < db; ++c) ea(r, c) = A(r, c);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(ea).singularValues();
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      spectrum.emplace_back(0.0, sv[k]);
      spectrum.emplace_back(0.0, -sv[k]);
    }
  }
  spectrum.resize(da + db, Complex{});  // zeros for the unmatched dimensions
  g.analytic_spectrum = std::move(spectrum);
  return g;
}

/// Game interpolating between cooperative and adversarial regimes:
///
///   min_x max_y  x^T (gamma A) y + x^T ((I - gamma) B1) x - y^T ((I - gamma) B2) y
///
/// All matrices are diagonal and passed as their diagonals. The quadratic terms
/// enter the joint Jacobian with unit weight, so coordinate j contributes the
/// block [[(1-g_j) b1_j, g_j a_j], [-g_j a_j, (1-g_j) b2_j]]; with a = b1 = b2
/// its eigenvalue pair has arg = +-atan(g_j / (1 - g_j)), which is 0, pi/4,
/// pi/2 at g_j = 0, 1/2, 1.
inline GameSpec interpolated_game(std::span<const double> a, std::span<const double> b1,
                                  std::span<const double> b2, std::span<const double> gamma) {
  const std::size_t n = a.size();
  if (b1.size() != n || b2.size() != n || gamma.size() != n) {
    throw DimensionMismatch("interpolated_game: diagonals must share length " + std::to_string(n));
  }
  DenseMatrix J(2 * n, 2 * n);
  ComplexVector spectrum;
  spectrum.reserve(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = (1.0 - gamma[j]) * b1[j];
    const double s = (1.0 - gamma[j]) * b2[j];
    const double q = gamma[j] * a[j];
    J(j, j) = p;
    J(j, n + j) = q;
    J(n + j, j) = -q;
    J(n + j, n + j) = s;
    // Eigenvalues of [[p, q], [-q, s]].
    const Complex mid = 0.5 * (p + s);
    const Complex root = std::sqrt(Complex(0.25 * (p - s) * (p - s) - q * q, 0.0));
    spectrum.push_back(mid + root);
    spectrum.push_back(mid - root);
  }
  GameSpec g = quadratic_game(std::move(J), n, "interp");
  RealVector p(n), q(n), s(n);
  for (std::size_t j = 0; j < n; ++j) {
    p[j] = (1.0 - gamma[j]) * b1[j];
    s[j] = (1.0 - gamma[j]) * b2[j];
    q[j] = gamma[j] * a[j];
  }
  g.grad = [p, q, s](std::span<const double> w, std::span<double> out) {
    const std::size_t m = p.size();
    for (std::size_t j = 0; j < m; ++j) {
      out[j] = p[j] * w[j] + q[j] * w[m + j];
      out[m + j] = s[j] * w[m + j] - q[j] * w[j];
    }
  };
  g.analytic_spectrum = std::move(spectrum);
  return g;
}

/// Spectrum of the joint-gradient Jacobian: the analytic spectrum when the
/// game carries one, otherwise eigenvalues of the Jacobian at `at` (analytic
/// if available, else central finite differences).
inline ComplexVector game_spectrum(const GameSpec& game, std::span<const double> at) {
  if (game.analytic_spectrum) return *game.analytic_spectrum;
  require_same_dim(at.size(), game.dim, "game_spectrum");
  if (game.has_jacobian()) return dense_spectrum(game.jacobian(at));
  if (game.dim > kMaxDenseSpectrumDim) {
    throw JacobianUnavailable("game_spectrum: no Jacobian and dimension too large for finite differences");
  }
  return dense_spectrum(finite_difference_jacobian(game, at));
}

/// n points evenly spaced over [lo, hi]; a single point sits at lo.
inline RealVector linspace(double lo, double hi, std::size_t n) {
  RealVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

/// Diagonal entries used by the cooperative/adversarial sweep.
inline constexpr double kInterpDiagLo = 0.25;
inline constexpr double kInterpDiagHi = 4.0;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// gamma_j ~ U[0, gamma_max], j = 1..n, from a seeded 64-bit Mersenne Twister.
/// The largest draw is then set to gamma_max so the most adversarial block
/// always reaches it (purely adversarial when gamma_max = 1).
inline RealVector sample_gammas(std::size_t n, double gamma_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RealVector g(n);
  for (auto& x : g) x = gamma_max * uniform_unit(rng);
  if (n > 0) *std::max_element(g.begin(), g.end()) = gamma_max;
  return g;
}

/// The sweep game: A = B1 = B2 diagonal, linearly spaced in [1/4, 4], with
/// seeded random interpolation weights.
inline GameSpec interpolated_preset(std::size_t n, double gamma_max, std::uint64_t seed) {
  const RealVector diag = linspace(kInterpDiagLo, kInterpDiagHi, n);
  const RealVector gamma = sample_gammas(n, gamma_max, seed);
  return interpolated_game(diag, diag, diag, gamma);
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view s, char sep = ':') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::string_view context) {
  try {
    std::size_t used = 0;
    const std::string s(field);
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
      value = static_cast<T>(std::stod(s, &used));
    } else {
      value = static_cast<T>(std::stoull(s, &used));
    }
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw UnknownPreset("cannot parse '" + std::string(field) + "' in preset '" +
                        std::string(context) + "'");
  }
}

}  // namespace detail

/// Resolves `dirac`, `bilinear:<n>` (A = I_n) or `interp:<n>:<gamma_max>:<seed>`.
inline GameSpec game_preset(std::string_view spec) {
  const auto f = detail::split_fields(spec);
  if (f[0] == "dirac" && f.size() == 1) return dirac_gan();
  if (f[0] == "bilinear" && f.size() == 2) {
    const auto n = detail::parse_number<std::size_t>(f[1], spec);
    if (n == 0) throw UnknownPreset("bilinear preset needs n >= 1");
    GameSpec g = bilinear_game(DenseMatrix::identity(n));
    g.name = std::string(spec);
    return g;
  }
  if (f[0] == "interp" && f.size() == 4) {
    const auto n = detail::parse_number<std::size_t>(f[1], spec);
    const auto gmax = detail::parse_number<double>(f[2], spec);
    const auto seed = detail::parse_number<std::uint64_t>(f[3], spec);
    if (n == 0 || gmax < 0.0 || gmax > 1.0) {
      throw UnknownPreset("interp preset needs n >= 1 and gamma_max in [0, 1]");
    }
    GameSpec g = interpolated_preset(n, gmax, seed);
    g.name = std::string(spec);
    return g;
  }
  throw UnknownPreset("unknown game preset '" + std::string(spec) + "'");
}

}  // namespace cmgame

#endif  // CMGAME_GAMES_HPP
