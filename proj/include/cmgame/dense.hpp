#ifndef CMGAME_DENSE_HPP
#define CMGAME_DENSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cmgame/complex.hpp"
#include "cmgame/errors.hpp"

namespace cmgame {

/// Small dense row-major matrix. Holds game Jacobians and the augmented
/// dynamics matrix; not meant for large-scale linear algebra.
template <typename T>
class BasicDenseMatrix {
 public:
  using value_type = T;

  BasicDenseMatrix() = default;
  BasicDenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}
  BasicDenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
      throw DimensionMismatch("BasicDenseMatrix: entry count " + std::to_string(entries_.size()) +
                              " does not match " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
    }
  }
  /// Row-list literal, e.g. {{0, 1}, {-1, 0}}.
  BasicDenseMatrix(std::initializer_list<std::initializer_list<T>> rows_list)
      : rows_(rows_list.size()), cols_(rows_list.size() ? rows_list.begin()->size() : 0) {
    entries_.reserve(rows_ * cols_);
    for (const auto& row : rows_list) {
      if (row.size() != cols_) throw DimensionMismatch("BasicDenseMatrix: ragged row list");
      entries_.insert(entries_.end(), row.begin(), row.end());
    }
  }

  static BasicDenseMatrix identity(std::size_t n) {
    BasicDenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static BasicDenseMatrix diagonal(std::span<const T> diag) {
    BasicDenseMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool square() const { return rows_ == cols_; }
  [[nodiscard]] std::span<const T> entries() const { return entries_; }

  T& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  [[nodiscard]] BasicDenseMatrix transpose() const {
    BasicDenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  [[nodiscard]] std::vector<T> apply(std::span<const T> x) const {
    require_same_dim(x.size(), cols_, "BasicDenseMatrix::apply");
    std::vector<T> y(rows_, T{});
    for (std::size_t r = 0; r < rows_; ++r) {
      T acc{};
      for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
      y[r] = acc;
    }
    return y;
  }

  /// Copies `block` into this matrix with its top-left corner at (r0, c0).
  void set_block(std::size_t r0, std::size_t c0, const BasicDenseMatrix& block) {
    for (std::size_t r = 0; r < block.rows(); ++r)
      for (std::size_t c = 0; c < block.cols(); ++c) (*this)(r0 + r, c0 + c) = block(r, c);
  }

  friend BasicDenseMatrix operator*(const BasicDenseMatrix& a, const BasicDenseMatrix& b) {
    require_same_dim(b.rows_, a.cols_, "BasicDenseMatrix product");
    BasicDenseMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend BasicDenseMatrix operator*(T s, BasicDenseMatrix m) {
    for (auto& e : m.entries_) e *= s;
    return m;
  }
  friend BasicDenseMatrix operator*(BasicDenseMatrix m, T s) { return s * std::move(m); }

  friend BasicDenseMatrix operator+(BasicDenseMatrix a, const BasicDenseMatrix& b) {
    require_same_dim(b.entries_.size(), a.entries_.size(), "BasicDenseMatrix sum");
    for (std::size_t i = 0; i < a.entries_.size(); ++i) a.entries_[i] += b.entries_[i];
    return a;
  }

  friend BasicDenseMatrix operator-(BasicDenseMatrix a, const BasicDenseMatrix& b) {
    require_same_dim(b.entries_.size(), a.entries_.size(), "BasicDenseMatrix difference");
    for (std::size_t i = 0; i < a.entries_.size(); ++i) a.entries_[i] -= b.entries_[i];
    return a;
  }

  friend bool operator==(const BasicDenseMatrix&, const BasicDenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> entries_;
};

using DenseMatrix = BasicDenseMatrix<double>;
using ComplexDenseMatrix = BasicDenseMatrix<Complex>;

/// Largest dimension accepted by the dense eigenvalue routines.
inline constexpr std::size_t kMaxDenseSpectrumDim = 64;

namespace detail {

template <typename T>
void check_spectrum_input(const BasicDenseMatrix<T>& m) {
  if (!m.square()) {
    throw NonSquare("dense_spectrum: matrix is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  if (m.rows() > kMaxDenseSpectrumDim) {
    throw DimensionTooLarge("dense_spectrum: dimension " + std::to_string(m.rows()) +
                            " exceeds " + std::to_string(kMaxDenseSpectrumDim));
  }
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> to_eigen(const BasicDenseMatrix<T>& m) {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace detail

/// Eigenvalues of a small real square matrix (dimension <= 64).
inline ComplexVector dense_spectrum(const DenseMatrix& m) {
  detail::check_spectrum_input(m);
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(detail::to_eigen(m), /*computeEigenvectors=*/false);
  const auto& ev = solver.eigenvalues();
  return ComplexVector(ev.data(), ev.data() + ev.size());
}

/// Eigenvalues of a small complex square matrix (dimension <= 64).
inline ComplexVector dense_spectrum(const ComplexDenseMatrix& m) {
  detail::check_spectrum_input(m);
  if (m.rows() == 0) return {};
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(detail::to_eigen(m),
                                                     /*computeEigenvectors=*/false);
  const auto& ev = solver.eigenvalues();
  return ComplexVector(ev.data(), ev.data() + ev.size());
}

template <typename T>
double spectral_radius(const BasicDenseMatrix<T>& m) {
  double rho = 0.0;
  for (const Complex& lambda : dense_spectrum(m)) rho = std::max(rho, std::abs(lambda));
  return rho;
}

}  // namespace cmgame

#endif  // CMGAME_DENSE_HPP
