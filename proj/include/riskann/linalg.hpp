#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace riskann::linalg {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
///
/// Constructors reject zero dimensions and non-finite entries. A
/// default-constructed Matrix is empty (0 x 0) and exists only so the type
/// can live in containers.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix mat_mul(const Matrix& a, const Matrix& b);

/// a * x for a column vector x.
Vector mat_vec(const Matrix& a, std::span<const double> x);

/// a^T * x without materializing the transpose.
Vector mat_t_vec(const Matrix& a, std::span<const double> x);

bool is_symmetric(const Matrix& a, double tolerance = 1e-10);

/// Solves a * x = b for symmetric positive definite a by Cholesky
/// factorization. Throws DefinitenessError on a non-positive pivot.
Vector solve_spd(const Matrix& a, std::span<const double> b);

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // column k pairs with values[k]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues are sorted descending with ties kept in diagonal-position
/// order. Each eigenvector is oriented so its first nonzero component is
/// positive.
EigenDecomposition sym_eig(const Matrix& s);

}  // namespace riskann::linalg
