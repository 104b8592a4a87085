#include "riskann/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "riskann/error.hpp"

namespace riskann::linalg {

namespace {

std::string dims(const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ParameterError("matrix entries must be finite");
    }
  }
}

void require_square(const Matrix& a, const char* op) {
  if (a.rows() != a.cols() || a.empty()) {
    throw ShapeError(std::string(op) + ": expected a non-empty square matrix, got " + dims(a));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("matrix dimensions must be positive");
  }
  require_finite(std::span<const double>(&fill, 1));
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("matrix dimensions must be positive");
  }
  if (data_.size() != rows * cols) {
    std::ostringstream msg;
    msg << "matrix data has " << data_.size() << " entries, expected " << rows << "x" << cols;
    throw ShapeError(msg.str());
  }
  require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  if (rows_ == 0 || cols_ == 0) {
    throw ShapeError("matrix dimensions must be positive");
  }
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw ShapeError("ragged matrix initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    m(i, i) = diag[i];
  }
  require_finite(diag);
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      t(c, r) = (*this)(r, c);
    }
  }
  return t;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows() || a.empty() || b.empty()) {
    throw ShapeError("mat_mul: cannot multiply " + dims(a) + " by " + dims(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

Vector mat_vec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    std::ostringstream msg;
    msg << "mat_vec: cannot multiply " << dims(a) << " by vector of length " << x.size();
    throw ShapeError(msg.str());
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    out[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
  }
  return out;
}

Vector mat_t_vec(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    std::ostringstream msg;
    msg << "mat_t_vec: cannot multiply transpose of " << dims(a) << " by vector of length "
        << x.size();
    throw ShapeError(msg.str());
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out[j] += r[j] * x[i];
    }
  }
  return out;
}

bool is_symmetric(const Matrix& a, double tolerance) {
  if (a.rows() != a.cols()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > tolerance) {
        return false;
      }
    }
  }
  return true;
}

Vector solve_spd(const Matrix& a, std::span<const double> b) {
  require_square(a, "solve_spd");
  if (b.size() != a.rows()) {
    std::ostringstream msg;
    msg << "solve_spd: right-hand side has length " << b.size() << ", matrix is " << dims(a);
    throw ShapeError(msg.str());
  }
  if (!is_symmetric(a)) {
    throw SymmetryError("solve_spd: matrix is not symmetric");
  }

  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) {
      pivot -= l(j, k) * l(j, k);
    }
    if (!(pivot > 0.0)) {
      std::ostringstream msg;
      msg << "solve_spd: non-positive pivot " << pivot << " at column " << j;
      throw DefinitenessError(msg.str());
    }
    const double diag = std::sqrt(pivot);
    l(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) {
        sum -= l(i, k) * l(j, k);
      }
      l(i, j) = sum / diag;
    }
  }

  // L y = b, then L^T x = y.
  Vector x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double sum = x[i];
    for (std::size_t k = 0; k < i; ++k) {
      sum -= l(i, k) * x[k];
    }
    x[i] = sum / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double sum = x[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      sum -= l(k, i) * x[k];
    }
    x[i] = sum / l(i, i);
  }
  return x;
}

EigenDecomposition sym_eig(const Matrix& s) {
  require_square(s, "sym_eig");
  if (!is_symmetric(s)) {
    throw SymmetryError("sym_eig: matrix is not symmetric within 1e-10");
  }

  const std::size_t n = s.rows();
  Matrix a = s;
  Matrix v = Matrix::identity(n);

  double scale = 1.0;
  for (double x : s.data()) {
    scale = std::max(scale, std::abs(x));
  }
  const double tolerance = 1e-12 * scale;
  constexpr int kMaxSweeps = 100;

  auto max_off_diagonal = [&] {
    double m = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        m = std::max(m, std::abs(a(p, q)));
      }
    }
    return m;
  };

  for (int sweep = 0; sweep < kMaxSweeps && max_off_diagonal() >= tolerance; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) {
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) {
            continue;
          }
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - sn * akq;
          a(k, q) = a(q, k) = sn * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  constexpr double kSignTolerance = 1e-12;
  EigenDecomposition result{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    result.values[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(v(r, src)) > kSignTolerance) {
        sign = v(r, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      result.vectors(r, k) = sign * v(r, src);
    }
  }
  return result;
}

}  // namespace riskann::linalg
