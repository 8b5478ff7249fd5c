#include "polyfilter/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "polyfilter/errors.hpp"

namespace polyfilter {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) {
    throw ShapeError("matrix data length " + std::to_string(data.size()) + " does not match " +
                     std::to_string(r) + "x" + std::to_string(c));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  m.rows = rows.size();
  m.cols = m.rows ? rows.begin()->size() : 0;
  m.data.reserve(m.rows * m.cols);
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw ShapeError("ragged row in Matrix::from_rows");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_str() const {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

void matmul_rows_acc(const Matrix& a, const Matrix& b, std::size_t row0, Matrix& c) {
  if (row0 + a.cols > b.rows || c.rows != a.rows || c.cols != b.cols) {
    throw ShapeError("matmul_rows_acc: " + a.shape_str() + " x rows " + std::to_string(row0) + "+ of " +
                     b.shape_str() + " into " + c.shape_str());
  }
  const std::size_t m = b.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* crow = c.data.data() + i * m;
    const double* arow = a.data.data() + i * a.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + (row0 + k) * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
}

void matmul_tn_rows_acc(const Matrix& a, const Matrix& g, Matrix& c, std::size_t row0) {
  if (a.rows != g.rows || row0 + a.cols > c.rows || c.cols != g.cols) {
    throw ShapeError("matmul_tn_rows_acc: " + a.shape_str() + "^T x " + g.shape_str() + " into rows " +
                     std::to_string(row0) + "+ of " + c.shape_str());
  }
  const std::size_t m = g.cols;
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* arow = a.data.data() + r * a.cols;
    const double* grow = g.data.data() + r * m;
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double ari = arow[i];
      if (ari == 0.0) continue;
      double* crow = c.data.data() + (row0 + i) * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += ari * grow[j];
    }
  }
}

Matrix matmul_nt_rows(const Matrix& g, const Matrix& b, std::size_t row0, std::size_t width) {
  if (g.cols != b.cols || row0 + width > b.rows) {
    throw ShapeError("matmul_nt_rows: " + g.shape_str() + " x rows " + std::to_string(row0) + "+" +
                     std::to_string(width) + " of " + b.shape_str() + "^T");
  }
  // Transposing the slice keeps the inner loop contiguous; each entry still
  // accumulates over g's columns in ascending order.
  const std::size_t m = g.cols;
  Matrix bt(m, width);
  for (std::size_t k = 0; k < width; ++k)
    for (std::size_t j = 0; j < m; ++j) bt(j, k) = b(row0 + k, j);
  Matrix c(g.rows, width);
  for (std::size_t i = 0; i < g.rows; ++i) {
    double* crow = c.data.data() + i * width;
    const double* grow = g.data.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double gij = grow[j];
      const double* btrow = bt.data.data() + j * width;
      for (std::size_t k = 0; k < width; ++k) crow[k] += gij * btrow[k];
    }
  }
  return c;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: " + a.shape_str() + " x " + b.shape_str());
  Matrix c(a.rows, b.cols);
  matmul_rows_acc(a, b, 0, c);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw ShapeError("matmul_tn: " + a.shape_str() + "^T x " + b.shape_str());
  Matrix c(a.cols, b.cols);
  matmul_tn_rows_acc(a, b, c, 0);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw ShapeError("matmul_nt: " + a.shape_str() + " x " + b.shape_str() + "^T");
  return matmul_nt_rows(a, b, 0, b.rows);
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("frobenius_dot: " + a.shape_str() + " vs " + b.shape_str());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_diff: " + a.shape_str() + " vs " + b.shape_str());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data.begin(), a.data.end(), [](double v) { return std::isfinite(v); });
}

void axpy(Matrix& a, double scale, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("axpy: " + a.shape_str() + " vs " + b.shape_str());
  for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += scale * b.data[i];
}

}  // namespace polyfilter
