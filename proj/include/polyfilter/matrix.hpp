#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace polyfilter {

/// Dense row-major matrix of doubles. A 1x1 matrix doubles as a scalar.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Row-block kernels for products against a horizontal slice of b's rows, used
// to multiply by a column concatenation without building it.

/// c += a · b[row0 : row0 + a.cols, :]
void matmul_rows_acc(const Matrix& a, const Matrix& b, std::size_t row0, Matrix& c);
/// c[row0 : row0 + a.cols, :] += aᵀ · g
void matmul_tn_rows_acc(const Matrix& a, const Matrix& g, Matrix& c, std::size_t row0);
/// g · b[row0 : row0 + width, :]ᵀ
Matrix matmul_nt_rows(const Matrix& g, const Matrix& b, std::size_t row0, std::size_t width);

double frobenius_dot(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);

/// a += scale * b
void axpy(Matrix& a, double scale, const Matrix& b);

}  // namespace polyfilter
