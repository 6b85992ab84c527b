#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace scenematch {

/// Dense row-major binary64 matrix. Vectors are 1xd or dx1 matrices.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init);

  static Matrix zeros(int r, int c) { return Matrix(r, c); }
  static Matrix filled(int r, int c, double x);
  static Matrix ones(int r, int c) { return filled(r, c, 1.0); }
  static Matrix identity(int n);
  static Matrix row_vector(const std::vector<double>& x);
  static Matrix scalar(double x);

  double& at(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }
  double* row(int i) { return v.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return v.data() + static_cast<size_t>(i) * cols; }

  size_t size() const { return v.size(); }
  bool empty() const { return rows == 0 || cols == 0; }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool bit_equal(const Matrix& o) const;
  std::string shape_str() const;
};

// Eager kernels. The tape runs the same functions, so a replayed tape is
// bit-identical to the recorded pass.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
Matrix add_const(const Matrix& a, double c);
Matrix add_rowvec(const Matrix& a, const Matrix& row);
Matrix leaky_relu(const Matrix& a, double slope);
Matrix elu(const Matrix& a);
Matrix relu(const Matrix& a);
Matrix row_softmax(const Matrix& a);
// Softmax per row restricted to entries where mask != 0; other entries are 0.
Matrix masked_row_softmax(const Matrix& a, const Matrix& mask);
Matrix hconcat(const Matrix& a, const Matrix& b);
Matrix vconcat(const Matrix& a, const Matrix& b);
Matrix row_slice(const Matrix& a, int first, int count);
Matrix col_slice(const Matrix& a, int first, int count);
Matrix mean_rows(const Matrix& a);   // r x c -> 1 x c column means
Matrix sum_all(const Matrix& a);     // -> 1 x 1
Matrix repeat_rows(const Matrix& a, int count);  // 1 x c -> count x c
// (1/r) * sum_i cos(a_i, b_i) over paired rows -> 1 x 1. Zero-norm row throws.
Matrix mean_row_cosine(const Matrix& a, const Matrix& b);
double cosine(const Matrix& a, const Matrix& b);  // single-row convenience

// exp(alpha)/(exp(alpha)+exp(beta)) and its complement. The two results are
// constructed so that first + second == 1.0 holds exactly in binary64.
std::pair<double, double> two_way_softmax(double alpha, double beta);

double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
void check_finite(const Matrix& a, const char* where);

constexpr double kLeakySlope = 0.2;

}  // namespace scenematch
