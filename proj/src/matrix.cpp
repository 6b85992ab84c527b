#include "scenematch/matrix.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "scenematch/errors.hpp"

namespace scenematch {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.shape_str() << " vs " << b.shape_str();
    throw DimensionError(os.str());
  }
}

void require_nonempty(const Matrix& a, const char* op) {
  if (a.empty()) {
    std::ostringstream os;
    os << op << ": empty matrix " << a.shape_str();
    throw DimensionError(os.str());
  }
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
  rows = static_cast<int>(init.size());
  cols = rows == 0 ? 0 : static_cast<int>(init.begin()->size());
  v.reserve(static_cast<size_t>(rows) * cols);
  for (const auto& r : init) {
    if (static_cast<int>(r.size()) != cols) {
      throw DimensionError("Matrix init: ragged rows");
    }
    v.insert(v.end(), r.begin(), r.end());
  }
}

Matrix Matrix::filled(int r, int c, double x) {
  Matrix m(r, c);
  std::fill(m.v.begin(), m.v.end(), x);
  return m;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::row_vector(const std::vector<double>& x) {
  Matrix m(1, static_cast<int>(x.size()));
  m.v = x;
  return m;
}

Matrix Matrix::scalar(double x) {
  Matrix m(1, 1);
  m.v[0] = x;
  return m;
}

bool Matrix::bit_equal(const Matrix& o) const {
  if (!same_shape(o)) return false;
  return std::memcmp(v.data(), o.v.data(), v.size() * sizeof(double)) == 0;
}

std::string Matrix::shape_str() const {
  std::ostringstream os;
  os << "(" << rows << "x" << cols << ")";
  return os.str();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    std::ostringstream os;
    os << "matmul: inner dimensions differ: " << a.shape_str() << " * " << b.shape_str();
    throw DimensionError(os.str());
  }
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = a.v[i] + b.v[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = a.v[i] - b.v[i];
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

Matrix scale(const Matrix& a, double c) {
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = a.v[i] * c;
  return out;
}

Matrix add_const(const Matrix& a, double c) {
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = a.v[i] + c;
  return out;
}

Matrix add_rowvec(const Matrix& a, const Matrix& row) {
  if (row.rows != 1 || row.cols != a.cols) {
    throw DimensionError("add_rowvec: row " + row.shape_str() + " does not match " +
                         a.shape_str());
  }
  Matrix out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(i, j) = a.at(i, j) + row.v[j];
  return out;
}

Matrix leaky_relu(const Matrix& a, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw ContractError("leaky_relu: slope must be in (0,1)");
  }
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = a.v[i];
    out.v[i] = x >= 0.0 ? x : slope * x;
  }
  return out;
}

Matrix elu(const Matrix& a) {
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = a.v[i];
    out.v[i] = x > 0.0 ? x : std::expm1(x);
  }
  return out;
}

Matrix relu(const Matrix& a) {
  Matrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = a.v[i] > 0.0 ? a.v[i] : 0.0;
  return out;
}

Matrix row_softmax(const Matrix& a) {
  require_nonempty(a, "row_softmax");
  Matrix out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* x = a.row(i);
    double* y = out.row(i);
    double mx = x[0];
    for (int j = 1; j < a.cols; ++j) mx = std::max(mx, x[j]);
    double s = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      s += y[j];
    }
    for (int j = 0; j < a.cols; ++j) y[j] /= s;
  }
  return out;
}

Matrix masked_row_softmax(const Matrix& a, const Matrix& mask) {
  require_same_shape(a, mask, "masked_row_softmax");
  require_nonempty(a, "masked_row_softmax");
  Matrix out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* x = a.row(i);
    const double* m = mask.row(i);
    double* y = out.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < a.cols; ++j)
      if (m[j] != 0.0) mx = std::max(mx, x[j]);
    if (mx == -std::numeric_limits<double>::infinity()) continue;  // empty row mask
    double s = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      if (m[j] != 0.0) {
        y[j] = std::exp(x[j] - mx);
        s += y[j];
      }
    }
    for (int j = 0; j < a.cols; ++j)
      if (m[j] != 0.0) y[j] /= s;
  }
  return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) {
    throw DimensionError("hconcat: row counts differ: " + a.shape_str() + " | " +
                         b.shape_str());
  }
  Matrix out(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    std::memcpy(out.row(i), a.row(i), sizeof(double) * a.cols);
    std::memcpy(out.row(i) + a.cols, b.row(i), sizeof(double) * b.cols);
  }
  return out;
}

Matrix vconcat(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) {
    throw DimensionError("vconcat: column counts differ: " + a.shape_str() + " ; " +
                         b.shape_str());
  }
  Matrix out(a.rows + b.rows, a.cols);
  std::memcpy(out.v.data(), a.v.data(), sizeof(double) * a.size());
  std::memcpy(out.v.data() + a.size(), b.v.data(), sizeof(double) * b.size());
  return out;
}

Matrix row_slice(const Matrix& a, int first, int count) {
  if (first < 0 || count < 0 || first + count > a.rows) {
    std::ostringstream os;
    os << "row_slice: [" << first << ", " << first + count << ") out of " << a.shape_str();
    throw DimensionError(os.str());
  }
  Matrix out(count, a.cols);
  std::memcpy(out.v.data(), a.v.data() + static_cast<size_t>(first) * a.cols,
              sizeof(double) * out.size());
  return out;
}

Matrix col_slice(const Matrix& a, int first, int count) {
  if (first < 0 || count < 0 || first + count > a.cols) {
    std::ostringstream os;
    os << "col_slice: [" << first << ", " << first + count << ") out of " << a.shape_str();
    throw DimensionError(os.str());
  }
  Matrix out(a.rows, count);
  for (int i = 0; i < a.rows; ++i)
    std::memcpy(out.row(i), a.row(i) + first, sizeof(double) * count);
  return out;
}

Matrix mean_rows(const Matrix& a) {
  require_nonempty(a, "mean_rows");
  Matrix out(1, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.v[j] += a.at(i, j);
  for (int j = 0; j < a.cols; ++j) out.v[j] /= a.rows;
  return out;
}

Matrix sum_all(const Matrix& a) {
  double s = 0.0;
  for (double x : a.v) s += x;
  return Matrix::scalar(s);
}

Matrix repeat_rows(const Matrix& a, int count) {
  if (a.rows != 1) {
    throw DimensionError("repeat_rows: expected a single row, got " + a.shape_str());
  }
  Matrix out(count, a.cols);
  for (int i = 0; i < count; ++i)
    std::memcpy(out.row(i), a.v.data(), sizeof(double) * a.cols);
  return out;
}

Matrix mean_row_cosine(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "mean_row_cosine");
  require_nonempty(a, "mean_row_cosine");
  double acc = 0.0;
  for (int i = 0; i < a.rows; ++i) {
    const double* x = a.row(i);
    const double* y = b.row(i);
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      dot += x[j] * y[j];
      nx += x[j] * x[j];
      ny += y[j] * y[j];
    }
    if (nx == 0.0 || ny == 0.0) {
      std::ostringstream os;
      os << "cosine: zero-norm vector at row " << i;
      throw NumericError(os.str());
    }
    acc += dot / (std::sqrt(nx) * std::sqrt(ny));
  }
  return Matrix::scalar(acc / a.rows);
}

double cosine(const Matrix& a, const Matrix& b) {
  if (a.rows != 1 || b.rows != 1) {
    throw DimensionError("cosine: expected single rows, got " + a.shape_str() + " and " +
                         b.shape_str());
  }
  return mean_row_cosine(a, b).v[0];
}

std::pair<double, double> two_way_softmax(double alpha, double beta) {
  // Evaluate the smaller weight by the shifted-exponential formula and take the
  // larger as its exact complement; the pair then sums to 1.0 in binary64.
  if (alpha >= beta) {
    const double eb = std::exp(beta - alpha);
    const double w_beta = eb / (1.0 + eb);
    return {1.0 - w_beta, w_beta};
  }
  const double ea = std::exp(alpha - beta);
  const double w_alpha = ea / (1.0 + ea);
  return {w_alpha, 1.0 - w_alpha};
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::fabs(x));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
  return m;
}

void check_finite(const Matrix& a, const char* where) {
  for (double x : a.v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string(where) + ": non-finite value");
    }
  }
}

}  // namespace scenematch
