#include "scenematch/tape.hpp"

#include <cmath>
#include <sstream>

#include "scenematch/errors.hpp"

namespace scenematch {

namespace {

// acc += g, creating acc at the right shape on first touch.
void acc_into(Matrix& acc, const Matrix& g) {
  if (acc.empty()) {
    acc = g;
    return;
  }
  for (size_t i = 0; i < acc.size(); ++i) acc.v[i] += g.v[i];
}

}  // namespace

int Tape::check(Var v, const char* op) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    std::ostringstream os;
    os << op << ": var id " << v.id << " is not on this tape (size " << nodes_.size()
       << ")";
    throw ContractError(os.str());
  }
  return v.id;
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::note_kink(const Matrix& x) {
  for (double e : x.v) kink_margin_ = std::min(kink_margin_, std::fabs(e));
}

Var Tape::input(Matrix value, const std::string& name) {
  Node n{Op::kInput};
  n.val = std::move(value);
  Var v = push(std::move(n));
  if (!name.empty()) named_.emplace_back(v.id, name);
  return v;
}

const Matrix& Tape::value(Var v) const { return nodes_[check(v, "value")].val; }

Var Tape::matmul(Var a, Var b) {
  Node n{Op::kMatmul, check(a, "matmul"), check(b, "matmul")};
  n.val = scenematch::matmul(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  Node n{Op::kTranspose, check(a, "transpose")};
  n.val = scenematch::transpose(nodes_[n.a].val);
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n{Op::kAdd, check(a, "add"), check(b, "add")};
  n.val = scenematch::add(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  Node n{Op::kSub, check(a, "sub"), check(b, "sub")};
  n.val = scenematch::sub(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  Node n{Op::kHadamard, check(a, "hadamard"), check(b, "hadamard")};
  n.val = scenematch::hadamard(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  Node n{Op::kScale, check(a, "scale")};
  n.attr = c;
  n.val = scenematch::scale(nodes_[n.a].val, c);
  return push(std::move(n));
}

Var Tape::add_const(Var a, double c) {
  Node n{Op::kAddConst, check(a, "add_const")};
  n.attr = c;
  n.val = scenematch::add_const(nodes_[n.a].val, c);
  return push(std::move(n));
}

Var Tape::add_rowvec(Var a, Var row) {
  Node n{Op::kAddRowvec, check(a, "add_rowvec"), check(row, "add_rowvec")};
  n.val = scenematch::add_rowvec(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::mul_scalar(Var a, Var s) {
  Node n{Op::kMulScalar, check(a, "mul_scalar"), check(s, "mul_scalar")};
  const Matrix& sv = nodes_[n.b].val;
  if (sv.rows != 1 || sv.cols != 1) {
    throw DimensionError("mul_scalar: scale operand must be 1x1, got " + sv.shape_str());
  }
  n.val = scenematch::scale(nodes_[n.a].val, sv.v[0]);
  return push(std::move(n));
}

Var Tape::leaky_relu(Var a, double slope) {
  Node n{Op::kLeakyRelu, check(a, "leaky_relu")};
  n.attr = slope;
  note_kink(nodes_[n.a].val);
  n.val = scenematch::leaky_relu(nodes_[n.a].val, slope);
  return push(std::move(n));
}

Var Tape::elu(Var a) {
  // elu is C1 at zero, so it never contributes to the kink margin
  Node n{Op::kElu, check(a, "elu")};
  n.val = scenematch::elu(nodes_[n.a].val);
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n{Op::kRelu, check(a, "relu")};
  note_kink(nodes_[n.a].val);
  n.val = scenematch::relu(nodes_[n.a].val);
  return push(std::move(n));
}

Var Tape::row_softmax(Var a) {
  Node n{Op::kRowSoftmax, check(a, "row_softmax")};
  n.val = scenematch::row_softmax(nodes_[n.a].val);
  return push(std::move(n));
}

Var Tape::masked_row_softmax(Var a, Matrix mask) {
  Node n{Op::kMaskedRowSoftmax, check(a, "masked_row_softmax")};
  n.val = scenematch::masked_row_softmax(nodes_[n.a].val, mask);
  n.aux = std::move(mask);
  return push(std::move(n));
}

Var Tape::hconcat(Var a, Var b) {
  Node n{Op::kHconcat, check(a, "hconcat"), check(b, "hconcat")};
  n.val = scenematch::hconcat(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::vconcat(Var a, Var b) {
  Node n{Op::kVconcat, check(a, "vconcat"), check(b, "vconcat")};
  n.val = scenematch::vconcat(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::row_slice(Var a, int first, int count) {
  Node n{Op::kRowSlice, check(a, "row_slice")};
  n.i0 = first;
  n.i1 = count;
  n.val = scenematch::row_slice(nodes_[n.a].val, first, count);
  return push(std::move(n));
}

Var Tape::col_slice(Var a, int first, int count) {
  Node n{Op::kColSlice, check(a, "col_slice")};
  n.i0 = first;
  n.i1 = count;
  n.val = scenematch::col_slice(nodes_[n.a].val, first, count);
  return push(std::move(n));
}

Var Tape::mean_rows(Var a) {
  Node n{Op::kMeanRows, check(a, "mean_rows")};
  n.val = scenematch::mean_rows(nodes_[n.a].val);
  return push(std::move(n));
}

Var Tape::sum_all(Var a) {
  Node n{Op::kSumAll, check(a, "sum_all")};
  n.val = scenematch::sum_all(nodes_[n.a].val);
  return push(std::move(n));
}

Var Tape::repeat_rows(Var a, int count) {
  Node n{Op::kRepeatRows, check(a, "repeat_rows")};
  n.i0 = count;
  n.val = scenematch::repeat_rows(nodes_[n.a].val, count);
  return push(std::move(n));
}

Var Tape::mean_row_cosine(Var a, Var b) {
  Node n{Op::kMeanRowCosine, check(a, "mean_row_cosine"), check(b, "mean_row_cosine")};
  n.val = scenematch::mean_row_cosine(nodes_[n.a].val, nodes_[n.b].val);
  return push(std::move(n));
}

Var Tape::two_way(Var a, Var b) {
  Node n{Op::kTwoWay, check(a, "two_way"), check(b, "two_way")};
  const Matrix& av = nodes_[n.a].val;
  const Matrix& bv = nodes_[n.b].val;
  if (av.rows != 1 || av.cols != 1 || bv.rows != 1 || bv.cols != 1) {
    throw DimensionError("two_way: both logits must be 1x1");
  }
  auto [wa, wb] = scenematch::two_way_softmax(av.v[0], bv.v[0]);
  n.val = Matrix{{wa, wb}};
  return push(std::move(n));
}

Matrix& Tape::g(int id) {
  Matrix& m = grads_[id];
  if (m.empty()) m = Matrix(nodes_[id].val.rows, nodes_[id].val.cols);
  return m;
}

void Tape::backward(Var loss, double seed) {
  const int root = check(loss, "backward");
  const Matrix& lv = nodes_[root].val;
  if (lv.rows != 1 || lv.cols != 1) {
    throw ContractError("backward: loss must be 1x1, got " + lv.shape_str());
  }
  if (grads_.size() != nodes_.size()) grads_.resize(nodes_.size());

  // each sweep runs in its own buffer and is folded into the stored
  // gradients at the end, so a repeated call adds exactly seed * dloss/dx
  // instead of re-propagating what earlier sweeps already deposited
  std::vector<Matrix> sweep(nodes_.size());
  auto g = [&](int id) -> Matrix& {
    Matrix& m = sweep[static_cast<size_t>(id)];
    if (m.empty()) m = Matrix(nodes_[id].val.rows, nodes_[id].val.cols);
    return m;
  };
  g(root).v[0] = seed;

  for (int id = root; id >= 0; --id) {
    const Matrix& up = sweep[id];
    if (up.empty()) continue;
    const Node& n = nodes_[id];
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kMatmul: {
        acc_into(g(n.a), scenematch::matmul(up, scenematch::transpose(nodes_[n.b].val)));
        acc_into(g(n.b), scenematch::matmul(scenematch::transpose(nodes_[n.a].val), up));
        break;
      }
      case Op::kTranspose:
        acc_into(g(n.a), scenematch::transpose(up));
        break;
      case Op::kAdd:
        acc_into(g(n.a), up);
        acc_into(g(n.b), up);
        break;
      case Op::kSub:
        acc_into(g(n.a), up);
        acc_into(g(n.b), scenematch::scale(up, -1.0));
        break;
      case Op::kHadamard:
        acc_into(g(n.a), scenematch::hadamard(up, nodes_[n.b].val));
        acc_into(g(n.b), scenematch::hadamard(up, nodes_[n.a].val));
        break;
      case Op::kScale:
        acc_into(g(n.a), scenematch::scale(up, n.attr));
        break;
      case Op::kAddConst:
        acc_into(g(n.a), up);
        break;
      case Op::kAddRowvec: {
        acc_into(g(n.a), up);
        Matrix rg(1, up.cols);
        for (int i = 0; i < up.rows; ++i)
          for (int j = 0; j < up.cols; ++j) rg.v[j] += up.at(i, j);
        acc_into(g(n.b), rg);
        break;
      }
      case Op::kMulScalar: {
        const double s = nodes_[n.b].val.v[0];
        acc_into(g(n.a), scenematch::scale(up, s));
        double ds = 0.0;
        const Matrix& av = nodes_[n.a].val;
        for (size_t i = 0; i < av.size(); ++i) ds += up.v[i] * av.v[i];
        acc_into(g(n.b), Matrix::scalar(ds));
        break;
      }
      case Op::kLeakyRelu: {
        const Matrix& x = nodes_[n.a].val;
        Matrix dg(x.rows, x.cols);
        for (size_t i = 0; i < x.size(); ++i)
          dg.v[i] = up.v[i] * (x.v[i] >= 0.0 ? 1.0 : n.attr);
        acc_into(g(n.a), dg);
        break;
      }
      case Op::kElu: {
        const Matrix& x = nodes_[n.a].val;
        Matrix dg(x.rows, x.cols);
        // below zero the output is e^x - 1, so the slope is output + 1
        for (size_t i = 0; i < x.size(); ++i)
          dg.v[i] = up.v[i] * (x.v[i] > 0.0 ? 1.0 : n.val.v[i] + 1.0);
        acc_into(g(n.a), dg);
        break;
      }
      case Op::kRelu: {
        const Matrix& x = nodes_[n.a].val;
        Matrix dg(x.rows, x.cols);
        for (size_t i = 0; i < x.size(); ++i) dg.v[i] = x.v[i] > 0.0 ? up.v[i] : 0.0;
        acc_into(g(n.a), dg);
        break;
      }
      case Op::kRowSoftmax:
      case Op::kMaskedRowSoftmax: {
        // dx_j = y_j * (g_j - sum_k g_k y_k); masked-out entries have y = 0,
        // so the same formula zeroes them.
        const Matrix& y = n.val;
        Matrix dg(y.rows, y.cols);
        for (int i = 0; i < y.rows; ++i) {
          double dot = 0.0;
          for (int j = 0; j < y.cols; ++j) dot += up.at(i, j) * y.at(i, j);
          for (int j = 0; j < y.cols; ++j)
            dg.at(i, j) = y.at(i, j) * (up.at(i, j) - dot);
        }
        acc_into(g(n.a), dg);
        break;
      }
      case Op::kHconcat: {
        acc_into(g(n.a), scenematch::col_slice(up, 0, nodes_[n.a].val.cols));
        acc_into(g(n.b), scenematch::col_slice(up, nodes_[n.a].val.cols,
                                               nodes_[n.b].val.cols));
        break;
      }
      case Op::kVconcat: {
        acc_into(g(n.a), scenematch::row_slice(up, 0, nodes_[n.a].val.rows));
        acc_into(g(n.b), scenematch::row_slice(up, nodes_[n.a].val.rows,
                                               nodes_[n.b].val.rows));
        break;
      }
      case Op::kRowSlice: {
        Matrix& ga = g(n.a);
        for (int i = 0; i < up.rows; ++i)
          for (int j = 0; j < up.cols; ++j) ga.at(n.i0 + i, j) += up.at(i, j);
        break;
      }
      case Op::kColSlice: {
        Matrix& ga = g(n.a);
        for (int i = 0; i < up.rows; ++i)
          for (int j = 0; j < up.cols; ++j) ga.at(i, n.i0 + j) += up.at(i, j);
        break;
      }
      case Op::kMeanRows: {
        const Matrix& av = nodes_[n.a].val;
        Matrix dg(av.rows, av.cols);
        for (int i = 0; i < av.rows; ++i)
          for (int j = 0; j < av.cols; ++j) dg.at(i, j) = up.v[j] / av.rows;
        acc_into(g(n.a), dg);
        break;
      }
      case Op::kSumAll: {
        const Matrix& av = nodes_[n.a].val;
        acc_into(g(n.a), Matrix::filled(av.rows, av.cols, up.v[0]));
        break;
      }
      case Op::kRepeatRows: {
        Matrix rg(1, up.cols);
        for (int i = 0; i < up.rows; ++i)
          for (int j = 0; j < up.cols; ++j) rg.v[j] += up.at(i, j);
        acc_into(g(n.a), rg);
        break;
      }
      case Op::kMeanRowCosine: {
        // per row r: d cos / dx = y/(|x||y|) - cos * x/|x|^2, then / rows
        const Matrix& x = nodes_[n.a].val;
        const Matrix& y = nodes_[n.b].val;
        Matrix dx(x.rows, x.cols), dy(y.rows, y.cols);
        const double go = up.v[0] / x.rows;
        for (int r = 0; r < x.rows; ++r) {
          double dot = 0.0, nx2 = 0.0, ny2 = 0.0;
          for (int j = 0; j < x.cols; ++j) {
            dot += x.at(r, j) * y.at(r, j);
            nx2 += x.at(r, j) * x.at(r, j);
            ny2 += y.at(r, j) * y.at(r, j);
          }
          const double nx = std::sqrt(nx2), ny = std::sqrt(ny2);
          const double c = dot / (nx * ny);
          for (int j = 0; j < x.cols; ++j) {
            dx.at(r, j) = go * (y.at(r, j) / (nx * ny) - c * x.at(r, j) / nx2);
            dy.at(r, j) = go * (x.at(r, j) / (nx * ny) - c * y.at(r, j) / ny2);
          }
        }
        acc_into(g(n.a), dx);
        acc_into(g(n.b), dy);
        break;
      }
      case Op::kTwoWay: {
        const double wa = n.val.v[0], wb = n.val.v[1];
        const double p = wa * wb;
        const double d = (up.v[0] - up.v[1]) * p;
        acc_into(g(n.a), Matrix::scalar(d));
        acc_into(g(n.b), Matrix::scalar(-d));
        break;
      }
    }
  }

  for (size_t id = 0; id < sweep.size(); ++id) {
    if (!sweep[id].empty()) acc_into(this->g(static_cast<int>(id)), sweep[id]);
  }
}

Matrix Tape::grad(Var v) const {
  const int id = check(v, "grad");
  if (id < static_cast<int>(grads_.size()) && !grads_[id].empty()) return grads_[id];
  return Matrix(nodes_[id].val.rows, nodes_[id].val.cols);
}

GradientSet Tape::named_grads() const {
  GradientSet out;
  add_named_grads_to(out);
  return out;
}

void Tape::add_named_grads_to(GradientSet& acc) const {
  for (const auto& [id, name] : named_) {
    Matrix gv = grad(Var{id});
    auto it = acc.find(name);
    if (it == acc.end()) {
      acc.emplace(name, std::move(gv));
    } else {
      acc_into(it->second, gv);
    }
  }
}

GradientSet finite_diff_grads(
    const std::function<double(const std::map<std::string, Matrix>&)>& f,
    std::map<std::string, Matrix> params, double eps) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_grads: eps must be positive");
  GradientSet out;
  for (auto& [name, tensor] : params) {
    Matrix gm(tensor.rows, tensor.cols);
    for (size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor.v[i];
      tensor.v[i] = saved + eps;
      const double fp = f(params);
      tensor.v[i] = saved - eps;
      const double fm = f(params);
      tensor.v[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("finite_diff_grads: non-finite evaluation at " + name);
      }
      gm.v[i] = (fp - fm) / (2.0 * eps);
    }
    out.emplace(name, std::move(gm));
  }
  return out;
}

}  // namespace scenematch
