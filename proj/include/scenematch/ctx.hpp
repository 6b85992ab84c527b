#pragma once

#include <map>
#include <string>

#include "scenematch/errors.hpp"
#include "scenematch/matrix.hpp"
#include "scenematch/tape.hpp"

namespace scenematch {

// The model's forward pass is written once as templates over an evaluation
// context. EagerCtx computes plain matrices; TapeCtx records the identical
// kernel sequence on a Tape for backward(). Both run the same eager kernels
// underneath, so their outputs are bit-identical.

struct EagerCtx {
  using H = Matrix;
  H constant(Matrix m) const { return m; }
  const Matrix& value(const H& h) const { return h; }
  H matmul(const H& a, const H& b) const { return scenematch::matmul(a, b); }
  H transpose(const H& a) const { return scenematch::transpose(a); }
  H add(const H& a, const H& b) const { return scenematch::add(a, b); }
  H sub(const H& a, const H& b) const { return scenematch::sub(a, b); }
  H hadamard(const H& a, const H& b) const { return scenematch::hadamard(a, b); }
  H scale(const H& a, double c) const { return scenematch::scale(a, c); }
  H add_const(const H& a, double c) const { return scenematch::add_const(a, c); }
  H add_rowvec(const H& a, const H& r) const { return scenematch::add_rowvec(a, r); }
  H mul_scalar(const H& a, const H& s) const { return scenematch::scale(a, s.v[0]); }
  H leaky_relu(const H& a, double slope) const { return scenematch::leaky_relu(a, slope); }
  H elu(const H& a) const { return scenematch::elu(a); }
  H relu(const H& a) const { return scenematch::relu(a); }
  H row_softmax(const H& a) const { return scenematch::row_softmax(a); }
  H masked_row_softmax(const H& a, const Matrix& mask) const {
    return scenematch::masked_row_softmax(a, mask);
  }
  H hconcat(const H& a, const H& b) const { return scenematch::hconcat(a, b); }
  H vconcat(const H& a, const H& b) const { return scenematch::vconcat(a, b); }
  H row_slice(const H& a, int first, int count) const {
    return scenematch::row_slice(a, first, count);
  }
  H col_slice(const H& a, int first, int count) const {
    return scenematch::col_slice(a, first, count);
  }
  H mean_rows(const H& a) const { return scenematch::mean_rows(a); }
  H sum_all(const H& a) const { return scenematch::sum_all(a); }
  H repeat_rows(const H& a, int count) const { return scenematch::repeat_rows(a, count); }
  H mean_row_cosine(const H& a, const H& b) const {
    return scenematch::mean_row_cosine(a, b);
  }
  H two_way(const H& a, const H& b) const {
    auto [wa, wb] = scenematch::two_way_softmax(a.v[0], b.v[0]);
    return Matrix{{wa, wb}};
  }
};

struct TapeCtx {
  Tape& tape;
  using H = Var;
  H constant(Matrix m) { return tape.input(std::move(m)); }
  const Matrix& value(H h) const { return tape.value(h); }
  H matmul(H a, H b) { return tape.matmul(a, b); }
  H transpose(H a) { return tape.transpose(a); }
  H add(H a, H b) { return tape.add(a, b); }
  H sub(H a, H b) { return tape.sub(a, b); }
  H hadamard(H a, H b) { return tape.hadamard(a, b); }
  H scale(H a, double c) { return tape.scale(a, c); }
  H add_const(H a, double c) { return tape.add_const(a, c); }
  H add_rowvec(H a, H r) { return tape.add_rowvec(a, r); }
  H mul_scalar(H a, H s) { return tape.mul_scalar(a, s); }
  H leaky_relu(H a, double slope) { return tape.leaky_relu(a, slope); }
  H elu(H a) { return tape.elu(a); }
  H relu(H a) { return tape.relu(a); }
  H row_softmax(H a) { return tape.row_softmax(a); }
  H masked_row_softmax(H a, const Matrix& mask) {
    return tape.masked_row_softmax(a, mask);
  }
  H hconcat(H a, H b) { return tape.hconcat(a, b); }
  H vconcat(H a, H b) { return tape.vconcat(a, b); }
  H row_slice(H a, int first, int count) { return tape.row_slice(a, first, count); }
  H col_slice(H a, int first, int count) { return tape.col_slice(a, first, count); }
  H mean_rows(H a) { return tape.mean_rows(a); }
  H sum_all(H a) { return tape.sum_all(a); }
  H repeat_rows(H a, int count) { return tape.repeat_rows(a, count); }
  H mean_row_cosine(H a, H b) { return tape.mean_row_cosine(a, b); }
  H two_way(H a, H b) { return tape.two_way(a, b); }
};

using ParamMap = std::map<std::string, Matrix>;

inline const Matrix& require_param(const ParamMap& tensors, const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

// Parameter binders: map a parameter name to a context handle. The tape
// binder registers each tensor as a named input exactly once so gradients
// come back under the same name.
struct EagerParams {
  const ParamMap* tensors;
  Matrix operator()(const std::string& name) {
    return require_param(*tensors, name);
  }
};

struct TapeParams {
  Tape* tape;
  const ParamMap* tensors;
  std::map<std::string, Var> bound{};
  Var operator()(const std::string& name) {
    auto it = bound.find(name);
    if (it != bound.end()) return it->second;
    Var v = tape->input(require_param(*tensors, name), name);
    bound.emplace(name, v);
    return v;
  }
};

// One-hidden-layer perceptron applied rowwise: elu(x W1 + b1) W2 + b2.
// Parameter names are <prefix>.W1/.b1/.W2/.b2.
template <class Ctx, class PB>
typename Ctx::H mlp_apply(Ctx& cx, PB& pb, const std::string& prefix,
                          typename Ctx::H x) {
  auto hidden = cx.elu(cx.add_rowvec(cx.matmul(x, pb(prefix + ".W1")), pb(prefix + ".b1")));
  return cx.add_rowvec(cx.matmul(hidden, pb(prefix + ".W2")), pb(prefix + ".b2"));
}

}  // namespace scenematch
