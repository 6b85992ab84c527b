#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "scenematch/matrix.hpp"

namespace scenematch {

// Handle to a value recorded on a Tape. Plain index; only meaningful together
// with the tape that issued it.
struct Var {
  int id = -1;
};

// Gradients keyed by parameter name.
using GradientSet = std::map<std::string, Matrix>;

// Reverse-mode differentiation record. Every operation appends a node holding
// its operands, attributes, and forward value; nodes are in topological order
// by construction. Forward values are produced by the same eager kernels as
// the Matrix free functions, so an untaped evaluation of the same expression
// is bit-identical.
class Tape {
 public:
  // Leaf value. A nonempty name marks a trainable parameter whose gradient is
  // collected by named_grads / add_named_grads_to.
  Var input(Matrix value, const std::string& name = "");

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double c);
  Var add_const(Var a, double c);
  Var add_rowvec(Var a, Var row);
  Var mul_scalar(Var a, Var s);  // s is 1x1; elementwise a * s
  Var leaky_relu(Var a, double slope = kLeakySlope);
  Var elu(Var a);
  Var relu(Var a);
  Var row_softmax(Var a);
  Var masked_row_softmax(Var a, Matrix mask);
  Var hconcat(Var a, Var b);
  Var vconcat(Var a, Var b);
  Var row_slice(Var a, int first, int count);
  Var col_slice(Var a, int first, int count);
  Var mean_rows(Var a);
  Var sum_all(Var a);
  Var repeat_rows(Var a, int count);
  Var mean_row_cosine(Var a, Var b);
  // [w_a, w_b] = softmax of two scalar logits, as a 1x2 value; the weights sum
  // to exactly 1.0 (see two_way_softmax).
  Var two_way(Var a, Var b);

  const Matrix& value(Var v) const;
  int size() const { return static_cast<int>(nodes_.size()); }

  // Reverse sweep from a scalar (1x1) node. seed is the upstream gradient of
  // that scalar; gradients accumulate (a second backward call adds on top).
  void backward(Var loss, double seed = 1.0);

  // Gradient of the last backward sweep(s); zero matrix if the node was not
  // reached.
  Matrix grad(Var v) const;

  // Gradients of all named inputs.
  GradientSet named_grads() const;
  // Accumulate named-input gradients into an existing set (missing keys are
  // created as zeros first).
  void add_named_grads_to(GradientSet& acc) const;

  // Smallest |x| seen among inputs of derivative-jump activations
  // (leaky_relu, relu) during forward recording. Infinity when none were
  // recorded. A tiny margin warns that finite differences straddle a kink.
  double kink_margin() const { return kink_margin_; }

 private:
  enum class Op : uint8_t {
    kInput,
    kMatmul,
    kTranspose,
    kAdd,
    kSub,
    kHadamard,
    kScale,
    kAddConst,
    kAddRowvec,
    kMulScalar,
    kLeakyRelu,
    kElu,
    kRelu,
    kRowSoftmax,
    kMaskedRowSoftmax,
    kHconcat,
    kVconcat,
    kRowSlice,
    kColSlice,
    kMeanRows,
    kSumAll,
    kRepeatRows,
    kMeanRowCosine,
    kTwoWay,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double attr = 0.0;  // scale factor, added constant, or slope
    int i0 = 0;         // slice offset / repeat count
    int i1 = 0;         // slice length
    Matrix aux{};  // softmax mask
    Matrix val{};
  };

  Var push(Node n);
  int check(Var v, const char* op) const;
  void note_kink(const Matrix& x);
  Matrix& g(int id);

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  std::vector<std::pair<int, std::string>> named_;
  double kink_margin_ = std::numeric_limits<double>::infinity();
};

// Central-difference gradient oracle. f must be a deterministic scalar
// function of the parameter set; every coordinate of every tensor is
// perturbed by +-eps in turn.
GradientSet finite_diff_grads(
    const std::function<double(const std::map<std::string, Matrix>&)>& f,
    std::map<std::string, Matrix> params, double eps);

}  // namespace scenematch
