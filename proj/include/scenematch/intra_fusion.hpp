#pragma once

#include <string>
#include <vector>

#include "scenematch/ctx.hpp"
#include "scenematch/scene_graph.hpp"

namespace scenematch {

// Attention reach of each node: its adjacency row with the diagonal forced to
// 1, so every node at least attends to itself.
Matrix attention_mask(const SceneGraph& g);

// The graph extended by the all-ones agent node, connected to every node (and
// itself, via the mask rule) with no relations or attributes of its own.
SceneGraph with_agent(const SceneGraph& g);

// Row i = mean of feats rows listed in inc[i]; zero row when the list is
// empty.
Matrix incidence_mean(const Matrix& feats, const std::vector<std::vector<int>>& inc);
// Row i = all ones when inc[i] is nonempty, else all zeros.
Matrix incidence_mask(const std::vector<std::vector<int>>& inc, int d);

// Multi-head graph attention over the rows of H restricted by mask.
// Per head: u = leaky_relu(H W); logit(i,j) = aL.u_i + aR.u_j; weights are a
// masked row softmax; head output = weights (H W). Heads are averaged, then
// passed through elu. Parameter names: <prefix>.obj.h<k>.{W,aL,aR}.
template <class Ctx, class PB>
typename Ctx::H object_layer_t(Ctx& cx, PB& pb, const Matrix& mask,
                               typename Ctx::H H0, const std::string& prefix, int K) {
  using H = typename Ctx::H;
  const int rows = mask.rows;
  H ones_row = cx.constant(Matrix::ones(1, rows));
  H ones_col = cx.constant(Matrix::ones(rows, 1));
  H acc{};
  for (int k = 0; k < K; ++k) {
    const std::string hp = prefix + ".obj.h" + std::to_string(k);
    H Wh = cx.matmul(H0, pb(hp + ".W"));
    H u = cx.leaky_relu(Wh, kLeakySlope);
    H sL = cx.matmul(u, pb(hp + ".aL"));
    H sR = cx.matmul(u, pb(hp + ".aR"));
    H logits = cx.add(cx.matmul(sL, ones_row), cx.matmul(ones_col, cx.transpose(sR)));
    H attn = cx.masked_row_softmax(logits, mask);
    H head = cx.matmul(attn, Wh);
    acc = (k == 0) ? head : cx.add(acc, head);
  }
  return cx.elu(cx.scale(acc, 1.0 / K));
}

// Relation / attribute aggregation: MLP over the per-node incidence mean,
// with empty-incidence rows forced to zero output.
template <class Ctx, class PB>
typename Ctx::H incidence_layer_t(Ctx& cx, PB& pb, const std::string& mlp_prefix,
                                  const Matrix& feats,
                                  const std::vector<std::vector<int>>& inc, int d) {
  auto mean = cx.constant(incidence_mean(feats, inc));
  auto out = mlp_apply(cx, pb, mlp_prefix, mean);
  return cx.hadamard(out, cx.constant(incidence_mask(inc, d)));
}

// Two-way softmax mixing of the object branch against the summed
// relation+attribute branch; alpha weighs the object side.
template <class Ctx>
typename Ctx::H layer_fusion_t(Ctx& cx, typename Ctx::H h_obj, typename Ctx::H h_rel,
                               typename Ctx::H h_att, typename Ctx::H alpha,
                               typename Ctx::H beta) {
  auto w = cx.two_way(alpha, beta);
  auto w_obj = cx.col_slice(w, 0, 1);
  auto w_ra = cx.col_slice(w, 1, 1);
  return cx.add(cx.mul_scalar(h_obj, w_obj), cx.mul_scalar(cx.add(h_rel, h_att), w_ra));
}

template <class H>
struct IntraOut {
  H nodes;  // n x d updated node features
  H agent;  // 1 x d agent summary
};

// Full intra-modal fusion: extend the graph with the agent node, run the
// object / relation / attribute layers, mix, and split off the agent row.
template <class Ctx, class PB>
IntraOut<typename Ctx::H> intra_fuse_t(Ctx& cx, PB& pb, const SceneGraph& g,
                                       const std::string& prefix, int K) {
  const int n = g.n_nodes();
  const int d = g.dim();
  const SceneGraph ext = with_agent(g);
  auto H0 = cx.constant(ext.node_features);
  auto h_obj = object_layer_t(cx, pb, attention_mask(ext), H0, prefix, K);
  auto h_rel = incidence_layer_t(cx, pb, prefix + ".rel", ext.relation_features,
                                 ext.rel_incidence, d);
  auto h_att = incidence_layer_t(cx, pb, prefix + ".att", ext.attribute_features,
                                 ext.attr_incidence, d);
  auto fused = layer_fusion_t(cx, h_obj, h_rel, h_att, pb(prefix + ".mix.alpha"),
                              pb(prefix + ".mix.beta"));
  return {cx.row_slice(fused, 0, n), cx.row_slice(fused, n, 1)};
}

// Eager entry points over a flat parameter map (names as in the templates).

Matrix object_layer(const SceneGraph& g, const Matrix& H0, const ParamMap& params,
                    const std::string& prefix, int K);
Matrix relation_layer(const SceneGraph& g, const ParamMap& params,
                      const std::string& prefix);
Matrix attribute_layer(const SceneGraph& g, const ParamMap& params,
                       const std::string& prefix);
Matrix layer_fusion(const Matrix& h_obj, const Matrix& h_rel, const Matrix& h_att,
                    double alpha, double beta);

struct IntraResult {
  Matrix nodes;
  Matrix agent;
};
IntraResult intra_fuse(const SceneGraph& g, const ParamMap& params,
                       const std::string& prefix, int K);

}  // namespace scenematch
