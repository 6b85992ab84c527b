#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "scenematch/ctx.hpp"

namespace scenematch {

// Mix the two modality agents through a shared MLP into contextual vectors.
// Parameter names: cross.ctx.{W1,b1,W2,b2} (2d -> 2d -> 2d, split in half).
template <class Ctx, class PB>
std::pair<typename Ctx::H, typename Ctx::H> form_context_t(Ctx& cx, PB& pb,
                                                           typename Ctx::H c_img,
                                                           typename Ctx::H c_txt,
                                                           int d) {
  auto out = mlp_apply(cx, pb, "cross.ctx", cx.hconcat(c_img, c_txt));
  return {cx.col_slice(out, 0, d), cx.col_slice(out, d, d)};
}

// Contextual-vector guided joint attention with residual:
//   softmax((G*Q)(G*K)^T / sqrt(d)) V + Y
// where G row-scales queries and keys (elementwise) and Y stacks region rows
// over word rows. C carries the contextual vector repeated per row.
template <class Ctx, class PB>
typename Ctx::H guided_attention_t(Ctx& cx, PB& pb, typename Ctx::H Y,
                                   typename Ctx::H C, int d) {
  auto KY = cx.matmul(Y, pb("cross.WK"));
  auto QY = cx.matmul(Y, pb("cross.WQ"));
  auto VY = cx.matmul(Y, pb("cross.WV"));
  auto GY = cx.matmul(C, pb("cross.WG"));
  auto scores = cx.scale(cx.matmul(cx.hadamard(GY, QY), cx.transpose(cx.hadamard(GY, KY))),
                         1.0 / std::sqrt(static_cast<double>(d)));
  return cx.add(cx.matmul(cx.row_softmax(scores), VY), Y);
}

template <class H>
struct PooledSplit {
  H F_u;    // n x d fused region features
  H P_u;    // m x d fused word features
  H f_bar;  // 1 x d mean region feature
  H p_bar;  // 1 x d mean word feature
};

template <class Ctx>
PooledSplit<typename Ctx::H> split_and_pool_t(Ctx& cx, typename Ctx::H Y_u, int n,
                                              int m) {
  auto F_u = cx.row_slice(Y_u, 0, n);
  auto P_u = cx.row_slice(Y_u, n, m);
  return {F_u, P_u, cx.mean_rows(F_u), cx.mean_rows(P_u)};
}

// Post-fusion agent update: each modality's agent concatenated with its
// pooled summary through a per-modality MLP (2d -> 2d -> d).
template <class Ctx, class PB>
std::pair<typename Ctx::H, typename Ctx::H> update_context_t(Ctx& cx, PB& pb,
                                                             typename Ctx::H c_img,
                                                             typename Ctx::H f_bar,
                                                             typename Ctx::H c_txt,
                                                             typename Ctx::H p_bar) {
  auto c_img_u = mlp_apply(cx, pb, "cross.upd_img", cx.hconcat(c_img, f_bar));
  auto c_txt_u = mlp_apply(cx, pb, "cross.upd_txt", cx.hconcat(c_txt, p_bar));
  return {c_img_u, c_txt_u};
}

// Eager entry points.

std::pair<Matrix, Matrix> form_context(const Matrix& c_img, const Matrix& c_txt,
                                       const ParamMap& params);
Matrix guided_attention(const Matrix& F_nodes, const Matrix& P_nodes,
                        const Matrix& c_img_ctx, const Matrix& c_txt_ctx,
                        const ParamMap& params, int blocks = 1);
struct PooledSplitM {
  Matrix F_u, P_u, f_bar, p_bar;
};
PooledSplitM split_and_pool(const Matrix& Y_u, int n, int m);
std::pair<Matrix, Matrix> update_context(const Matrix& c_img, const Matrix& f_bar,
                                         const Matrix& c_txt, const Matrix& p_bar,
                                         const ParamMap& params);

}  // namespace scenematch
