#pragma once

#include <string>
#include <vector>

#include "scenematch/ctx.hpp"

namespace scenematch {

template <class H>
struct LocalAttention {
  H A;       // n x m region-word similarity grid
  H F_star;  // n x d word mixtures attended per region
  H P_star;  // m x d region mixtures attended per word
};

// A = (F W_r)(P W_t)^T; each region attends over words by row softmax of A,
// each word over regions by column softmax. Parameter names align.Wr/align.Wt.
template <class Ctx, class PB>
LocalAttention<typename Ctx::H> local_attention_t(Ctx& cx, PB& pb, typename Ctx::H F_u,
                                                  typename Ctx::H P_u) {
  auto A = cx.matmul(cx.matmul(F_u, pb("align.Wr")),
                     cx.transpose(cx.matmul(P_u, pb("align.Wt"))));
  auto F_star = cx.matmul(cx.row_softmax(A), P_u);
  auto P_star = cx.matmul(cx.row_softmax(cx.transpose(A)), F_u);
  return {A, F_star, P_star};
}

// Mean cosine of each feature row against its attended counterpart, both
// directions summed; range [-2, 2].
template <class Ctx>
typename Ctx::H local_similarity_t(Ctx& cx, typename Ctx::H F_u, typename Ctx::H F_star,
                                   typename Ctx::H P_u, typename Ctx::H P_star) {
  return cx.add(cx.mean_row_cosine(F_u, F_star), cx.mean_row_cosine(P_u, P_star));
}

// Eager entry points.

double global_similarity(const Matrix& c_img_u, const Matrix& c_txt_u);
struct LocalAttentionM {
  Matrix A, F_star, P_star;
};
LocalAttentionM local_attention(const Matrix& F_u, const Matrix& P_u,
                                const ParamMap& params);
double local_similarity(const Matrix& F_u, const Matrix& F_star, const Matrix& P_u,
                        const Matrix& P_star);
double pair_similarity(double s_g, double s_l, double delta);

// Hardest in-batch negatives of a square score grid whose diagonal holds the
// matched pairs. text_for_row[i] / image_for_col[j] are -1 when the batch has
// no negatives (size 1). min_gap is the smallest winner-vs-runner-up score
// difference across all rows and columns (infinity when no runner-up
// exists); a tiny gap means the argmax is numerically unstable.
struct HardNegatives {
  std::vector<int> text_for_row;
  std::vector<int> image_for_col;
  double min_gap = 0.0;
};
HardNegatives mine_hard_negatives(const Matrix& S);

// Bidirectional hinge loss over mined hard negatives, summed over the batch.
// min_hinge_abs (optional) receives the smallest |margin - S_ii + S_neg| seen,
// active or not; near-zero means the hinge sits on its kink.
double triplet_loss(const Matrix& S, double margin);
double triplet_loss(const Matrix& S, double margin, const HardNegatives& hn,
                    double* min_hinge_abs);

// Gallery indices sorted by descending score (ties toward the lower index),
// one ranking per row of the score grid.
std::vector<std::vector<int>> rank_rows(const Matrix& S);

// Percentage of queries whose matched id appears in the top k of its ranking.
double recall_at_k(const std::vector<std::vector<int>>& rank_lists,
                   const std::vector<int>& truth, int k);

struct RetrievalReport {
  // recalls in percent; [0] = R@1, [1] = R@5, [2] = R@10
  double image_as_query[3] = {0, 0, 0};
  double text_as_query[3] = {0, 0, 0};
  double rsum = 0.0;
};

// Plain left-to-right sum of the six recalls.
double rsum(const std::vector<double>& recalls);

}  // namespace scenematch
