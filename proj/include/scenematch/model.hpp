#pragma once

#include <string>
#include <vector>

#include "scenematch/alignment.hpp"
#include "scenematch/config.hpp"
#include "scenematch/cross_fusion.hpp"
#include "scenematch/ctx.hpp"
#include "scenematch/intra_fusion.hpp"
#include "scenematch/scene_graph.hpp"

namespace scenematch {

// All trainable tensors, keyed by dotted names:
//   {img|txt}.obj.h<k>.{W,aL,aR}   object-attention heads
//   {img|txt}.{rel,att}.{W1,b1,W2,b2}
//   {img|txt}.mix.{alpha,beta}     1x1 mixing logits
//   cross.ctx.* cross.WK/WQ/WV/WG cross.upd_img.* cross.upd_txt.*
//   align.{Wr,Wt}
// Weights start uniform in +-1/sqrt(fan_in); biases at zero; mixing logits at
// their configured values.
ParamMap init_params(const TrainConfig& cfg);

// Fusion ratio pair (image modality, text modality): trained weight of the
// object branch, exp(alpha) / (exp(alpha) + exp(beta)).
std::pair<double, double> fusion_ratios(const ParamMap& params);

template <class H>
struct PairScore {
  H score;  // 1x1 combined similarity
  H s_g;    // 1x1 agent cosine
  H s_l;    // 1x1 bidirectional local cosine sum
  H A;      // n x m region-word grid (retrieval explanations)
};

// Cross-modal fusion and scoring on top of already-fused per-modality
// features. delta weighs the local term.
template <class Ctx, class PB>
PairScore<typename Ctx::H> score_from_intra_t(Ctx& cx, PB& pb,
                                              typename Ctx::H F_nodes,
                                              typename Ctx::H c_img,
                                              typename Ctx::H P_nodes,
                                              typename Ctx::H c_txt, int n, int m,
                                              int d, double delta, int blocks) {
  auto [c_img_ctx, c_txt_ctx] = form_context_t(cx, pb, c_img, c_txt, d);
  auto Y = cx.vconcat(F_nodes, P_nodes);
  auto C = cx.vconcat(cx.repeat_rows(c_img_ctx, n), cx.repeat_rows(c_txt_ctx, m));
  for (int b = 0; b < blocks; ++b) Y = guided_attention_t(cx, pb, Y, C, d);
  auto pooled = split_and_pool_t(cx, Y, n, m);
  auto [c_img_u, c_txt_u] =
      update_context_t(cx, pb, c_img, pooled.f_bar, c_txt, pooled.p_bar);
  auto s_g = cx.mean_row_cosine(c_img_u, c_txt_u);
  auto local = local_attention_t(cx, pb, pooled.F_u, pooled.P_u);
  auto s_l = local_similarity_t(cx, pooled.F_u, local.F_star, pooled.P_u, local.P_star);
  auto score = cx.add(s_g, cx.scale(s_l, delta));
  return {score, s_g, s_l, local.A};
}

// Full pipeline for one image-text pair.
template <class Ctx, class PB>
PairScore<typename Ctx::H> pair_score_t(Ctx& cx, PB& pb, const SceneGraph& img,
                                        const SceneGraph& txt, const TrainConfig& cfg,
                                        double delta) {
  auto iv = intra_fuse_t(cx, pb, img, "img", cfg.K);
  auto tv = intra_fuse_t(cx, pb, txt, "txt", cfg.K);
  return score_from_intra_t(cx, pb, iv.nodes, iv.agent, tv.nodes, tv.agent,
                            img.n_nodes(), txt.n_nodes(), cfg.d, delta,
                            cfg.attention_blocks);
}

// Per-modality fused features for a slate of graphs, computed once so the
// pairwise grid reuses them.
std::vector<IntraResult> intra_all(const ParamMap& params, const TrainConfig& cfg,
                                   const std::vector<const SceneGraph*>& graphs,
                                   const std::string& prefix);

// Pairwise score grid: S[i][j] = score(image of record i, text of record j).
// delta overrides cfg.delta when >= 0.
Matrix score_grid(const ParamMap& params, const TrainConfig& cfg,
                  const std::vector<const PairRecord*>& records, double delta = -1.0);

// One eager pair evaluation (for retrieval and reports).
PairScore<Matrix> score_pair(const ParamMap& params, const TrainConfig& cfg,
                             const SceneGraph& img, const SceneGraph& txt,
                             double delta = -1.0);

struct BatchLoss {
  double loss = 0.0;       // reduced per cfg.loss_reduction
  Matrix S;                // batch x batch score grid
  HardNegatives mined;
  double min_hinge_abs = 0.0;
};

// Forward pass of the training objective over one batch.
BatchLoss batch_loss(const ParamMap& params, const TrainConfig& cfg,
                     const std::vector<const PairRecord*>& batch);

struct BatchGrads {
  BatchLoss forward;
  GradientSet grads;       // same keys as params
  double min_kink_margin;  // over all recorded hinge-relevant activations
};

// Loss gradients for one batch. Only pairs that appear in an active hinge
// term are re-recorded on tapes; each tape is seeded with the term's +-1
// coefficient (scaled for mean reduction).
BatchGrads batch_grads(const ParamMap& params, const TrainConfig& cfg,
                       const std::vector<const PairRecord*>& batch);

}  // namespace scenematch
