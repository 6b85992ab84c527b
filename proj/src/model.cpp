#include "scenematch/model.hpp"

#include <cmath>
#include <limits>

#include "scenematch/errors.hpp"
#include "scenematch/rng.hpp"

namespace scenematch {

namespace {

Matrix uniform_fan_in(Rng& rng, int rows, int cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (double& x : m.v) x = rng.uniform(-bound, bound);
  return m;
}

void init_mlp(ParamMap& p, Rng& rng, const std::string& prefix, int in, int hidden,
              int out) {
  p[prefix + ".W1"] = uniform_fan_in(rng, in, hidden);
  p[prefix + ".b1"] = Matrix(1, hidden);
  p[prefix + ".W2"] = uniform_fan_in(rng, hidden, out);
  p[prefix + ".b2"] = Matrix(1, out);
}

void init_modality(ParamMap& p, Rng& rng, const std::string& prefix,
                   const TrainConfig& cfg) {
  for (int k = 0; k < cfg.K; ++k) {
    const std::string hp = prefix + ".obj.h" + std::to_string(k);
    p[hp + ".W"] = uniform_fan_in(rng, cfg.d, cfg.d);
    p[hp + ".aL"] = uniform_fan_in(rng, cfg.d, 1);
    p[hp + ".aR"] = uniform_fan_in(rng, cfg.d, 1);
  }
  init_mlp(p, rng, prefix + ".rel", cfg.d, cfg.d, cfg.d);
  init_mlp(p, rng, prefix + ".att", cfg.d, cfg.d, cfg.d);
  p[prefix + ".mix.alpha"] = Matrix::scalar(cfg.alpha_init);
  p[prefix + ".mix.beta"] = Matrix::scalar(cfg.beta_init);
}

}  // namespace

ParamMap init_params(const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ParamMap p;
  const int d = cfg.d;
  init_modality(p, rng, "img", cfg);
  init_modality(p, rng, "txt", cfg);
  init_mlp(p, rng, "cross.ctx", 2 * d, 2 * d, 2 * d);
  p["cross.WK"] = uniform_fan_in(rng, d, d);
  p["cross.WQ"] = uniform_fan_in(rng, d, d);
  p["cross.WV"] = uniform_fan_in(rng, d, d);
  p["cross.WG"] = uniform_fan_in(rng, d, d);
  init_mlp(p, rng, "cross.upd_img", 2 * d, 2 * d, d);
  init_mlp(p, rng, "cross.upd_txt", 2 * d, 2 * d, d);
  p["align.Wr"] = uniform_fan_in(rng, d, d);
  p["align.Wt"] = uniform_fan_in(rng, d, d);
  return p;
}

std::pair<double, double> fusion_ratios(const ParamMap& params) {
  const auto ratio = [&](const std::string& prefix) {
    return two_way_softmax(require_param(params, prefix + ".mix.alpha").v[0],
                           require_param(params, prefix + ".mix.beta").v[0])
        .first;
  };
  return {ratio("img"), ratio("txt")};
}

std::vector<IntraResult> intra_all(const ParamMap& params, const TrainConfig& cfg,
                                   const std::vector<const SceneGraph*>& graphs,
                                   const std::string& prefix) {
  std::vector<IntraResult> out;
  out.reserve(graphs.size());
  for (const SceneGraph* g : graphs) out.push_back(intra_fuse(*g, params, prefix, cfg.K));
  return out;
}

Matrix score_grid(const ParamMap& params, const TrainConfig& cfg,
                  const std::vector<const PairRecord*>& records, double delta) {
  const double dl = delta >= 0.0 ? delta : cfg.delta;
  const int b = static_cast<int>(records.size());
  std::vector<const SceneGraph*> imgs, txts;
  imgs.reserve(b);
  txts.reserve(b);
  for (const PairRecord* r : records) {
    imgs.push_back(&r->image);
    txts.push_back(&r->text);
  }
  const auto iv = intra_all(params, cfg, imgs, "img");
  const auto tv = intra_all(params, cfg, txts, "txt");

  EagerCtx cx;
  EagerParams pb{&params};
  Matrix S(b, b);
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      auto ps = score_from_intra_t(cx, pb, iv[i].nodes, iv[i].agent, tv[j].nodes,
                                   tv[j].agent, imgs[i]->n_nodes(), txts[j]->n_nodes(),
                                   cfg.d, dl, cfg.attention_blocks);
      S.at(i, j) = ps.score.v[0];
    }
  }
  check_finite(S, "score_grid");
  return S;
}

PairScore<Matrix> score_pair(const ParamMap& params, const TrainConfig& cfg,
                             const SceneGraph& img, const SceneGraph& txt,
                             double delta) {
  EagerCtx cx;
  EagerParams pb{&params};
  const double dl = delta >= 0.0 ? delta : cfg.delta;
  return pair_score_t(cx, pb, img, txt, cfg, dl);
}

BatchLoss batch_loss(const ParamMap& params, const TrainConfig& cfg,
                     const std::vector<const PairRecord*>& batch) {
  BatchLoss out;
  out.S = score_grid(params, cfg, batch);
  out.mined = mine_hard_negatives(out.S);
  out.loss = triplet_loss(out.S, cfg.margin, out.mined, &out.min_hinge_abs);
  if (cfg.loss_reduction == "mean") out.loss /= static_cast<double>(batch.size());
  return out;
}

BatchGrads batch_grads(const ParamMap& params, const TrainConfig& cfg,
                       const std::vector<const PairRecord*>& batch) {
  BatchGrads bg{batch_loss(params, cfg, batch), {},
                std::numeric_limits<double>::infinity()};
  const int b = static_cast<int>(batch.size());
  const Matrix& S = bg.forward.S;
  const HardNegatives& hn = bg.forward.mined;

  // dLoss/dS is sparse: +1 on each active hinge's negative, -1 on its
  // diagonal anchor (scaled under mean reduction).
  Matrix coeff(b, b);
  const double unit = cfg.loss_reduction == "mean" ? 1.0 / b : 1.0;
  for (int i = 0; i < b; ++i) {
    if (hn.text_for_row[i] >= 0 &&
        cfg.margin - S.at(i, i) + S.at(i, hn.text_for_row[i]) > 0.0) {
      coeff.at(i, hn.text_for_row[i]) += unit;
      coeff.at(i, i) -= unit;
    }
    if (hn.image_for_col[i] >= 0 &&
        cfg.margin - S.at(i, i) + S.at(hn.image_for_col[i], i) > 0.0) {
      coeff.at(hn.image_for_col[i], i) += unit;
      coeff.at(i, i) -= unit;
    }
  }

  for (const auto& [name, tensor] : params)
    bg.grads.emplace(name, Matrix(tensor.rows, tensor.cols));

  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      const double w = coeff.at(i, j);
      if (w == 0.0) continue;
      Tape tape;
      TapeCtx cx{tape};
      TapeParams pb{&tape, &params};
      auto ps = pair_score_t(cx, pb, batch[i]->image, batch[j]->text, cfg, cfg.delta);
      tape.backward(ps.score, w);
      tape.add_named_grads_to(bg.grads);
      bg.min_kink_margin = std::min(bg.min_kink_margin, tape.kink_margin());
    }
  }
  return bg;
}

}  // namespace scenematch
