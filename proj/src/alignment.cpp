#include "scenematch/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scenematch/errors.hpp"

namespace scenematch {

double global_similarity(const Matrix& c_img_u, const Matrix& c_txt_u) {
  return cosine(c_img_u, c_txt_u);
}

LocalAttentionM local_attention(const Matrix& F_u, const Matrix& P_u,
                                const ParamMap& params) {
  if (F_u.cols != P_u.cols) {
    throw DimensionError("local_attention: feature widths differ: " + F_u.shape_str() +
                         " vs " + P_u.shape_str());
  }
  EagerCtx cx;
  EagerParams pb{&params};
  auto out = local_attention_t(cx, pb, F_u, P_u);
  return {out.A, out.F_star, out.P_star};
}

double local_similarity(const Matrix& F_u, const Matrix& F_star, const Matrix& P_u,
                        const Matrix& P_star) {
  EagerCtx cx;
  return local_similarity_t(cx, F_u, F_star, P_u, P_star).v[0];
}

double pair_similarity(double s_g, double s_l, double delta) {
  if (delta < 0.0) throw ContractError("pair_similarity: delta must be >= 0");
  return s_g + delta * s_l;
}

namespace {

// winner and runner-up of S over positions != skip along a row or column
struct Best2 {
  int idx = -1;
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  void feed(int i, double x) {
    if (x > best) {
      second = best;
      best = x;
      idx = i;
    } else if (x > second) {
      second = x;
    }
  }
};

}  // namespace

HardNegatives mine_hard_negatives(const Matrix& S) {
  if (S.rows != S.cols) {
    throw DimensionError("mine_hard_negatives: score grid must be square, got " +
                         S.shape_str());
  }
  const int b = S.rows;
  HardNegatives hn;
  hn.text_for_row.assign(b, -1);
  hn.image_for_col.assign(b, -1);
  hn.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < b; ++i) {
    Best2 row, col;
    for (int j = 0; j < b; ++j) {
      if (j == i) continue;
      row.feed(j, S.at(i, j));
      col.feed(j, S.at(j, i));
    }
    hn.text_for_row[i] = row.idx;
    hn.image_for_col[i] = col.idx;
    if (row.idx >= 0 && row.second > -std::numeric_limits<double>::infinity())
      hn.min_gap = std::min(hn.min_gap, row.best - row.second);
    if (col.idx >= 0 && col.second > -std::numeric_limits<double>::infinity())
      hn.min_gap = std::min(hn.min_gap, col.best - col.second);
  }
  return hn;
}

double triplet_loss(const Matrix& S, double margin) {
  const HardNegatives hn = mine_hard_negatives(S);
  return triplet_loss(S, margin, hn, nullptr);
}

double triplet_loss(const Matrix& S, double margin, const HardNegatives& hn,
                    double* min_hinge_abs) {
  if (!(margin > 0.0)) throw ContractError("triplet_loss: margin must be positive");
  double loss = 0.0;
  double min_abs = std::numeric_limits<double>::infinity();
  for (int i = 0; i < S.rows; ++i) {
    if (hn.text_for_row[i] >= 0) {
      const double arg = margin - S.at(i, i) + S.at(i, hn.text_for_row[i]);
      loss += std::max(0.0, arg);
      min_abs = std::min(min_abs, std::fabs(arg));
    }
    if (hn.image_for_col[i] >= 0) {
      const double arg = margin - S.at(i, i) + S.at(hn.image_for_col[i], i);
      loss += std::max(0.0, arg);
      min_abs = std::min(min_abs, std::fabs(arg));
    }
  }
  if (min_hinge_abs) *min_hinge_abs = min_abs;
  return loss;
}

std::vector<std::vector<int>> rank_rows(const Matrix& S) {
  std::vector<std::vector<int>> out;
  out.reserve(S.rows);
  for (int i = 0; i < S.rows; ++i) {
    std::vector<int> order(S.cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return S.at(i, a) > S.at(i, b);
    });
    out.push_back(std::move(order));
  }
  return out;
}

double recall_at_k(const std::vector<std::vector<int>>& rank_lists,
                   const std::vector<int>& truth, int k) {
  if (rank_lists.size() != truth.size()) {
    throw ContractError("recall_at_k: one truth id per ranking required");
  }
  if (k < 1) throw ContractError("recall_at_k: k must be >= 1");
  if (rank_lists.empty()) throw ContractError("recall_at_k: no queries");
  int hits = 0;
  for (size_t q = 0; q < rank_lists.size(); ++q) {
    const auto& ranking = rank_lists[q];
    auto pos = std::find(ranking.begin(), ranking.end(), truth[q]);
    if (pos == ranking.end()) {
      throw ContractError("recall_at_k: truth id " + std::to_string(truth[q]) +
                          " absent from ranking of query " + std::to_string(q));
    }
    if (pos - ranking.begin() < k) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(rank_lists.size());
}

double rsum(const std::vector<double>& recalls) {
  if (recalls.size() != 6) throw ContractError("rsum: expected six recall values");
  double s = 0.0;
  for (double r : recalls) {
    if (r < 0.0 || r > 100.0) throw ContractError("rsum: recalls must lie in [0,100]");
    s += r;
  }
  return s;
}

}  // namespace scenematch
