#include "scenematch/retrieval.hpp"

#include <algorithm>
#include <ostream>

#include "scenematch/errors.hpp"

namespace scenematch {

namespace {

double recall_over(const Matrix& S, bool rows_as_query, int k, int gallery,
                   std::ostream* warn) {
  if (k > gallery && warn) {
    *warn << "warning: recall cutoff " << k << " exceeds gallery size " << gallery
          << "; scoring over the full gallery\n";
  }
  const Matrix view = rows_as_query ? S : transpose(S);
  std::vector<int> truth(view.rows);
  for (int i = 0; i < view.rows; ++i) truth[i] = i;
  return recall_at_k(rank_rows(view), truth, std::min(k, gallery));
}

}  // namespace

RetrievalReport evaluate(const ParamMap& params, const TrainConfig& cfg,
                         const std::vector<const PairRecord*>& records, double delta,
                         std::ostream* warn_stream) {
  if (records.empty()) throw ContractError("evaluate: empty dataset");
  const Matrix S = score_grid(params, cfg, records, delta);
  const int n = static_cast<int>(records.size());
  RetrievalReport rep;
  const int ks[3] = {1, 5, 10};
  for (int t = 0; t < 3; ++t) {
    rep.image_as_query[t] = recall_over(S, true, ks[t], n, warn_stream);
    rep.text_as_query[t] = recall_over(S, false, ks[t], n, warn_stream);
  }
  rep.rsum = rsum({rep.image_as_query[0], rep.image_as_query[1], rep.image_as_query[2],
                   rep.text_as_query[0], rep.text_as_query[1], rep.text_as_query[2]});
  return rep;
}

RetrievalReport evaluate(const ParamMap& params, const TrainConfig& cfg,
                         const Dataset& ds, double delta, std::ostream* warn_stream) {
  std::vector<const PairRecord*> recs;
  recs.reserve(ds.records.size());
  for (const auto& r : ds.records) recs.push_back(&r);
  return evaluate(params, cfg, recs, delta, warn_stream);
}

RetrieveResult retrieve(const ParamMap& params, const TrainConfig& cfg,
                        const SceneGraph& query, const Dataset& gallery, int topk,
                        bool explain, bool query_is_image) {
  if (gallery.records.empty()) throw ContractError("retrieve: empty gallery");
  if (topk < 1) throw ContractError("retrieve: topk must be >= 1");
  RetrieveResult out;
  std::vector<PairScore<Matrix>> scored;
  scored.reserve(gallery.records.size());
  for (const auto& rec : gallery.records) {
    scored.push_back(query_is_image
                         ? score_pair(params, cfg, query, rec.text)
                         : score_pair(params, cfg, rec.image, query));
  }
  std::vector<int> order(gallery.records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scored[a].score.v[0] > scored[b].score.v[0];
  });
  const int keep = std::min<int>(topk, static_cast<int>(order.size()));
  for (int r = 0; r < keep; ++r) {
    out.hits.push_back(
        {order[r], gallery.records[order[r]].pair_id, scored[order[r]].score.v[0]});
  }
  if (explain && !out.hits.empty()) {
    const Matrix& A = scored[out.hits[0].index].A;
    std::vector<RegionWordPair> cells;
    cells.reserve(static_cast<size_t>(A.rows) * A.cols);
    for (int i = 0; i < A.rows; ++i)
      for (int j = 0; j < A.cols; ++j) cells.push_back({i, j, A.at(i, j)});
    std::stable_sort(cells.begin(), cells.end(),
                     [](const RegionWordPair& a, const RegionWordPair& b) {
                       return a.score > b.score;
                     });
    const int keep_cells = std::min<int>(topk, static_cast<int>(cells.size()));
    out.explanation.assign(cells.begin(), cells.begin() + keep_cells);
  }
  return out;
}

}  // namespace scenematch
