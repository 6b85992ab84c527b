#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scenematch/model.hpp"

namespace scenematch {

// Score every image against every text, rank both directions, and report
// R@1/5/10 plus their sum. delta overrides cfg.delta when >= 0. Galleries
// smaller than a recall cutoff are scored over what exists, with a warning to
// warn_stream when given.
RetrievalReport evaluate(const ParamMap& params, const TrainConfig& cfg,
                         const std::vector<const PairRecord*>& records,
                         double delta = -1.0, std::ostream* warn_stream = nullptr);
RetrievalReport evaluate(const ParamMap& params, const TrainConfig& cfg,
                         const Dataset& ds, double delta = -1.0,
                         std::ostream* warn_stream = nullptr);

struct RankedHit {
  int index = -1;
  std::string id;
  double score = 0.0;
};

// One region-word cell of the local similarity grid.
struct RegionWordPair {
  int region = -1;
  int word = -1;
  double score = 0.0;
};

struct RetrieveResult {
  std::vector<RankedHit> hits;              // best first, at most topk
  std::vector<RegionWordPair> explanation;  // top cells for the best hit
};

// Rank gallery entries against one query graph. query_is_image selects the
// direction: true scores (query, gallery text graphs), false scores
// (gallery image graphs, query). With explain set, the best hit's region-word
// grid is mined for its strongest min(topk, n*m) cells.
RetrieveResult retrieve(const ParamMap& params, const TrainConfig& cfg,
                        const SceneGraph& query, const Dataset& gallery, int topk,
                        bool explain, bool query_is_image = true);

}  // namespace scenematch
