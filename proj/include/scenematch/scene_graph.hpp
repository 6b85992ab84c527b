#pragma once

#include <string>
#include <vector>

#include "scenematch/matrix.hpp"

namespace scenematch {

// Heterogeneous graph for one modality: object nodes with feature rows,
// relation and attribute feature rows attached to nodes through incidence
// lists, an object-object adjacency matrix, and an all-ones agent seed
// vector summarizing the modality after fusion.
struct SceneGraph {
  Matrix node_features;              // n x d
  Matrix relation_features;          // n_rel x d (may have 0 rows)
  Matrix attribute_features;         // n_attr x d (may have 0 rows)
  Matrix adjacency;                  // n x n, entries 0/1
  std::vector<std::vector<int>> rel_incidence;   // per node, relation indices
  std::vector<std::vector<int>> attr_incidence;  // per node, attribute indices

  int n_nodes() const { return node_features.rows; }
  int n_rel() const { return relation_features.rows; }
  int n_attr() const { return attribute_features.rows; }
  int dim() const { return node_features.cols; }

  Matrix agent_init() const { return Matrix::ones(1, dim()); }
};

struct Neighborhood {
  std::vector<int> nodes;       // adjacency row plus the node itself
  std::vector<int> relations;   // incident relation indices
  std::vector<int> attributes;  // incident attribute indices
};

// Adjacent node/relation/attribute index sets of node i. The node itself is
// always a member of its own node set so attention over it is never empty.
Neighborhood neighbors(const SceneGraph& g, int i);

// Throws ValidationError naming the broken rule (prefixed with ctx, normally
// the pair id) if any structural invariant fails.
void validate_graph(const SceneGraph& g, const std::string& ctx);

struct PairRecord {
  std::string pair_id;
  SceneGraph image;
  SceneGraph text;
};

struct Dataset {
  int dimension = 0;
  std::vector<PairRecord> records;

  const PairRecord* find(const std::string& pair_id) const;
};

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset parse_dataset(const std::string& json_text);
std::string serialize_dataset(const Dataset& ds);

// Parse a single graph document ({"nodes": ...}), used for file-based
// retrieval queries.
SceneGraph parse_graph_file(const std::string& path);

// Deterministic matched pair: both graphs mix a shared unit latent vector
// into every node feature, so matched pairs score higher than mismatches
// before any training. Feature rows are unit-norm.
PairRecord synth_pair(uint64_t seed, int n, int m, int d, int n_rel, int n_attr);

// pairs records built from per-record seeds derived from seed.
Dataset synth_dataset(uint64_t seed, int pairs, int n, int m, int d);

}  // namespace scenematch
