#include "scenematch/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scenematch/errors.hpp"
#include "scenematch/rng.hpp"

namespace scenematch {

using nlohmann::json;

Neighborhood neighbors(const SceneGraph& g, int i) {
  if (i < 0 || i >= g.n_nodes()) {
    std::ostringstream os;
    os << "neighbors: node " << i << " out of range (n=" << g.n_nodes() << ")";
    throw ContractError(os.str());
  }
  Neighborhood nb;
  bool self_seen = false;
  for (int j = 0; j < g.n_nodes(); ++j) {
    if (g.adjacency.at(i, j) != 0.0) {
      nb.nodes.push_back(j);
      if (j == i) self_seen = true;
    }
  }
  if (!self_seen) {
    nb.nodes.push_back(i);
    std::sort(nb.nodes.begin(), nb.nodes.end());
  }
  nb.relations = g.rel_incidence[i];
  nb.attributes = g.attr_incidence[i];
  return nb;
}

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& rule) {
  throw ValidationError(ctx + ": " + rule);
}

}  // namespace

void validate_graph(const SceneGraph& g, const std::string& ctx) {
  const int n = g.n_nodes();
  const int d = g.dim();
  if (n < 1) fail(ctx, "graph must have at least one object node");
  if (d < 1) fail(ctx, "feature dimension must be positive");
  if (g.relation_features.rows > 0 && g.relation_features.cols != d)
    fail(ctx, "relation feature width differs from node feature width");
  if (g.attribute_features.rows > 0 && g.attribute_features.cols != d)
    fail(ctx, "attribute feature width differs from node feature width");
  if (g.adjacency.rows != n || g.adjacency.cols != n)
    fail(ctx, "adjacency must be square with one row per object node, got " +
                  g.adjacency.shape_str());
  for (double x : g.adjacency.v) {
    if (x != 0.0 && x != 1.0) fail(ctx, "adjacency entries must be 0 or 1");
  }
  if (static_cast<int>(g.rel_incidence.size()) != n)
    fail(ctx, "rel_incidence must list one entry per object node");
  if (static_cast<int>(g.attr_incidence.size()) != n)
    fail(ctx, "attr_incidence must list one entry per object node");

  std::vector<int> rel_count(g.n_rel(), 0);
  for (const auto& xs : g.rel_incidence) {
    for (int r : xs) {
      if (r < 0 || r >= g.n_rel()) fail(ctx, "relation index out of range");
      ++rel_count[r];
    }
  }
  for (int r = 0; r < g.n_rel(); ++r) {
    if (rel_count[r] == 0) fail(ctx, "relation " + std::to_string(r) +
                                         " is not incident to any node");
  }
  std::vector<int> attr_count(g.n_attr(), 0);
  for (const auto& xs : g.attr_incidence) {
    for (int a : xs) {
      if (a < 0 || a >= g.n_attr()) fail(ctx, "attribute index out of range");
      ++attr_count[a];
    }
  }
  for (int a = 0; a < g.n_attr(); ++a) {
    if (attr_count[a] != 1) fail(ctx, "attribute " + std::to_string(a) +
                                          " must be incident to exactly one node");
  }
  for (const Matrix* m :
       {&g.node_features, &g.relation_features, &g.attribute_features}) {
    for (double x : m->v) {
      if (!std::isfinite(x)) fail(ctx, "non-finite feature value");
    }
  }
}

const PairRecord* Dataset::find(const std::string& pair_id) const {
  for (const auto& r : records) {
    if (r.pair_id == pair_id) return &r;
  }
  return nullptr;
}

namespace {

Matrix matrix_from_json(const json& j, int expect_cols, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array of rows");
  Matrix m;
  m.rows = static_cast<int>(j.size());
  m.cols = expect_cols;
  if (m.rows > 0) {
    if (!j[0].is_array()) throw FormatError(what + ": rows must be arrays");
    m.cols = static_cast<int>(j[0].size());
  }
  m.v.reserve(static_cast<size_t>(m.rows) * m.cols);
  for (const auto& row : j) {
    if (static_cast<int>(row.size()) != m.cols)
      throw FormatError(what + ": ragged rows");
    for (const auto& x : row) {
      if (!x.is_number()) throw FormatError(what + ": non-numeric entry");
      m.v.push_back(x.get<double>());
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<int>> incidence_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array per node");
  std::vector<std::vector<int>> out;
  out.reserve(j.size());
  for (const auto& xs : j) {
    if (!xs.is_array()) throw FormatError(what + ": per-node entry must be an array");
    std::vector<int> ids;
    for (const auto& x : xs) {
      if (!x.is_number_integer()) throw FormatError(what + ": indices must be integers");
      ids.push_back(x.get<int>());
    }
    out.push_back(std::move(ids));
  }
  return out;
}

SceneGraph graph_from_json(const json& j, int d, const std::string& what) {
  for (const char* key :
       {"nodes", "relations", "attributes", "adjacency", "rel_incidence",
        "attr_incidence"}) {
    if (!j.contains(key)) throw FormatError(what + ": missing field '" + key + "'");
  }
  SceneGraph g;
  g.node_features = matrix_from_json(j["nodes"], d, what + ".nodes");
  g.relation_features = matrix_from_json(j["relations"], d, what + ".relations");
  g.attribute_features = matrix_from_json(j["attributes"], d, what + ".attributes");
  g.adjacency = matrix_from_json(j["adjacency"], 0, what + ".adjacency");
  g.rel_incidence = incidence_from_json(j["rel_incidence"], what + ".rel_incidence");
  g.attr_incidence = incidence_from_json(j["attr_incidence"], what + ".attr_incidence");
  if (g.relation_features.rows == 0) g.relation_features.cols = d;
  if (g.attribute_features.rows == 0) g.attribute_features.cols = d;
  if (g.node_features.cols != d)
    throw ValidationError(what + ": node feature width " +
                          std::to_string(g.node_features.cols) +
                          " differs from dataset dimension " + std::to_string(d));
  return g;
}

json graph_to_json(const SceneGraph& g) {
  json j;
  j["nodes"] = matrix_to_json(g.node_features);
  j["relations"] = matrix_to_json(g.relation_features);
  j["attributes"] = matrix_to_json(g.attribute_features);
  json adj = json::array();
  for (int i = 0; i < g.adjacency.rows; ++i) {
    json row = json::array();
    for (int k = 0; k < g.adjacency.cols; ++k)
      row.push_back(static_cast<int>(g.adjacency.at(i, k)));
    adj.push_back(std::move(row));
  }
  j["adjacency"] = std::move(adj);
  j["rel_incidence"] = g.rel_incidence;
  j["attr_incidence"] = g.attr_incidence;
  return j;
}

}  // namespace

Dataset parse_dataset(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("dataset: ") + e.what());
  }
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw FormatError("dataset: missing integer field 'dimension'");
  if (!j.contains("records") || !j["records"].is_array())
    throw FormatError("dataset: missing array field 'records'");
  Dataset ds;
  ds.dimension = j["dimension"].get<int>();
  if (ds.dimension < 1) throw ValidationError("dataset: dimension must be positive");
  int idx = 0;
  for (const auto& rec : j["records"]) {
    const std::string where = "record " + std::to_string(idx);
    if (!rec.contains("pair_id") || !rec["pair_id"].is_string())
      throw FormatError(where + ": missing string field 'pair_id'");
    PairRecord pr;
    pr.pair_id = rec["pair_id"].get<std::string>();
    if (!rec.contains("image") || !rec.contains("text"))
      throw FormatError(where + " (" + pr.pair_id + "): needs 'image' and 'text' graphs");
    pr.image = graph_from_json(rec["image"], ds.dimension, pr.pair_id + ".image");
    pr.text = graph_from_json(rec["text"], ds.dimension, pr.pair_id + ".text");
    validate_graph(pr.image, pr.pair_id + ".image");
    validate_graph(pr.text, pr.pair_id + ".text");
    ds.records.push_back(std::move(pr));
    ++idx;
  }
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  json j;
  j["dimension"] = ds.dimension;
  json recs = json::array();
  for (const auto& r : ds.records) {
    json rec;
    rec["pair_id"] = r.pair_id;
    rec["image"] = graph_to_json(r.image);
    rec["text"] = graph_to_json(r.text);
    recs.push_back(std::move(rec));
  }
  j["records"] = std::move(recs);
  return j.dump(1);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("dataset: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("dataset: cannot write " + path);
  out << serialize_dataset(ds) << "\n";
}

SceneGraph parse_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("graph: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("graph: ") + e.what());
  }
  if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty())
    throw FormatError("graph: missing non-empty 'nodes'");
  const int d = static_cast<int>(j["nodes"][0].size());
  SceneGraph g = graph_from_json(j, d, path);
  validate_graph(g, path);
  return g;
}

namespace {

void normalize_row(Matrix& m, int i) {
  double s = 0.0;
  for (int j = 0; j < m.cols; ++j) s += m.at(i, j) * m.at(i, j);
  s = std::sqrt(s);
  if (s == 0.0) {
    m.at(i, 0) = 1.0;
    return;
  }
  for (int j = 0; j < m.cols; ++j) m.at(i, j) /= s;
}

Matrix random_unit_rows(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m.at(i, j) = rng.normal();
    normalize_row(m, i);
  }
  return m;
}

// Rows = unit-normalized mix of the shared latent and per-row noise. The mix
// keeps matched image/text features correlated through the common latent.
Matrix planted_rows(Rng& rng, const Matrix& latent, int rows, double mix) {
  const int d = latent.cols;
  Matrix m(rows, d);
  for (int i = 0; i < rows; ++i) {
    Matrix noise = random_unit_rows(rng, 1, d);
    for (int j = 0; j < d; ++j)
      m.at(i, j) = mix * latent.v[j] + (1.0 - mix) * noise.v[j];
    normalize_row(m, i);
  }
  return m;
}

Matrix random_adjacency(Rng& rng, int n) {
  Matrix adj(n, n);
  for (int i = 1; i < n; ++i) {
    const int j = rng.index(i);  // attach to an earlier node: connected graph
    adj.at(i, j) = adj.at(j, i) = 1.0;
  }
  for (int extra = 0; extra < n / 2; ++extra) {
    const int i = rng.index(n);
    const int j = rng.index(n);
    if (i != j) adj.at(i, j) = adj.at(j, i) = 1.0;
  }
  return adj;
}

SceneGraph synth_graph(Rng& rng, const Matrix& latent, int n, int d, int n_rel,
                       int n_attr, double mix) {
  SceneGraph g;
  g.node_features = planted_rows(rng, latent, n, mix);
  g.relation_features = random_unit_rows(rng, n_rel, d);
  g.attribute_features = random_unit_rows(rng, n_attr, d);
  g.adjacency = random_adjacency(rng, n);
  g.rel_incidence.assign(n, {});
  g.attr_incidence.assign(n, {});
  for (int r = 0; r < n_rel; ++r) {
    const int u = rng.index(n);
    g.rel_incidence[u].push_back(r);
    if (n > 1 && rng.uniform() < 0.5) {
      const int v = rng.index(n);
      if (v != u) g.rel_incidence[v].push_back(r);  // optional second endpoint
    }
  }
  for (int a = 0; a < n_attr; ++a) g.attr_incidence[rng.index(n)].push_back(a);
  return g;
}

constexpr double kPlantMix = 0.75;

}  // namespace

PairRecord synth_pair(uint64_t seed, int n, int m, int d, int n_rel, int n_attr) {
  if (n < 1 || m < 1 || n_rel < 1 || n_attr < 1)
    throw ContractError("synth_pair: counts must be >= 1");
  if (d < 4) throw ContractError("synth_pair: d must be >= 4");
  Rng rng(seed);
  const Matrix latent = random_unit_rows(rng, 1, d);
  PairRecord pr;
  pr.pair_id = "pair-" + std::to_string(seed);
  pr.image = synth_graph(rng, latent, n, d, n_rel, n_attr, kPlantMix);
  pr.text = synth_graph(rng, latent, m, d, n_rel, n_attr, kPlantMix);
  validate_graph(pr.image, pr.pair_id + ".image");
  validate_graph(pr.text, pr.pair_id + ".text");
  return pr;
}

Dataset synth_dataset(uint64_t seed, int pairs, int n, int m, int d) {
  if (pairs < 1) throw ContractError("synth_dataset: pairs must be >= 1");
  Dataset ds;
  ds.dimension = d;
  const int n_rel = std::max(1, n / 2);
  const int n_attr = std::max(1, n / 2);
  for (int i = 0; i < pairs; ++i) {
    // spread record seeds; golden-ratio stride avoids adjacent-seed streams
    const uint64_t rec_seed = seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(i + 1);
    PairRecord pr = synth_pair(rec_seed, n, m, d, n_rel, n_attr);
    std::ostringstream id;
    id << "p" << i;
    pr.pair_id = id.str();
    ds.records.push_back(std::move(pr));
  }
  return ds;
}

}  // namespace scenematch
