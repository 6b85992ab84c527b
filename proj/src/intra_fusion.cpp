#include "scenematch/intra_fusion.hpp"

namespace scenematch {

Matrix attention_mask(const SceneGraph& g) {
  Matrix m = g.adjacency;
  for (int i = 0; i < m.rows; ++i) m.at(i, i) = 1.0;
  return m;
}

SceneGraph with_agent(const SceneGraph& g) {
  const int n = g.n_nodes();
  SceneGraph ext;
  ext.node_features = vconcat(g.node_features, g.agent_init());
  ext.relation_features = g.relation_features;
  ext.attribute_features = g.attribute_features;
  ext.adjacency = Matrix(n + 1, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ext.adjacency.at(i, j) = g.adjacency.at(i, j);
  for (int i = 0; i < n; ++i) {
    ext.adjacency.at(i, n) = 1.0;
    ext.adjacency.at(n, i) = 1.0;
  }
  ext.rel_incidence = g.rel_incidence;
  ext.rel_incidence.emplace_back();
  ext.attr_incidence = g.attr_incidence;
  ext.attr_incidence.emplace_back();
  return ext;
}

Matrix incidence_mean(const Matrix& feats, const std::vector<std::vector<int>>& inc) {
  Matrix out(static_cast<int>(inc.size()), feats.cols);
  for (size_t i = 0; i < inc.size(); ++i) {
    if (inc[i].empty()) continue;
    for (int r : inc[i])
      for (int j = 0; j < feats.cols; ++j)
        out.at(static_cast<int>(i), j) += feats.at(r, j);
    const double inv = 1.0 / static_cast<double>(inc[i].size());
    for (int j = 0; j < feats.cols; ++j) out.at(static_cast<int>(i), j) *= inv;
  }
  return out;
}

Matrix incidence_mask(const std::vector<std::vector<int>>& inc, int d) {
  Matrix out(static_cast<int>(inc.size()), d);
  for (size_t i = 0; i < inc.size(); ++i) {
    if (inc[i].empty()) continue;
    for (int j = 0; j < d; ++j) out.at(static_cast<int>(i), j) = 1.0;
  }
  return out;
}

Matrix object_layer(const SceneGraph& g, const Matrix& H0, const ParamMap& params,
                    const std::string& prefix, int K) {
  if (H0.rows != g.n_nodes()) {
    throw DimensionError("object_layer: feature rows " + H0.shape_str() +
                         " do not match node count " + std::to_string(g.n_nodes()));
  }
  EagerCtx cx;
  EagerParams pb{&params};
  return object_layer_t(cx, pb, attention_mask(g), H0, prefix, K);
}

Matrix relation_layer(const SceneGraph& g, const ParamMap& params,
                      const std::string& prefix) {
  EagerCtx cx;
  EagerParams pb{&params};
  return incidence_layer_t(cx, pb, prefix + ".rel", g.relation_features,
                           g.rel_incidence, g.dim());
}

Matrix attribute_layer(const SceneGraph& g, const ParamMap& params,
                       const std::string& prefix) {
  EagerCtx cx;
  EagerParams pb{&params};
  return incidence_layer_t(cx, pb, prefix + ".att", g.attribute_features,
                           g.attr_incidence, g.dim());
}

Matrix layer_fusion(const Matrix& h_obj, const Matrix& h_rel, const Matrix& h_att,
                    double alpha, double beta) {
  EagerCtx cx;
  return layer_fusion_t(cx, h_obj, h_rel, h_att, Matrix::scalar(alpha),
                        Matrix::scalar(beta));
}

IntraResult intra_fuse(const SceneGraph& g, const ParamMap& params,
                       const std::string& prefix, int K) {
  EagerCtx cx;
  EagerParams pb{&params};
  auto out = intra_fuse_t(cx, pb, g, prefix, K);
  return {std::move(out.nodes), std::move(out.agent)};
}

}  // namespace scenematch
