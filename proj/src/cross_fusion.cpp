#include "scenematch/cross_fusion.hpp"

namespace scenematch {

std::pair<Matrix, Matrix> form_context(const Matrix& c_img, const Matrix& c_txt,
                                       const ParamMap& params) {
  if (c_img.rows != 1 || c_txt.rows != 1 || c_img.cols != c_txt.cols) {
    throw DimensionError("form_context: expected two 1xd agents, got " +
                         c_img.shape_str() + " and " + c_txt.shape_str());
  }
  EagerCtx cx;
  EagerParams pb{&params};
  return form_context_t(cx, pb, c_img, c_txt, c_img.cols);
}

Matrix guided_attention(const Matrix& F_nodes, const Matrix& P_nodes,
                        const Matrix& c_img_ctx, const Matrix& c_txt_ctx,
                        const ParamMap& params, int blocks) {
  if (F_nodes.cols != P_nodes.cols) {
    throw DimensionError("guided_attention: feature widths differ: " +
                         F_nodes.shape_str() + " vs " + P_nodes.shape_str());
  }
  EagerCtx cx;
  EagerParams pb{&params};
  Matrix Y = vconcat(F_nodes, P_nodes);
  Matrix C = vconcat(repeat_rows(c_img_ctx, F_nodes.rows),
                     repeat_rows(c_txt_ctx, P_nodes.rows));
  for (int b = 0; b < blocks; ++b) Y = guided_attention_t(cx, pb, Y, C, F_nodes.cols);
  return Y;
}

PooledSplitM split_and_pool(const Matrix& Y_u, int n, int m) {
  if (Y_u.rows != n + m) {
    throw DimensionError("split_and_pool: " + Y_u.shape_str() + " cannot split into " +
                         std::to_string(n) + "+" + std::to_string(m) + " rows");
  }
  EagerCtx cx;
  auto out = split_and_pool_t(cx, Y_u, n, m);
  return {out.F_u, out.P_u, out.f_bar, out.p_bar};
}

std::pair<Matrix, Matrix> update_context(const Matrix& c_img, const Matrix& f_bar,
                                         const Matrix& c_txt, const Matrix& p_bar,
                                         const ParamMap& params) {
  EagerCtx cx;
  EagerParams pb{&params};
  return update_context_t(cx, pb, c_img, f_bar, c_txt, p_bar);
}

}  // namespace scenematch
