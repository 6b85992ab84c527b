#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "scenematch/cross_fusion.hpp"

using namespace scenematch;

namespace {

void add_mlp(ParamMap& p, const std::string& prefix, const Matrix& W1, const Matrix& b1,
             const Matrix& W2, const Matrix& b2) {
  p[prefix + ".W1"] = W1;
  p[prefix + ".b1"] = b1;
  p[prefix + ".W2"] = W2;
  p[prefix + ".b2"] = b2;
}

void add_random_mlp(ParamMap& p, const std::string& prefix, uint64_t& st, int in,
                    int hidden, int out) {
  add_mlp(p, prefix, oracles::random_matrix(st, in, hidden),
          oracles::random_matrix(st, 1, hidden),
          oracles::random_matrix(st, hidden, out), oracles::random_matrix(st, 1, out));
}

ParamMap attention_params(uint64_t& st, int d) {
  ParamMap p;
  p["cross.WK"] = oracles::random_matrix(st, d, d);
  p["cross.WQ"] = oracles::random_matrix(st, d, d);
  p["cross.WV"] = oracles::random_matrix(st, d, d);
  p["cross.WG"] = oracles::random_matrix(st, d, d);
  return p;
}

// direct evaluation of the shared two-layer perceptron
Matrix mlp_loops(const Matrix& x, const Matrix& W1, const Matrix& b1, const Matrix& W2,
                 const Matrix& b2) {
  Matrix hid = oracles::naive_matmul(x, W1);
  for (int i = 0; i < hid.rows; ++i)
    for (int j = 0; j < hid.cols; ++j)
      hid.at(i, j) = oracles::elu1(hid.at(i, j) + b1.at(0, j));
  Matrix out = oracles::naive_matmul(hid, W2);
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += b2.at(0, j);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("cross_fusion");

TEST_CASE("form_context: identity mixer returns the agents unchanged") {
  const int d = 3;
  ParamMap p;
  add_mlp(p, "cross.ctx", Matrix::identity(2 * d), Matrix::zeros(1, 2 * d),
          Matrix::identity(2 * d), Matrix::zeros(1, 2 * d));
  // nonnegative inputs ride through the elu unchanged
  const Matrix c_img{{0.2, 0.0, 0.9}};
  const Matrix c_txt{{0.5, 0.4, 0.1}};
  const auto [ci, ct] = form_context(c_img, c_txt, p);
  CHECK(ci.bit_equal(c_img));
  CHECK(ct.bit_equal(c_txt));
}

TEST_CASE("form_context: zero mixer collapses to zero vectors") {
  const int d = 4;
  ParamMap p;
  add_mlp(p, "cross.ctx", Matrix::zeros(2 * d, 2 * d), Matrix::zeros(1, 2 * d),
          Matrix::zeros(2 * d, 2 * d), Matrix::zeros(1, 2 * d));
  uint64_t st = 21;
  const auto [ci, ct] = form_context(oracles::random_matrix(st, 1, d),
                                     oracles::random_matrix(st, 1, d), p);
  CHECK(ci.bit_equal(Matrix::zeros(1, d)));
  CHECK(ct.bit_equal(Matrix::zeros(1, d)));
}

TEST_CASE("form_context matches a concat-affine-split oracle") {
  uint64_t st = 300;
  for (int t = 0; t < 10; ++t) {
    const int d = 3 + t % 4;
    ParamMap p;
    add_random_mlp(p, "cross.ctx", st, 2 * d, 2 * d, 2 * d);
    const Matrix c_img = oracles::random_matrix(st, 1, d);
    const Matrix c_txt = oracles::random_matrix(st, 1, d);

    Matrix joint(1, 2 * d);
    for (int j = 0; j < d; ++j) {
      joint.at(0, j) = c_img.at(0, j);
      joint.at(0, d + j) = c_txt.at(0, j);
    }
    const Matrix want = mlp_loops(joint, p.at("cross.ctx.W1"), p.at("cross.ctx.b1"),
                                  p.at("cross.ctx.W2"), p.at("cross.ctx.b2"));

    const auto [ci, ct] = form_context(c_img, c_txt, p);
    for (int j = 0; j < d; ++j) {
      CHECK(oracles::rel_err(ci.at(0, j), want.at(0, j)) < 1e-12);
      CHECK(oracles::rel_err(ct.at(0, j), want.at(0, d + j)) < 1e-12);
    }
  }
}

TEST_CASE("guided attention with all-ones guide is plain attention plus residual") {
  uint64_t st = 42;
  const int n = 2, m = 3, d = 4;
  ParamMap p = attention_params(st, d);
  p["cross.WG"] = Matrix::identity(d);
  const Matrix F = oracles::random_matrix(st, n, d);
  const Matrix P = oracles::random_matrix(st, m, d);
  const Matrix ones_ctx = Matrix::ones(1, d);  // G becomes all ones

  const Matrix got = guided_attention(F, P, ones_ctx, ones_ctx, p, 1);

  const Matrix Y = vconcat(F, P);
  const Matrix Q = matmul(Y, p.at("cross.WQ"));
  const Matrix Km = matmul(Y, p.at("cross.WK"));
  const Matrix V = matmul(Y, p.at("cross.WV"));
  const Matrix plain = add(
      matmul(row_softmax(scale(matmul(Q, transpose(Km)), 1.0 / std::sqrt(4.0))), V), Y);
  CHECK(oracles::max_rel_err(got, plain) < 1e-13);
}

TEST_CASE("guided attention with a zero value path is the identity") {
  uint64_t st = 43;
  const int d = 5;
  ParamMap p = attention_params(st, d);
  p["cross.WV"] = Matrix::zeros(d, d);
  const Matrix F = oracles::random_matrix(st, 3, d);
  const Matrix P = oracles::random_matrix(st, 2, d);
  const Matrix c = oracles::random_matrix(st, 1, d);
  CHECK(guided_attention(F, P, c, c, p, 1).bit_equal(vconcat(F, P)));
}

TEST_CASE("guided attention matches the loop oracle") {
  uint64_t st = 707;
  for (int t = 0; t < 10; ++t) {
    const int n = 2, m = 3, d = 4;
    ParamMap p = attention_params(st, d);
    const Matrix F = oracles::random_matrix(st, n, d);
    const Matrix P = oracles::random_matrix(st, m, d);
    const Matrix ci = oracles::random_matrix(st, 1, d);
    const Matrix ct = oracles::random_matrix(st, 1, d);

    const Matrix got = guided_attention(F, P, ci, ct, p, 1);

    const Matrix Y = vconcat(F, P);
    const Matrix C = vconcat(repeat_rows(ci, n), repeat_rows(ct, m));
    const Matrix want = oracles::guided_attention_loops(
        Y, C, p.at("cross.WK"), p.at("cross.WQ"), p.at("cross.WV"), p.at("cross.WG"));
    CHECK(oracles::max_rel_err(got, want) < 1e-10);
  }
}

TEST_CASE("stacked attention blocks reuse one parameter set") {
  uint64_t st = 61;
  const int d = 4;
  ParamMap p = attention_params(st, d);
  const Matrix F = oracles::random_matrix(st, 2, d);
  const Matrix P = oracles::random_matrix(st, 3, d);
  const Matrix ci = oracles::random_matrix(st, 1, d);
  const Matrix ct = oracles::random_matrix(st, 1, d);

  const Matrix twice = guided_attention(F, P, ci, ct, p, 2);
  const Matrix once = guided_attention(F, P, ci, ct, p, 1);
  const Matrix again =
      guided_attention(row_slice(once, 0, 2), row_slice(once, 2, 3), ci, ct, p, 1);
  CHECK(twice.bit_equal(again));
}

TEST_CASE("split_and_pool means and degenerate sizes") {
  const Matrix v{{0.5, -1.5, 2.0}};
  const Matrix Y = vconcat(vconcat(v, v), v);  // 3 identical rows
  const PooledSplitM one = split_and_pool(Y, 2, 1);
  CHECK(one.f_bar.bit_equal(v));
  CHECK(one.p_bar.bit_equal(v));  // n = 1 side is the row itself
  CHECK(one.F_u.rows == 2);
  CHECK(one.P_u.rows == 1);

  uint64_t st = 9;
  const Matrix R = oracles::random_matrix(st, 5, 3);
  const PooledSplitM sp = split_and_pool(R, 2, 3);
  for (int j = 0; j < 3; ++j) {
    double f = 0.0, p = 0.0;
    for (int i = 0; i < 2; ++i) f += R.at(i, j) / 2.0;
    for (int i = 2; i < 5; ++i) p += R.at(i, j) / 3.0;
    CHECK(oracles::rel_err(sp.f_bar.at(0, j), f) < 1e-14);
    CHECK(oracles::rel_err(sp.p_bar.at(0, j), p) < 1e-14);
  }
}

TEST_CASE("update_context: constant map returns its bias") {
  const int d = 3;
  ParamMap p;
  add_mlp(p, "cross.upd_img", Matrix::zeros(2 * d, 2 * d), Matrix::zeros(1, 2 * d),
          Matrix::zeros(2 * d, d), Matrix{{0.1, 0.2, 0.3}});
  add_mlp(p, "cross.upd_txt", Matrix::zeros(2 * d, 2 * d), Matrix::zeros(1, 2 * d),
          Matrix::zeros(2 * d, d), Matrix{{0.7, 0.8, 0.9}});
  uint64_t st = 12;
  const auto [ci, ct] = update_context(oracles::random_matrix(st, 1, d),
                                       oracles::random_matrix(st, 1, d),
                                       oracles::random_matrix(st, 1, d),
                                       oracles::random_matrix(st, 1, d), p);
  CHECK(ci.bit_equal(Matrix{{0.1, 0.2, 0.3}}));
  CHECK(ct.bit_equal(Matrix{{0.7, 0.8, 0.9}}));
}

TEST_CASE("update_context: first-half projection passes the agent through") {
  const int d = 2;
  Matrix pick_first(2 * d, d);
  pick_first.at(0, 0) = 1.0;
  pick_first.at(1, 1) = 1.0;
  ParamMap p;
  add_mlp(p, "cross.upd_img", Matrix::identity(2 * d), Matrix::zeros(1, 2 * d),
          pick_first, Matrix::zeros(1, d));
  add_mlp(p, "cross.upd_txt", Matrix::identity(2 * d), Matrix::zeros(1, 2 * d),
          pick_first, Matrix::zeros(1, d));
  const Matrix c_img{{0.25, 0.75}};
  const Matrix c_txt{{0.5, 0.125}};
  uint64_t st = 77;
  const Matrix pooled_i = oracles::random_matrix(st, 1, d, 0.0, 1.0);
  const Matrix pooled_t = oracles::random_matrix(st, 1, d, 0.0, 1.0);
  const auto [ci, ct] = update_context(c_img, pooled_i, c_txt, pooled_t, p);
  CHECK(ci.bit_equal(c_img));
  CHECK(ct.bit_equal(c_txt));
}

TEST_CASE("update_context matches the loop oracle") {
  uint64_t st = 880;
  for (int t = 0; t < 8; ++t) {
    const int d = 3 + t % 3;
    ParamMap p;
    add_random_mlp(p, "cross.upd_img", st, 2 * d, 2 * d, d);
    add_random_mlp(p, "cross.upd_txt", st, 2 * d, 2 * d, d);
    const Matrix c_img = oracles::random_matrix(st, 1, d);
    const Matrix f_bar = oracles::random_matrix(st, 1, d);
    const Matrix c_txt = oracles::random_matrix(st, 1, d);
    const Matrix p_bar = oracles::random_matrix(st, 1, d);

    const auto [ci, ct] = update_context(c_img, f_bar, c_txt, p_bar, p);

    const Matrix want_i =
        mlp_loops(hconcat(c_img, f_bar), p.at("cross.upd_img.W1"),
                  p.at("cross.upd_img.b1"), p.at("cross.upd_img.W2"),
                  p.at("cross.upd_img.b2"));
    const Matrix want_t =
        mlp_loops(hconcat(c_txt, p_bar), p.at("cross.upd_txt.W1"),
                  p.at("cross.upd_txt.b1"), p.at("cross.upd_txt.W2"),
                  p.at("cross.upd_txt.b2"));
    CHECK(oracles::max_rel_err(ci, want_i) < 1e-12);
    CHECK(oracles::max_rel_err(ct, want_t) < 1e-12);
  }
}

TEST_SUITE_END();
