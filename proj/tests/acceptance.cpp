// Release gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scenematch/gradcheck.hpp"
#include "scenematch/retrieval.hpp"
#include "scenematch/train.hpp"

using namespace scenematch;

namespace {

uint64_t lcg(uint64_t& st) {
  st = st * 6364136223846793005ULL + 1442695040888963407ULL;
  return st;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

SceneGraph bare_graph(uint64_t& st, int n, int d) {
  SceneGraph g;
  g.node_features = oracles::random_matrix(st, n, d);
  g.adjacency = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g.adjacency.at(i, j) = (lcg(st) >> 40) % 2 ? 1.0 : 0.0;
  g.relation_features = Matrix(0, d);
  g.attribute_features = Matrix(0, d);
  g.rel_incidence.resize(n);
  g.attr_incidence.resize(n);
  return g;
}

bool same_params(const ParamMap& a, const ParamMap& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [name, m] : a) {
    auto it = b.find(name);
    if (it == b.end() || !m.bit_equal(it->second)) return false;
  }
  return true;
}

// --- criterion bodies ---------------------------------------------------

bool gradient_oracle(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const GradcheckReport rep = run_gradcheck(GradcheckOptions{});
  const double secs = elapsed_s(t0);
  std::ostringstream os;
  os << "max_rel_err " << fmt(rep.max_rel_err) << ", " << fmt(secs) << "s";
  detail = os.str();
  return rep.pass && rep.max_rel_err < 1e-5 && secs < 120.0;
}

bool recall_sum_arithmetic(std::string& detail) {
  const double a = rsum({81.5, 97.6, 98.4, 58.2, 82.5, 91.8});
  const double b = rsum({81.1, 96.9, 99.0, 63.1, 90.2, 97.1});
  detail = fmt(a) + " and " + fmt(b);
  return a == 510.0 && b == 527.4;
}

bool initial_ratio(std::string& detail) {
  TrainConfig cfg;
  cfg.d = 8;
  cfg.K = 2;
  cfg.batch_size = 4;
  cfg.epochs = 1;
  const Dataset ds = synth_dataset(42, 4, 2, 2, 8);
  const TrainResult tr = train(cfg, ds);
  if (tr.logs.empty()) {
    detail = "no epoch was logged";
    return false;
  }
  const double want = std::exp(5.0) / (std::exp(5.0) + 1.0);
  const double ri = tr.logs[0].ratio_img;
  const double rt = tr.logs[0].ratio_txt;
  detail = "ratio " + fmt(ri);
  return std::fabs(ri - want) < 1e-9 && std::fabs(rt - want) < 1e-9;
}

bool toy_retrieval(std::string& detail, Checkpoint& trained, TrainConfig& used,
                   Dataset& toy) {
  const auto t0 = std::chrono::steady_clock::now();
  toy = synth_dataset(0, 64, 4, 5, 16);
  TrainConfig cfg;  // margin 0.2, delta 0.3, batch 64, Adam
  cfg.d = 16;
  cfg.epochs = 200;
  cfg.batch_size = 64;
  cfg.seed = 0;
  cfg.learning_rate = 2e-3;
  cfg.lr_decay_epoch = 1000;  // beyond the horizon: constant rate
  cfg.val_fraction = 0.0;
  cfg.early_stop = true;
  const TrainResult tr = train(cfg, toy);
  const RetrievalReport rep = evaluate(tr.checkpoint.tensors, cfg, toy);
  const double secs = elapsed_s(t0);
  trained = tr.checkpoint;
  used = cfg;
  std::ostringstream os;
  os << "R@1 " << rep.image_as_query[0] << "/" << rep.text_as_query[0] << " after "
     << tr.logs.size() << " epochs, " << fmt(secs) << "s";
  detail = os.str();
  return rep.image_as_query[0] == 100.0 && rep.text_as_query[0] == 100.0 &&
         tr.logs.size() <= 200 && secs < 600.0;
}

bool ablation_direction(std::string& detail, const Checkpoint& trained,
                        const TrainConfig& cfg, const Dataset& toy) {
  const double with_local = evaluate(trained.tensors, cfg, toy, 0.3).rsum;
  const double without = evaluate(trained.tensors, cfg, toy, 0.0).rsum;
  detail = "rsum " + fmt(without) + " <= " + fmt(with_local);
  return without <= with_local;
}

bool oracle_equivalence(std::string& detail) {
  uint64_t st = 0xACCE55;
  int checked = 0;
  double worst = 0.0;

  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>((lcg(st) >> 33) % 4);
    const int d = 4 + 2 * static_cast<int>((lcg(st) >> 33) % 2);
    const int K = 1 + static_cast<int>((lcg(st) >> 33) % 2);
    const SceneGraph g = bare_graph(st, n, d);
    ParamMap p;
    std::vector<Matrix> W, aL, aR;
    for (int k = 0; k < K; ++k) {
      const std::string hp = "img.obj.h" + std::to_string(k);
      W.push_back(oracles::random_matrix(st, d, d));
      aL.push_back(oracles::random_matrix(st, d, 1));
      aR.push_back(oracles::random_matrix(st, d, 1));
      p[hp + ".W"] = W.back();
      p[hp + ".aL"] = aL.back();
      p[hp + ".aR"] = aR.back();
    }
    const Matrix got = object_layer(g, g.node_features, p, "img", K);
    const Matrix want = oracles::object_layer_loops(g.adjacency, g.node_features, W,
                                                    aL, aR, kLeakySlope);
    worst = std::max(worst, oracles::max_rel_err(got, want));
    ++checked;
  }

  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>((lcg(st) >> 33) % 3);
    const int m = 2 + static_cast<int>((lcg(st) >> 33) % 3);
    const int d = 4 + 2 * static_cast<int>((lcg(st) >> 33) % 2);
    const Matrix F = oracles::random_matrix(st, n, d);
    const Matrix P = oracles::random_matrix(st, m, d);
    const Matrix ci = oracles::random_matrix(st, 1, d);
    const Matrix ct = oracles::random_matrix(st, 1, d);
    ParamMap p;
    p["cross.WK"] = oracles::random_matrix(st, d, d);
    p["cross.WQ"] = oracles::random_matrix(st, d, d);
    p["cross.WV"] = oracles::random_matrix(st, d, d);
    p["cross.WG"] = oracles::random_matrix(st, d, d);
    const Matrix got = guided_attention(F, P, ci, ct, p, 1);
    const Matrix Y = vconcat(F, P);
    const Matrix C = vconcat(repeat_rows(ci, n), repeat_rows(ct, m));
    const Matrix want = oracles::guided_attention_loops(
        Y, C, p.at("cross.WK"), p.at("cross.WQ"), p.at("cross.WV"), p.at("cross.WG"));
    worst = std::max(worst, oracles::max_rel_err(got, want));
    ++checked;
  }

  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>((lcg(st) >> 33) % 3);
    const int m = 2 + static_cast<int>((lcg(st) >> 33) % 3);
    const int d = 4 + 2 * static_cast<int>((lcg(st) >> 33) % 2);
    ParamMap p;
    p["align.Wr"] = oracles::random_matrix(st, d, d);
    p["align.Wt"] = oracles::random_matrix(st, d, d);
    const Matrix F = oracles::random_matrix(st, n, d);
    const Matrix P = oracles::random_matrix(st, m, d);
    const LocalAttentionM got = local_attention(F, P, p);
    const auto want =
        oracles::local_attention_loops(F, P, p.at("align.Wr"), p.at("align.Wt"));
    worst = std::max(worst, oracles::max_rel_err(got.A, want.A));
    worst = std::max(worst, oracles::max_rel_err(got.F_star, want.F_star));
    worst = std::max(worst, oracles::max_rel_err(got.P_star, want.P_star));
    ++checked;
  }

  int argmax_misses = 0;
  for (int t = 0; t < 100; ++t) {
    const int b = 2 + static_cast<int>((lcg(st) >> 33) % 7);
    const Matrix S = oracles::random_matrix(st, b, b, -2.0, 2.0);
    const HardNegatives got = mine_hard_negatives(S);
    const oracles::MinedLoops want = oracles::mine_loops(S);
    if (got.text_for_row != want.text_for_row || got.image_for_col != want.image_for_col)
      ++argmax_misses;
    ++checked;
  }

  std::ostringstream os;
  os << checked << " instances, worst rel err " << fmt(worst) << ", argmax misses "
     << argmax_misses;
  detail = os.str();
  return worst <= 1e-10 && argmax_misses == 0;
}

bool invariant_softmax(uint64_t& st) {
  for (int t = 0; t < 20; ++t) {
    const int r = 1 + static_cast<int>((lcg(st) >> 33) % 6);
    const int c = 1 + static_cast<int>((lcg(st) >> 33) % 6);
    const Matrix logits = oracles::random_matrix(st, r, c, -500.0, 500.0);
    const Matrix sm = row_softmax(logits);
    Matrix mask(r, c);
    for (double& e : mask.v) e = (lcg(st) >> 40) % 2 ? 1.0 : 0.0;
    for (int i = 0; i < r; ++i) mask.at(i, (lcg(st) >> 40) % c) = 1.0;
    const Matrix msm = masked_row_softmax(logits, mask);
    for (int i = 0; i < r; ++i) {
      double s = 0.0, ms = 0.0;
      for (int j = 0; j < c; ++j) {
        s += sm.at(i, j);
        ms += msm.at(i, j);
      }
      if (std::fabs(s - 1.0) > 1e-12 || std::fabs(ms - 1.0) > 1e-12) return false;
    }
  }
  return true;
}

bool invariant_permutation(uint64_t& st) {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    const PairRecord pr = synth_pair(seed + 900, 5, 4, 8, 2, 2);
    const SceneGraph& g = pr.image;
    const int n = g.n_nodes();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[lcg(st) % (i + 1)]);

    SceneGraph pg = g;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < g.dim(); ++j)
        pg.node_features.at(perm[i], j) = g.node_features.at(i, j);
      pg.rel_incidence[perm[i]] = g.rel_incidence[i];
      pg.attr_incidence[perm[i]] = g.attr_incidence[i];
      for (int j = 0; j < n; ++j)
        pg.adjacency.at(perm[i], perm[j]) = g.adjacency.at(i, j);
    }

    TrainConfig cfg;
    cfg.d = 8;
    cfg.K = 2;
    cfg.seed = seed + 31;
    const ParamMap p = init_params(cfg);
    const IntraResult base = intra_fuse(g, p, "img", 2);
    const IntraResult permuted = intra_fuse(pg, p, "img", 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < g.dim(); ++j)
        if (oracles::rel_err(permuted.nodes.at(perm[i], j), base.nodes.at(i, j)) >
            1e-12)
          return false;
    if (oracles::max_rel_err(permuted.agent, base.agent) > 1e-12) return false;
  }
  return true;
}

bool invariant_scale(uint64_t& st) {
  for (int t = 0; t < 10; ++t) {
    const Matrix a = oracles::random_matrix(st, 1, 8);
    const Matrix b = oracles::random_matrix(st, 1, 8);
    const double base = global_similarity(a, b);
    for (const double lambda : {1e-6, 3.0, 1e6}) {
      if (std::fabs(global_similarity(scale(a, lambda), b) - base) > 1e-12) return false;
      if (std::fabs(global_similarity(a, scale(b, lambda)) - base) > 1e-12) return false;
    }
  }
  return true;
}

bool invariant_shift(uint64_t& st) {
  // dyadic scores, dyadic margin, integer shifts: every hinge argument is
  // computed exactly, so equality must be bitwise
  Matrix S(5, 5);
  for (double& e : S.v) e = static_cast<double>(lcg(st) % 129) / 128.0;
  const double base = triplet_loss(S, 0.25);
  for (const double c : {1.0, -3.0, 256.0})
    if (triplet_loss(add_const(S, c), 0.25) != base) return false;
  return true;
}

bool invariant_checkpoint() {
  const Dataset ds = synth_dataset(21, 6, 3, 3, 8);
  TrainConfig cfg;
  cfg.d = 8;
  cfg.K = 2;
  cfg.batch_size = 3;
  cfg.epochs = 1;
  cfg.seed = 3;
  const TrainResult tr = train(cfg, ds);
  const std::string text = serialize_checkpoint(tr.checkpoint);
  const Checkpoint back = parse_checkpoint(text);
  return serialize_checkpoint(back) == text &&
         same_params(back.tensors, tr.checkpoint.tensors) &&
         same_params(back.adam_m, tr.checkpoint.adam_m) &&
         same_params(back.adam_v, tr.checkpoint.adam_v) &&
         back.rng_state == tr.checkpoint.rng_state;
}

bool invariant_determinism() {
  const Dataset ds = synth_dataset(8, 8, 3, 3, 8);
  TrainConfig cfg;
  cfg.d = 8;
  cfg.K = 2;
  cfg.batch_size = 4;
  cfg.epochs = 2;
  cfg.seed = 17;
  std::ostringstream log_a, log_b;
  const TrainResult a = train(cfg, ds, nullptr, &log_a);
  const TrainResult b = train(cfg, ds, nullptr, &log_b);
  return log_a.str() == log_b.str() && !log_a.str().empty() &&
         serialize_checkpoint(a.checkpoint) == serialize_checkpoint(b.checkpoint);
}

bool invariant_suite(std::string& detail) {
  uint64_t st = 0x1237;
  struct Item {
    const char* name;
    bool ok;
  };
  const Item items[] = {
      {"softmax", invariant_softmax(st)},
      {"permutation", invariant_permutation(st)},
      {"scale", invariant_scale(st)},
      {"shift", invariant_shift(st)},
      {"checkpoint", invariant_checkpoint()},
      {"determinism", invariant_determinism()},
  };
  std::ostringstream os;
  bool all = true;
  bool first = true;
  for (const Item& it : items) {
    if (!first) os << ", ";
    first = false;
    os << it.name << (it.ok ? " ok" : " FAILED");
    all = all && it.ok;
  }
  detail = os.str();
  return all;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int idx, const char* name, bool pass,
                          const std::string& detail) {
    std::cout << "[" << idx << "/7] " << name << ": " << (pass ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n" << std::flush;
    if (!pass) ++failures;
  };
  const auto guarded = [&](int idx, const char* name, auto&& body) {
    std::string detail;
    bool pass = false;
    try {
      pass = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report(idx, name, pass, detail);
  };

  guarded(1, "recorded gradients vs central differences", gradient_oracle);
  guarded(2, "recall-sum arithmetic on the reference rows", recall_sum_arithmetic);
  guarded(3, "epoch-0 fusion ratio under default logits", initial_ratio);

  Checkpoint trained;
  TrainConfig toy_cfg;
  Dataset toy;
  bool toy_ok = false;
  guarded(4, "toy retrieval trains to perfect recall", [&](std::string& d) {
    toy_ok = toy_retrieval(d, trained, toy_cfg, toy);
    return toy_ok;
  });
  guarded(5, "dropping the local term never helps", [&](std::string& d) {
    if (!toy_ok) {
      d = "skipped: toy model unavailable";
      return false;
    }
    return ablation_direction(d, trained, toy_cfg, toy);
  });

  guarded(6, "loop-oracle equivalence on random instances", oracle_equivalence);
  guarded(7, "invariant suite", invariant_suite);

  if (failures == 0) {
    std::cout << "all 7 criteria passed\n";
  } else {
    std::cout << failures << " criteria failed\n";
  }
  return failures == 0 ? 0 : 1;
}
