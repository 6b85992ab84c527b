#include "scenematch/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scenematch/errors.hpp"
#include "scenematch/model.hpp"

namespace scenematch {

namespace {

// Perturbations of size eps shift activation inputs and score gaps by at most
// a few eps; instances closer than these margins to a nondifferentiable point
// are rejected and redrawn.
constexpr double kMinKinkMargin = 2e-5;
constexpr double kMinMiningGap = 1e-4;
constexpr double kMinHingeMargin = 1e-4;

std::vector<PairRecord> make_batch(uint64_t seed, const GradcheckOptions& opt) {
  std::vector<PairRecord> recs;
  recs.reserve(opt.batch);
  for (int i = 0; i < opt.batch; ++i) {
    recs.push_back(synth_pair(seed * 1000003ULL + static_cast<uint64_t>(i), opt.n,
                              opt.m, opt.d, std::max(1, opt.n / 2),
                              std::max(1, opt.n / 2)));
  }
  return recs;
}

}  // namespace

std::string GradcheckReport::summary() const {
  std::ostringstream os;
  os.precision(3);
  for (const auto& [name, err] : per_param)
    os << name << "\t" << std::scientific << err << "\n";
  os << (pass ? "PASS" : "FAIL") << "\tmax_rel_err=" << std::scientific << max_rel_err
     << "\tworst=" << worst_param << "\tseed=" << seed_used << "\tattempts=" << attempts;
  return os.str();
}

GradcheckReport run_gradcheck(const GradcheckOptions& opt) {
  TrainConfig cfg;
  cfg.d = opt.d;
  cfg.K = opt.K;
  cfg.batch_size = opt.batch;

  GradcheckReport rep;
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    const uint64_t seed = opt.seed + static_cast<uint64_t>(attempt);
    cfg.seed = seed;
    rep.attempts = attempt + 1;
    rep.seed_used = seed;

    const std::vector<PairRecord> recs = make_batch(seed, opt);
    std::vector<const PairRecord*> batch;
    for (const auto& r : recs) batch.push_back(&r);

    const ParamMap params = init_params(cfg);
    BatchGrads bg = batch_grads(params, cfg, batch);
    if (bg.min_kink_margin < kMinKinkMargin ||
        bg.forward.mined.min_gap < kMinMiningGap ||
        bg.forward.min_hinge_abs < kMinHingeMargin) {
      continue;  // too close to a kink; redraw
    }

    GradientSet ad = bg.grads;
    if (opt.corrupt && !ad.empty()) ad.begin()->second.v[0] += 1e-3;

    const auto loss_fn = [&](const ParamMap& p) {
      return batch_loss(p, cfg, batch).loss;
    };
    const GradientSet fd = finite_diff_grads(loss_fn, params, opt.eps);

    rep.per_param.clear();
    rep.max_rel_err = 0.0;
    for (const auto& [name, g_fd] : fd) {
      const Matrix& g_ad = ad.at(name);
      double worst = 0.0;
      for (size_t i = 0; i < g_fd.size(); ++i) {
        const double rel =
            std::fabs(g_ad.v[i] - g_fd.v[i]) / std::max(1.0, std::fabs(g_fd.v[i]));
        worst = std::max(worst, rel);
      }
      rep.per_param.emplace_back(name, worst);
      if (worst > rep.max_rel_err) {
        rep.max_rel_err = worst;
        rep.worst_param = name;
      }
    }
    rep.pass = rep.max_rel_err < opt.tolerance;
    return rep;
  }
  throw NumericError(
      "gradcheck: no kink-free instance found within the attempt budget");
}

}  // namespace scenematch
