#include "scenematch/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json_util.hpp"
#include "scenematch/errors.hpp"
#include "scenematch/rng.hpp"

namespace scenematch {

void TrainConfig::validate() const {
  if (d < 4) throw ContractError("config: d must be >= 4");
  if (K < 1) throw ContractError("config: K must be >= 1");
  if (!(margin > 0.0)) throw ContractError("config: margin must be positive");
  if (delta < 0.0) throw ContractError("config: delta must be >= 0");
  if (batch_size < 1) throw ContractError("config: batch_size must be >= 1");
  if (epochs < 0) throw ContractError("config: epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ContractError("config: learning_rate must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
    throw ContractError("config: lr_decay_factor must be in (0,1]");
  if (attention_blocks < 1) throw ContractError("config: attention_blocks must be >= 1");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw ContractError("config: val_fraction must be in [0,1)");
  if (loss_reduction != "sum" && loss_reduction != "mean")
    throw ContractError("config: loss_reduction must be 'sum' or 'mean'");
}

TrainConfig parse_train_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return config_unjson(j);
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str());
}

std::string serialize_train_config(const TrainConfig& cfg) {
  return config_json(cfg).dump(1);
}

std::string EpochLog::line() const {
  std::ostringstream os;
  os.precision(17);
  os << epoch << "\t" << mean_loss << "\t" << lr << "\t" << ratio_img << "\t"
     << ratio_txt << "\t" << val_rsum;
  return os.str();
}

namespace {

struct Adam {
  ParamMap m, v;
  long long t = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  void init_like(const ParamMap& params) {
    for (const auto& [name, tensor] : params) {
      m.emplace(name, Matrix(tensor.rows, tensor.cols));
      v.emplace(name, Matrix(tensor.rows, tensor.cols));
    }
  }

  void step(ParamMap& params, const GradientSet& grads, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (auto& [name, tensor] : params) {
      const Matrix& g = grads.at(name);
      Matrix& mm = m.at(name);
      Matrix& vv = v.at(name);
      for (size_t i = 0; i < tensor.size(); ++i) {
        mm.v[i] = kBeta1 * mm.v[i] + (1.0 - kBeta1) * g.v[i];
        vv.v[i] = kBeta2 * vv.v[i] + (1.0 - kBeta2) * g.v[i] * g.v[i];
        const double mhat = mm.v[i] / c1;
        const double vhat = vv.v[i] / c2;
        tensor.v[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
      }
    }
  }
};

bool perfect_recall(const RetrievalReport& rep) {
  return rep.image_as_query[0] == 100.0 && rep.text_as_query[0] == 100.0;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& ds, const Checkpoint* resume,
                  std::ostream* log_stream) {
  cfg.validate();
  if (ds.records.empty()) throw ContractError("train: dataset is empty");
  if (ds.dimension != cfg.d) {
    throw DimensionError("train: dataset dimension " + std::to_string(ds.dimension) +
                         " does not match configured d " + std::to_string(cfg.d));
  }

  std::vector<const PairRecord*> all;
  all.reserve(ds.records.size());
  for (const auto& r : ds.records) all.push_back(&r);
  const int n_val = static_cast<int>(cfg.val_fraction * static_cast<double>(all.size()));
  std::vector<const PairRecord*> train_set(all.begin(), all.end() - n_val);
  std::vector<const PairRecord*> val_set(all.end() - n_val, all.end());
  if (val_set.empty()) val_set = train_set;

  TrainResult result;
  Rng rng(cfg.seed);
  ParamMap params;
  Adam adam;
  double lr = cfg.learning_rate;
  int start_epoch = 0;
  if (resume) {
    params = resume->tensors;
    adam.m = resume->adam_m;
    adam.v = resume->adam_v;
    adam.t = resume->adam_t;
    rng.load_state(resume->rng_state);
    lr = resume->lr;
    start_epoch = resume->epoch;
  } else {
    params = init_params(cfg);
    adam.init_like(params);
  }

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    if (epoch == cfg.decay_epoch() && epoch > 0) lr *= cfg.lr_decay_factor;

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    std::tie(log.ratio_img, log.ratio_txt) = fusion_ratios(params);

    std::vector<const PairRecord*> order = train_set;
    rng.shuffle(order);

    double loss_sum = 0.0;
    int batches = 0;
    for (size_t off = 0; off < order.size(); off += cfg.batch_size) {
      const size_t end = std::min(order.size(), off + cfg.batch_size);
      std::vector<const PairRecord*> batch(order.begin() + off, order.begin() + end);
      BatchGrads bg = batch_grads(params, cfg, batch);
      if (!std::isfinite(bg.forward.loss)) {
        std::ostringstream os;
        os << "train: non-finite loss in epoch " << epoch << ", batch " << batches
           << " (first pair " << batch.front()->pair_id << ")";
        throw NumericError(os.str());
      }
      adam.step(params, bg.grads, lr);
      loss_sum += bg.forward.loss;
      ++batches;
    }
    log.mean_loss = batches > 0 ? loss_sum / batches : 0.0;
    log.val_rsum = evaluate(params, cfg, val_set).rsum;

    result.logs.push_back(log);
    if (log_stream) *log_stream << log.line() << "\n" << std::flush;

    if (cfg.early_stop && log.mean_loss < 1e-3) {
      if (perfect_recall(evaluate(params, cfg, all))) break;
    }
  }

  Checkpoint cp;
  cp.config = cfg;
  cp.epoch = result.logs.empty() ? start_epoch : result.logs.back().epoch + 1;
  cp.lr = lr;
  cp.tensors = std::move(params);
  cp.adam_m = std::move(adam.m);
  cp.adam_v = std::move(adam.v);
  cp.adam_t = adam.t;
  cp.rng_state = rng.save_state();
  result.checkpoint = std::move(cp);
  return result;
}

}  // namespace scenematch
