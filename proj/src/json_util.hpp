#pragma once

// Internal JSON helpers shared by config, checkpoint, and CLI code. Doubles
// are emitted with shortest round-trip decimal encoding by the json library,
// so value -> text -> value is bit-exact.

#include <json.hpp>

#include "scenematch/config.hpp"
#include "scenematch/errors.hpp"
#include "scenematch/matrix.hpp"

namespace scenematch {

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["data"] = m.v;
  return j;
}

inline Matrix matrix_unjson(const nlohmann::json& j, const std::string& what) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw FormatError(what + ": tensor needs rows/cols/data");
  Matrix m;
  m.rows = j["rows"].get<int>();
  m.cols = j["cols"].get<int>();
  m.v = j["data"].get<std::vector<double>>();
  if (m.v.size() != static_cast<size_t>(m.rows) * m.cols)
    throw FormatError(what + ": tensor data length does not match shape");
  return m;
}

inline nlohmann::json config_json(const TrainConfig& c) {
  return nlohmann::json{{"d", c.d},
                        {"K", c.K},
                        {"alpha_init", c.alpha_init},
                        {"beta_init", c.beta_init},
                        {"delta", c.delta},
                        {"margin", c.margin},
                        {"batch_size", c.batch_size},
                        {"epochs", c.epochs},
                        {"learning_rate", c.learning_rate},
                        {"lr_decay_epoch", c.lr_decay_epoch},
                        {"lr_decay_factor", c.lr_decay_factor},
                        {"seed", c.seed},
                        {"attention_blocks", c.attention_blocks},
                        {"val_fraction", c.val_fraction},
                        {"early_stop", c.early_stop},
                        {"loss_reduction", c.loss_reduction}};
}

inline TrainConfig config_unjson(const nlohmann::json& j) {
  TrainConfig c;
  for (const auto& [key, val] : j.items()) {
    if (key == "d") c.d = val.get<int>();
    else if (key == "K") c.K = val.get<int>();
    else if (key == "alpha_init") c.alpha_init = val.get<double>();
    else if (key == "beta_init") c.beta_init = val.get<double>();
    else if (key == "delta") c.delta = val.get<double>();
    else if (key == "margin") c.margin = val.get<double>();
    else if (key == "batch_size") c.batch_size = val.get<int>();
    else if (key == "epochs") c.epochs = val.get<int>();
    else if (key == "learning_rate") c.learning_rate = val.get<double>();
    else if (key == "lr_decay_epoch") c.lr_decay_epoch = val.get<int>();
    else if (key == "lr_decay_factor") c.lr_decay_factor = val.get<double>();
    else if (key == "seed") c.seed = val.get<uint64_t>();
    else if (key == "attention_blocks") c.attention_blocks = val.get<int>();
    else if (key == "val_fraction") c.val_fraction = val.get<double>();
    else if (key == "early_stop") c.early_stop = val.get<bool>();
    else if (key == "loss_reduction") c.loss_reduction = val.get<std::string>();
    else throw FormatError("config: unknown field '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace scenematch
