#pragma once

#include <cstdint>
#include <string>

namespace scenematch {

// Training/evaluation configuration. Defaults mirror the reference setup;
// epochs and d normally come from the config file.
struct TrainConfig {
  int d = 16;                  // feature dimension
  int K = 8;                   // object-attention head count
  double alpha_init = 5.0;     // object-branch mixing logit
  double beta_init = 0.0;      // relation+attribute mixing logit
  double delta = 0.3;          // local-similarity weight in the pair score
  double margin = 0.2;         // hinge margin
  int batch_size = 64;
  int epochs = 50;
  double learning_rate = 2e-4;
  int lr_decay_epoch = -1;     // -1: decay at epochs / 2
  double lr_decay_factor = 0.1;
  uint64_t seed = 0;
  int attention_blocks = 1;    // guided-attention repeats (shared weights)
  double val_fraction = 0.2;   // held-out tail of the dataset for epoch logs
  bool early_stop = false;     // stop once training-set retrieval is perfect
  std::string loss_reduction = "sum";  // "sum" | "mean" over the batch

  int decay_epoch() const { return lr_decay_epoch >= 0 ? lr_decay_epoch : epochs / 2; }
  void validate() const;
};

TrainConfig parse_train_config(const std::string& json_text);
TrainConfig load_train_config(const std::string& path);
std::string serialize_train_config(const TrainConfig& cfg);

}  // namespace scenematch
