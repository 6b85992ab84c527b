#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scenematch/checkpoint.hpp"
#include "scenematch/model.hpp"
#include "scenematch/retrieval.hpp"

namespace scenematch {

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;  // mean over the epoch's batches of the reduced loss
  double lr = 0.0;
  double ratio_img = 0.0;  // object-branch weight, sampled at epoch start
  double ratio_txt = 0.0;
  double val_rsum = 0.0;

  std::string line() const;  // tab-separated fields
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> logs;
};

// Seeded minibatch training with Adam. The last val_fraction of the dataset
// is held out for the per-epoch retrieval log; a zero-sized split falls back
// to the training split. Pass resume to continue a checkpointed run: its
// state replaces initialization and epochs continue up to cfg.epochs. Epoch
// lines stream to log_stream when given.
TrainResult train(const TrainConfig& cfg, const Dataset& ds,
                  const Checkpoint* resume = nullptr,
                  std::ostream* log_stream = nullptr);

}  // namespace scenematch
