#pragma once

#include <string>

#include "scenematch/config.hpp"
#include "scenematch/ctx.hpp"

namespace scenematch {

// Complete training state. Round-trips through its file form bit-exactly, so
// a resumed run continues as if never interrupted.
struct Checkpoint {
  static constexpr int kVersion = 1;
  int version = kVersion;
  TrainConfig config;
  int epoch = 0;  // completed epochs
  double lr = 0.0;
  ParamMap tensors;
  ParamMap adam_m;
  ParamMap adam_v;
  long long adam_t = 0;
  std::string rng_state;
};

// File format: one JSON document, then a trailing "checksum fnv1a64 <hex>"
// line over the document bytes. Corruption anywhere fails the checksum.
void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

std::string serialize_checkpoint(const Checkpoint& cp);
Checkpoint parse_checkpoint(const std::string& text);

uint64_t fnv1a64(const std::string& bytes);

}  // namespace scenematch
