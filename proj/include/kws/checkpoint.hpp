#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kws/config.hpp"
#include "kws/model.hpp"

namespace kws {

/// Training-loop state that must survive a checkpoint/resume boundary for
/// resumed runs to reproduce uninterrupted ones bit-exactly.
struct TrainState {
  int epochs_done = 0;
  std::map<int, double> keyword_error;  // vocab index -> last epoch error rate
};

/// Flat binary checkpoint: a header with format version, the normalized
/// config echo, corpus checksum, epoch counter and root seed, followed by
/// named blocks {name length, name, shape, little-endian doubles}. Blocks
/// hold every parameter, the memory bank, calibrated thresholds and trainer
/// state. Save/load round-trips are bit-exact.
void save_checkpoint(const std::string& path, const Model& model, const RunConfig& config,
                     std::uint64_t corpus_checksum, const TrainState& state);

struct LoadedCheckpoint {
  Model model;
  RunConfig config;
  std::uint64_t corpus_checksum = 0;
  TrainState state;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace kws
