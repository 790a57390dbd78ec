#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "kws/checkpoint.hpp"
#include "kws/config.hpp"
#include "kws/dataset_io.hpp"
#include "kws/metrics.hpp"
#include "kws/model.hpp"
#include "kws/verifier.hpp"

namespace kws {

enum class EnrollMode { text, audio, both };

struct EpochLog {
  int epoch = 0;  // 1-based absolute epoch index
  double l_uat = 0, l_uat3 = 0, l_clat = 0, l_uaa = 0, l_claa = 0, l_uata = 0;
  double l_at = 0, l_aa = 0, total = 0;
  double auc_text = 0, eer_text = 0;
  double auc_audio = 0, eer_audio = 0;
  double auc_both = 0, eer_both = 0;

  std::string to_line() const;
};

/// Runs `epochs` additional training epochs on top of state.epochs_done.
/// All randomness is a pure function of (config.seed, absolute epoch, index),
/// so a 5+5 resumed run walks the same sequence as an uninterrupted 10-epoch
/// run. Per-epoch log lines go to `log` when given. NumericError aborts on a
/// non-finite loss, naming the component.
std::vector<EpochLog> train_model(Model& model, TrainState& state, const Corpus& corpus,
                                  const std::vector<PairExample>& train_pairs,
                                  const std::vector<PairExample>& val_pairs,
                                  const RunConfig& config, int epochs, std::ostream* log);

/// Scores every pair under one enrollment mode with deterministic per-pair
/// injection seeds.
ScoredSet score_pairs(const Model& model, const std::vector<PairExample>& pairs,
                      EnrollMode mode, Rng rng);

}  // namespace kws
