#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "kws/corpus.hpp"
#include "kws/model.hpp"

namespace kws {

/// Every tunable of the pipeline, parsed from `key = value` text with strict
/// validation: unknown keys and out-of-range values fail before any work.
/// Output paths are CLI arguments, not config keys, so the normalized echo is
/// identical across runs that differ only in where results land.
struct RunConfig {
  // corpus
  int corpus_k = 40;
  int corpus_d_in = 16;
  double corpus_separation = 1.0;
  int vocab_size = 60;
  int kw_len_min = 3;
  int kw_len_max = 8;
  int dur_min = 2;
  int dur_max = 4;
  double noise_sigma = 0.3;
  double speaker_sigma = 0.1;
  int hard_threshold = 2;
  int n_pairs = 3600;
  double frac_positive = 0.5;
  double frac_easy = 0.25;
  double frac_hard = 0.25;
  double split_train = 0.7;
  double split_val = 0.15;
  double split_test = 0.15;
  // held-out split reuses the training vocabulary by default; open_vocab
  // holds whole confusable keyword clusters out of training instead
  bool open_vocab = false;
  double test_kw_fraction = 0.2;

  // model
  int d_model = 48;
  int d_proj = 32;
  int d_attn = 16;
  int d_head = 32;
  int max_query_frames = 32;
  int max_enroll_frames = 40;  // headroom for insert edits on enrollment text
  double tau = 0.07;
  double cos_eps = 1e-8;
  double ln_eps = 1e-5;
  double alpha = 0.8;
  double focal_gamma = 2.0;
  double focal_weight = 1.0;  // 0.25 starves the audio head at this scale
  int inject_count = 4;
  std::string activation = "tanh";

  // training
  double lr = 0.01;        // initial rate
  double lr_decay = 0.5;   // multiplied in every lr_decay_interval epochs
  int lr_decay_interval = 12;
  int batch_size = 32;
  int epochs = 30;
  std::uint64_t seed = 7;
  bool use_clat = true;
  bool use_claa = true;
  bool use_uat3 = true;
  bool use_bank = true;
  bool contrastive_mean = false;  // contrastive losses sum over phonemes
  double augment_fraction = 1.0;
  double boost_factor = 1.5;
  double quality_threshold = 0.05;
  double edit2_prob = 0.3;

  void validate() const;  // ParamError naming the offending key
  std::string normalized() const;
  ModelConfig model_config() const;
  SynthesisConfig synthesis_config() const;

  static RunConfig parse(const std::string& text);       // full document
  void apply_override(const std::string& key, const std::string& value);
};

}  // namespace kws
