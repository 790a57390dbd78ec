#pragma once

#include <cstdint>
#include <string>

#include "kws/encoders.hpp"
#include "kws/memory_bank.hpp"
#include "kws/ops.hpp"
#include "kws/params.hpp"

namespace kws {

struct ModelConfig {
  int k_phonemes = 40;
  int d_in = 16;
  int d_model = 48;
  int d_proj = 32;
  int d_attn = 16;
  int d_head = 32;  // head GRU width
  // Fixed column budgets: similarity matrices are padded to these widths so
  // the head GRU / lift layers see a constant input dimension.
  int max_query_frames = 32;
  int max_enroll_frames = 32;
  double tau = 0.07;
  double cos_eps = 1e-8;
  double ln_eps = 1e-5;
  double alpha = 0.8;
  double focal_gamma = 2.0;
  double focal_weight = 0.25;
  int inject_count = 4;
  std::string activation = "tanh";
  std::uint64_t init_seed = 7;

  void validate() const;
};

/// Text-enrollment head: self-attention over the padded similarity matrix,
/// GRU over its rows, then a scalar match score and a parallel 3-class
/// discriminator output.
struct TextHeadParams {
  GruParams gru;            // input max_query_frames, hidden d_head
  Tensor score_w, score_b;  // [d_head×1], {1}
  Tensor tri_w, tri_b;      // [d_head×3], {3}
};

/// Audio-enrollment head: the row-max profile queries the lifted similarity
/// rows through cross-attention, then GRU + FC + sigmoid.
struct AudioHeadParams {
  Tensor q_w, q_b;    // [max_enroll_frames×d_attn], {d_attn}
  Tensor kv_w, kv_b;  // [max_query_frames×d_attn], {d_attn}
  GruParams gru;      // input d_attn, hidden d_head
  Tensor score_w, score_b;
};

struct FuseParams {
  Tensor w, b;  // [2*d_head×1], {1}
};

struct Model {
  ModelConfig cfg;
  ParamStore params;
  AudioEncoder audio_enc;  // shared by query and enrollment audio
  TextEncoder text_enc;
  Projection audio_proj, text_proj;
  TextHeadParams text_head;
  AudioHeadParams audio_head;
  FuseParams fuse;
  MemoryBank bank;

  // score thresholds calibrated on the validation split after training
  double thr_text = 0.5;
  double thr_audio = 0.5;
  double thr_both = 0.5;

  static Model build(const ModelConfig& cfg);
};

}  // namespace kws
