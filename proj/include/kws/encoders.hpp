#pragma once

#include <string>
#include <vector>

#include "kws/ops.hpp"
#include "kws/params.hpp"
#include "kws/rng.hpp"
#include "kws/tensor.hpp"

namespace kws {

struct EncoderConfig {
  int d_in = 16;
  int d_model = 48;
  int d_proj = 32;
  int text_vocab = 40;
  std::string activation = "tanh";  // projection nonlinearity
  std::uint64_t seed = 0;

  void validate() const;  // d_proj <= d_model etc.
};

enum class Origin { query_audio, enroll_audio, text };

struct EncodedSequence {
  Tensor embeddings;  // [T × d]
  Origin origin = Origin::query_audio;

  void check_finite() const;  // NumericError on NaN/Inf
};

/// Pointwise FC over frames followed by a unidirectional GRU; output length
/// equals input length.
struct AudioEncoder {
  Tensor fc_w, fc_b;  // [d_in×d_model], {d_model}
  GruParams gru;
  int d_in = 0;
};

/// Learned embedding table followed by a unidirectional GRU; one output row
/// per phoneme token.
struct TextEncoder {
  Tensor embed;  // [K×d_model]
  GruParams gru;
};

/// LayerNorm -> FC -> bounded activation into the shared embedding space.
/// Audio and text use separate instances of this block.
struct Projection {
  Tensor ln_gain, ln_bias;  // {d_model}
  Tensor fc_w, fc_b;        // [d_model×d_proj], {d_proj}
};

AudioEncoder make_audio_encoder(ParamStore& store, const std::string& prefix, int d_in,
                                int d_model, Rng rng);
TextEncoder make_text_encoder(ParamStore& store, const std::string& prefix, int vocab,
                              int d_model, Rng rng);
Projection make_projection(ParamStore& store, const std::string& prefix, int d_model,
                           int d_proj, Rng rng);
GruParams make_gru(ParamStore& store, const std::string& prefix, int d_in, int d_h, Rng rng);

EncodedSequence encode_audio(const AudioEncoder& enc, const Tensor& frames, Origin origin);
EncodedSequence encode_text(const TextEncoder& enc, const std::vector<int>& phonemes);
EncodedSequence project(const Projection& proj, const EncodedSequence& e, double ln_eps);

}  // namespace kws
