#include "kws/encoders.hpp"

#include <cmath>

#include "kws/errors.hpp"

namespace kws {

void EncoderConfig::validate() const {
  if (d_in < 1 || d_model < 1 || d_proj < 1 || text_vocab < 2) {
    throw ParamError("encoder config: dimensions must be positive, vocab >= 2");
  }
  if (d_proj > d_model) throw ParamError("encoder config: d_proj must not exceed d_model");
  if (activation != "tanh") throw ParamError("encoder config: unknown activation '" + activation + "'");
}

void EncodedSequence::check_finite() const {
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (!std::isfinite(embeddings.at(i))) {
      throw NumericError("encoded sequence contains a non-finite value");
    }
  }
}

namespace {

Tensor init_matrix(ParamStore& store, const std::string& name, int rows, int cols, Rng rng) {
  double limit = std::sqrt(6.0 / (rows + cols));
  std::vector<double> v(static_cast<std::size_t>(rows) * cols);
  for (auto& x : v) x = rng.uniform(-limit, limit);
  return store.add(name, Tensor::from_values({rows, cols}, std::move(v), true));
}

Tensor init_bias(ParamStore& store, const std::string& name, int d) {
  return store.add(name, Tensor::zeros({d}, true));
}

}  // namespace

GruParams make_gru(ParamStore& store, const std::string& prefix, int d_in, int d_h, Rng rng) {
  GruParams p;
  p.wz = init_matrix(store, prefix + ".wz", d_in, d_h, rng.split("wz"));
  p.uz = init_matrix(store, prefix + ".uz", d_h, d_h, rng.split("uz"));
  p.bz = init_bias(store, prefix + ".bz", d_h);
  p.wr = init_matrix(store, prefix + ".wr", d_in, d_h, rng.split("wr"));
  p.ur = init_matrix(store, prefix + ".ur", d_h, d_h, rng.split("ur"));
  p.br = init_bias(store, prefix + ".br", d_h);
  p.wh = init_matrix(store, prefix + ".wh", d_in, d_h, rng.split("wh"));
  p.uh = init_matrix(store, prefix + ".uh", d_h, d_h, rng.split("uh"));
  p.bh = init_bias(store, prefix + ".bh", d_h);
  return p;
}

AudioEncoder make_audio_encoder(ParamStore& store, const std::string& prefix, int d_in,
                                int d_model, Rng rng) {
  AudioEncoder enc;
  enc.d_in = d_in;
  enc.fc_w = init_matrix(store, prefix + ".fc.w", d_in, d_model, rng.split("fc"));
  enc.fc_b = init_bias(store, prefix + ".fc.b", d_model);
  enc.gru = make_gru(store, prefix + ".gru", d_model, d_model, rng.split("gru"));
  return enc;
}

TextEncoder make_text_encoder(ParamStore& store, const std::string& prefix, int vocab,
                              int d_model, Rng rng) {
  TextEncoder enc;
  enc.embed = init_matrix(store, prefix + ".embed", vocab, d_model, rng.split("embed"));
  enc.gru = make_gru(store, prefix + ".gru", d_model, d_model, rng.split("gru"));
  return enc;
}

Projection make_projection(ParamStore& store, const std::string& prefix, int d_model,
                           int d_proj, Rng rng) {
  Projection p;
  p.ln_gain = store.add(prefix + ".ln.gain", Tensor::full({d_model}, 1.0, true));
  p.ln_bias = init_bias(store, prefix + ".ln.bias", d_model);
  p.fc_w = init_matrix(store, prefix + ".fc.w", d_model, d_proj, rng.split("fc"));
  p.fc_b = init_bias(store, prefix + ".fc.b", d_proj);
  return p;
}

EncodedSequence encode_audio(const AudioEncoder& enc, const Tensor& frames, Origin origin) {
  if (frames.rank() != 2 || frames.cols() != enc.d_in) {
    throw ShapeError("encode_audio: expected [T x " + std::to_string(enc.d_in) +
                     "] frames");
  }
  if (frames.rows() < 1) throw ShapeError("encode_audio: empty frame sequence");
  Tensor pre = tanh(add_row_bias(matmul(frames, enc.fc_w), enc.fc_b));
  return EncodedSequence{gru_sequence(enc.gru, pre), origin};
}

EncodedSequence encode_text(const TextEncoder& enc, const std::vector<int>& phonemes) {
  if (phonemes.empty()) throw ContractError("encode_text: empty phoneme sequence");
  Tensor emb = embedding(enc.embed, phonemes);  // VocabError on out-of-range ids
  return EncodedSequence{gru_sequence(enc.gru, emb), Origin::text};
}

EncodedSequence project(const Projection& proj, const EncodedSequence& e, double ln_eps) {
  Tensor normed = layer_norm(e.embeddings, proj.ln_gain, proj.ln_bias, ln_eps);
  Tensor out = tanh(add_row_bias(matmul(normed, proj.fc_w), proj.fc_b));
  return EncodedSequence{out, e.origin};
}

}  // namespace kws
