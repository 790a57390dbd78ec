#include "kws/model.hpp"

#include <cmath>

#include "kws/errors.hpp"

namespace kws {

void ModelConfig::validate() const {
  if (k_phonemes < 2) throw ParamError("model config: k_phonemes must be >= 2");
  if (d_in < 1 || d_model < 1 || d_proj < 1 || d_attn < 1 || d_head < 1) {
    throw ParamError("model config: dimensions must be positive");
  }
  if (d_proj > d_model) throw ParamError("model config: d_proj must not exceed d_model");
  if (max_query_frames < 1 || max_enroll_frames < 1) {
    throw ParamError("model config: frame budgets must be positive");
  }
  if (!(tau > 0.0)) throw ParamError("model config: tau must be positive");
  if (!(cos_eps > 0.0) || !(ln_eps > 0.0)) throw ParamError("model config: eps must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParamError("model config: alpha must be in (0,1)");
  if (focal_gamma < 0.0) throw ParamError("model config: focal_gamma must be >= 0");
  if (!(focal_weight > 0.0)) throw ParamError("model config: focal_weight must be positive");
  if (inject_count < 0) throw ParamError("model config: inject_count must be >= 0");
  if (activation != "tanh") throw ParamError("model config: unknown activation");
}

Model Model::build(const ModelConfig& cfg) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  Rng rng(cfg.init_seed);

  m.audio_enc = make_audio_encoder(m.params, "audio_enc", cfg.d_in, cfg.d_model,
                                   rng.split("audio_enc"));
  m.text_enc = make_text_encoder(m.params, "text_enc", cfg.k_phonemes, cfg.d_model,
                                 rng.split("text_enc"));
  m.audio_proj = make_projection(m.params, "audio_proj", cfg.d_model, cfg.d_proj,
                                 rng.split("audio_proj"));
  m.text_proj = make_projection(m.params, "text_proj", cfg.d_model, cfg.d_proj,
                                rng.split("text_proj"));

  auto mk_matrix = [&](const std::string& name, int r, int c, Rng init) {
    double limit = std::sqrt(6.0 / (r + c));
    std::vector<double> v(static_cast<std::size_t>(r) * c);
    for (auto& x : v) x = init.uniform(-limit, limit);
    return m.params.add(name, Tensor::from_values({r, c}, std::move(v), true));
  };

  Rng th = rng.split("text_head");
  m.text_head.gru = make_gru(m.params, "text_head.gru", cfg.max_query_frames, cfg.d_head,
                             th.split("gru"));
  m.text_head.score_w = mk_matrix("text_head.score.w", cfg.d_head, 1, th.split("score"));
  m.text_head.score_b = m.params.add("text_head.score.b", Tensor::zeros({1}, true));
  m.text_head.tri_w = mk_matrix("text_head.tri.w", cfg.d_head, 3, th.split("tri"));
  m.text_head.tri_b = m.params.add("text_head.tri.b", Tensor::zeros({3}, true));

  Rng ah = rng.split("audio_head");
  m.audio_head.q_w = mk_matrix("audio_head.q.w", cfg.max_enroll_frames, cfg.d_attn,
                               ah.split("q"));
  m.audio_head.q_b = m.params.add("audio_head.q.b", Tensor::zeros({cfg.d_attn}, true));
  m.audio_head.kv_w = mk_matrix("audio_head.kv.w", cfg.max_query_frames, cfg.d_attn,
                                ah.split("kv"));
  m.audio_head.kv_b = m.params.add("audio_head.kv.b", Tensor::zeros({cfg.d_attn}, true));
  m.audio_head.gru = make_gru(m.params, "audio_head.gru", cfg.d_attn, cfg.d_head,
                              ah.split("gru"));
  m.audio_head.score_w = mk_matrix("audio_head.score.w", cfg.d_head, 1, ah.split("score"));
  m.audio_head.score_b = m.params.add("audio_head.score.b", Tensor::zeros({1}, true));

  m.fuse.w = mk_matrix("fuse.w", 2 * cfg.d_head, 1, rng.split("fuse"));
  m.fuse.b = m.params.add("fuse.b", Tensor::zeros({1}, true));

  m.bank = MemoryBank(cfg.k_phonemes, cfg.d_proj, cfg.alpha);
  return m;
}

}  // namespace kws
