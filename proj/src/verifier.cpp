#include "kws/verifier.hpp"

#include <cmath>
#include <string>

#include "kws/errors.hpp"
#include "kws/ops.hpp"

namespace kws {

namespace {

Tensor affine_vec(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor out = matmul(reshape(x, {1, x.shape()[0]}), w);
  return add(reshape(out, {w.cols()}), b);
}

// Attention with the weight matrix exposed; same math as kws::attention.
std::pair<Tensor, Tensor> attention_with_weights(const Tensor& q, const Tensor& k,
                                                 const Tensor& v) {
  Tensor scores = affine(matmul(q, transpose(k)), 1.0 / std::sqrt(double(q.cols())), 0.0);
  Tensor weights = softmax_rows(scores, 1.0);
  return {matmul(weights, v), weights};
}

void check_column_budget(const Tensor& m, int budget, const char* what) {
  if (m.cols() > budget) {
    throw ShapeError(std::string(what) + ": " + std::to_string(m.cols()) +
                     " query frames exceed the model budget of " + std::to_string(budget));
  }
}

Tensor scalar_of(const Tensor& size_one) { return reshape(size_one, {}); }

}  // namespace

Tensor utterance_frames(const Utterance& u) {
  return Tensor::from_values({u.frame_count, u.frame_dim}, u.frames, false);
}

Tensor similarity_matrix(const Tensor& rows, const Tensor& cols, double eps) {
  if (rows.rank() != 2 || cols.rank() != 2 || rows.cols() != cols.cols()) {
    throw ShapeError("similarity_matrix: embedding widths disagree");
  }
  return matmul(l2_normalize_rows(rows, eps), transpose(l2_normalize_rows(cols, eps)));
}

// Cosine rows of `count` sampled bank vectors against every query frame.
// Bank rows enter as constants: gradients flow to the query side only.
Tensor memory_reference_rows(const MemoryBank& bank, int count, const Tensor& query_proj,
                             double eps, Rng rng) {
  auto sampled = bank.sample(count, {}, rng);  // SamplingError propagates
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(count) * bank.dim());
  for (const auto& [id, vec] : sampled) flat.insert(flat.end(), vec.begin(), vec.end());
  Tensor bank_rows = Tensor::from_values({count, bank.dim()}, std::move(flat), false);
  return similarity_matrix(bank_rows, query_proj, eps);
}

Tensor inject_memory_rows(const Tensor& m, const MemoryBank& bank, int count,
                          const Tensor& query_proj, double eps, Rng rng) {
  if (count == 0) return m;
  if (m.cols() != query_proj.rows()) {
    throw ShapeError("inject_memory_rows: matrix columns do not match query frames");
  }
  return concat_rows({m, memory_reference_rows(bank, count, query_proj, eps, rng)});
}

HeadOutput run_text_head(const Model& model, const Tensor& m) {
  check_column_budget(m, model.cfg.max_query_frames, "text head");
  Tensor padded = pad_cols(m, model.cfg.max_query_frames, 0.0);
  auto [att, weights] = attention_with_weights(padded, padded, padded);
  Tensor states = gru_sequence(model.text_head.gru, att);
  Tensor h = select_row(states, states.rows() - 1);
  HeadOutput out;
  out.feature = h;
  out.score = scalar_of(sigmoid(affine_vec(h, model.text_head.score_w, model.text_head.score_b)));
  out.logits3 = affine_vec(h, model.text_head.tri_w, model.text_head.tri_b);
  out.att_weights = weights;
  return out;
}

HeadOutput run_audio_head(const Model& model, const Tensor& m) {
  check_column_budget(m, model.cfg.max_query_frames, "audio head");
  if (m.rows() > model.cfg.max_enroll_frames) {
    throw ShapeError("audio head: " + std::to_string(m.rows()) +
                     " enrollment frames exceed the model budget of " +
                     std::to_string(model.cfg.max_enroll_frames));
  }
  // Row-max profile over the query axis becomes the attention query.
  Tensor profile = max_over_cols(m);
  Tensor q_in = pad_cols(reshape(profile, {1, m.rows()}), model.cfg.max_enroll_frames, 0.0);
  Tensor q = add_row_bias(matmul(q_in, model.audio_head.q_w), model.audio_head.q_b);
  Tensor kv_in = pad_cols(m, model.cfg.max_query_frames, 0.0);
  Tensor kv = add_row_bias(matmul(kv_in, model.audio_head.kv_w), model.audio_head.kv_b);
  auto [att, weights] = attention_with_weights(q, kv, kv);
  Tensor states = gru_sequence(model.audio_head.gru, att);
  Tensor h = select_row(states, states.rows() - 1);
  HeadOutput out;
  out.feature = h;
  out.score = scalar_of(sigmoid(affine_vec(h, model.audio_head.score_w, model.audio_head.score_b)));
  out.att_weights = weights;
  return out;
}

Tensor fuse_score(const Model& model, const Tensor& text_feature, const Tensor& audio_feature) {
  if (!text_feature.defined() || !audio_feature.defined()) {
    throw ContractError("fuse: both head features are required at training time");
  }
  int d = text_feature.shape()[0];
  Tensor cat = reshape(concat_rows({reshape(text_feature, {1, d}), reshape(audio_feature, {1, d})}),
                       {1, 2 * d});
  Tensor pre = add_row_bias(matmul(cat, model.fuse.w), model.fuse.b);
  return scalar_of(sigmoid(pre));
}

Tensor bce(const Tensor& score, double label) {
  if (score.size() != 1) throw ContractError("bce: score must be a scalar");
  Tensor s = clamp(reshape(score, {}), 1e-7, 1.0 - 1e-7);
  Tensor log_s = log(s);
  Tensor log_1ms = log(affine(s, -1.0, 1.0));
  return affine(add(affine(log_s, label, 0.0), affine(log_1ms, 1.0 - label, 0.0)), -1.0, 0.0);
}

Tensor focal_loss(const Tensor& score, double label, double gamma, double weight) {
  if (score.size() != 1) throw ContractError("focal_loss: score must be a scalar");
  if (gamma < 0.0) throw ParamError("focal_loss: gamma must be >= 0");
  Tensor s = clamp(reshape(score, {}), 1e-7, 1.0 - 1e-7);
  Tensor pt = label == 1.0 ? s : affine(s, -1.0, 1.0);
  Tensor mod = pow_const(affine(pt, -1.0, 1.0), gamma);  // (1 - p_t)^gamma
  return affine(mul(mod, log(pt)), -weight, 0.0);
}

Tensor three_class_ce(const Tensor& logits, int tri_class) {
  if (logits.rank() != 1 || logits.shape()[0] != 3) {
    throw ShapeError("three_class_ce: expected 3 logits");
  }
  if (tri_class < 0 || tri_class > 2) throw ParamError("three_class_ce: class out of range");
  Tensor lse = reshape(logsumexp_rows(reshape(logits, {1, 3})), {});
  return sub(lse, select_element(logits, tri_class));
}

LossBundle total_loss(const Tensor& l_uat, const Tensor& l_uat3, const Tensor& l_clat,
                      const Tensor& l_uaa, const Tensor& l_claa, const Tensor& l_uata) {
  LossBundle b;
  b.l_uat = l_uat;
  b.l_uat3 = l_uat3;
  b.l_clat = l_clat;
  b.l_uaa = l_uaa;
  b.l_claa = l_claa;
  b.l_uata = l_uata;
  b.l_at = add(add(l_uat, l_uat3), l_clat);
  b.l_aa = add(l_uaa, l_claa);
  b.total = add(add(b.l_at, b.l_aa), l_uata);
  return b;
}

namespace {

struct EncodedPair {
  Tensor query_proj;
  Tensor text_proj;    // undefined when no enrollment text
  Tensor enroll_proj;  // undefined when no enrollment audio
};

EncodedPair encode_pair(const Model& model, const Utterance& query,
                        const std::optional<std::vector<int>>& enroll_text,
                        const std::optional<Utterance>& enroll_audio) {
  EncodedPair e;
  EncodedSequence q_enc = encode_audio(model.audio_enc, utterance_frames(query),
                                       Origin::query_audio);
  e.query_proj = project(model.audio_proj, q_enc, model.cfg.ln_eps).embeddings;
  if (enroll_text) {
    EncodedSequence t_enc = encode_text(model.text_enc, *enroll_text);
    e.text_proj = project(model.text_proj, t_enc, model.cfg.ln_eps).embeddings;
  }
  if (enroll_audio) {
    EncodedSequence a_enc = encode_audio(model.audio_enc, utterance_frames(*enroll_audio),
                                         Origin::enroll_audio);
    e.enroll_proj = project(model.audio_proj, a_enc, model.cfg.ln_eps).embeddings;
  }
  return e;
}

int usable_inject_count(const Model& model, bool use_bank) {
  if (!use_bank) return 0;
  return std::min(model.cfg.inject_count, model.bank.eligible_count({}));
}

}  // namespace

PairForward forward_pair(const Model& model, const PairExample& pair, bool use_bank,
                         Rng inject_rng) {
  if (!pair.enroll_text || !pair.enroll_audio) {
    throw ContractError("forward_pair: training pairs carry both enrollment modalities");
  }
  PairForward f;
  EncodedPair enc = encode_pair(model, pair.query, pair.enroll_text, pair.enroll_audio);
  f.query_proj = enc.query_proj;
  f.text_proj = enc.text_proj;
  f.enroll_proj = enc.enroll_proj;

  f.pooled_query = pool_by_alignment(f.query_proj, pair.query.spans, pair.query.phonemes);
  f.pooled_enroll =
      pool_by_alignment(f.enroll_proj, pair.enroll_audio->spans, pair.enroll_audio->phonemes);

  Tensor m_at_raw = similarity_matrix(f.text_proj, f.query_proj, model.cfg.cos_eps);
  int inject = usable_inject_count(model, use_bank);
  // reference rows lead so the head GRU ends its sweep on the text evidence
  f.m_at = inject > 0
               ? concat_rows({memory_reference_rows(model.bank, inject, f.query_proj,
                                                  model.cfg.cos_eps,
                                                  inject_rng.split("inject")),
                              m_at_raw})
               : m_at_raw;
  f.text_out = run_text_head(model, f.m_at);

  f.m_aa = similarity_matrix(f.enroll_proj, f.query_proj, model.cfg.cos_eps);
  f.audio_out = run_audio_head(model, f.m_aa);

  f.fused_score = fuse_score(model, f.text_out.feature, f.audio_out.feature);
  return f;
}

double infer(const Model& model, const Utterance& query,
             const std::optional<std::vector<int>>& enroll_text,
             const std::optional<Utterance>& enroll_audio, Rng inject_rng) {
  if (!enroll_text && !enroll_audio) {
    throw ContractError("infer: at least one enrollment modality is required");
  }
  NoGradGuard ng;
  EncodedPair enc = encode_pair(model, query, enroll_text, enroll_audio);

  Tensor text_feature, audio_feature;
  Tensor text_score, audio_score;
  if (enroll_text) {
    Tensor m_at = similarity_matrix(enc.text_proj, enc.query_proj, model.cfg.cos_eps);
    int inject = usable_inject_count(model, true);
    if (inject > 0) {
      m_at = concat_rows({memory_reference_rows(model.bank, inject, enc.query_proj,
                                              model.cfg.cos_eps, inject_rng.split("inject")),
                          m_at});
    }
    HeadOutput out = run_text_head(model, m_at);
    text_feature = out.feature;
    text_score = out.score;
  }
  if (enroll_audio) {
    Tensor m_aa = similarity_matrix(enc.enroll_proj, enc.query_proj, model.cfg.cos_eps);
    HeadOutput out = run_audio_head(model, m_aa);
    audio_feature = out.feature;
    audio_score = out.score;
  }
  if (enroll_text && enroll_audio) {
    return fuse_score(model, text_feature, audio_feature).scalar_value();
  }
  return enroll_text ? text_score.scalar_value() : audio_score.scalar_value();
}

AttentionDump dump_pair_matrices(const Model& model, const PairExample& pair, bool use_bank,
                                 Rng inject_rng) {
  NoGradGuard ng;
  PairForward f = forward_pair(model, pair, use_bank, inject_rng);
  return AttentionDump{f.m_at, f.m_aa, f.text_out.att_weights, f.audio_out.att_weights};
}

}  // namespace kws
