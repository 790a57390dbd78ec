#pragma once

#include <optional>
#include <vector>

#include "kws/alignment.hpp"
#include "kws/corpus.hpp"
#include "kws/model.hpp"
#include "kws/tensor.hpp"

namespace kws {

/// Cosine-similarity grid between two encoded sequences: out[r][c] is the
/// cosine of rows[r] against cols[c]. Entries live in [-1, 1] up to fp noise.
Tensor similarity_matrix(const Tensor& rows, const Tensor& cols, double eps);

/// Appends `count` bank-sampled context-agnostic rows to a text similarity
/// matrix; each appended row holds the cosine of one bank vector against
/// every query frame. The original rows pass through bit-identically and
/// gradients never reach the bank.
Tensor inject_memory_rows(const Tensor& m, const MemoryBank& bank, int count,
                          const Tensor& query_proj, double eps, Rng rng);

/// The reference block those rows are built from, exposed so pipelines can
/// also lead with it: the head GRU then finishes its sweep on the text rows.
Tensor memory_reference_rows(const MemoryBank& bank, int count, const Tensor& query_proj,
                             double eps, Rng rng);

struct HeadOutput {
  Tensor feature;      // head GRU final hidden state, {d_head}
  Tensor score;        // sigmoid posterior, scalar
  Tensor logits3;      // 3-class discriminator logits (text head only)
  Tensor att_weights;  // attention weight matrix, for dumps
};

HeadOutput run_text_head(const Model& model, const Tensor& m);
HeadOutput run_audio_head(const Model& model, const Tensor& m);
Tensor fuse_score(const Model& model, const Tensor& text_feature, const Tensor& audio_feature);

// Utterance-level losses (scalar tensors).
Tensor bce(const Tensor& score, double label);
Tensor focal_loss(const Tensor& score, double label, double gamma, double weight);
Tensor three_class_ce(const Tensor& logits, int tri_class);

/// Eq-by-eq loss bundle; the sub-totals are sums of their components and
/// `total` is the training objective.
struct LossBundle {
  Tensor l_uat, l_uat3, l_clat, l_uaa, l_claa, l_uata;
  Tensor l_at, l_aa, total;
};
LossBundle total_loss(const Tensor& l_uat, const Tensor& l_uat3, const Tensor& l_clat,
                      const Tensor& l_uaa, const Tensor& l_claa, const Tensor& l_uata);

/// Full forward pass for one training pair. Encoders and projections run
/// once; the contrastive path consumes the pooled views of the same
/// projection outputs the heads consume raw.
struct PairForward {
  Tensor query_proj;   // [T^q × d_proj]
  Tensor text_proj;    // [T^t × d_proj]
  Tensor enroll_proj;  // [T^a × d_proj]
  PooledSequence pooled_query, pooled_enroll;
  Tensor m_at;  // text similarity matrix after bank injection
  Tensor m_aa;
  HeadOutput text_out, audio_out;
  Tensor fused_score;
};
PairForward forward_pair(const Model& model, const PairExample& pair, bool use_bank,
                         Rng inject_rng);

/// Inference with modality masking: text-only and audio-only run exactly the
/// single head; both present runs the fusion path. ContractError when both
/// enrollment modalities are absent.
double infer(const Model& model, const Utterance& query,
             const std::optional<std::vector<int>>& enroll_text,
             const std::optional<Utterance>& enroll_audio, Rng inject_rng);

/// Matrices behind one pair's scores, for the attention dump surface.
struct AttentionDump {
  Tensor m_at;       // post-injection text similarity matrix
  Tensor m_aa;       // audio similarity matrix
  Tensor att_text;   // self-attention weights of the text head
  Tensor att_audio;  // cross-attention weights of the audio head
};
AttentionDump dump_pair_matrices(const Model& model, const PairExample& pair, bool use_bank,
                                 Rng inject_rng);

Tensor utterance_frames(const Utterance& u);  // constant [T × d_in] tensor

}  // namespace kws
