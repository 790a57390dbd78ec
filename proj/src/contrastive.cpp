#include "kws/contrastive.hpp"

#include <string>

#include "kws/errors.hpp"
#include "kws/ops.hpp"

namespace kws {

PhonemeBatch collect_phoneme_batch(const std::vector<Tensor>& anchor_seqs,
                                   const std::vector<Tensor>& key_seqs,
                                   const std::vector<std::vector<int>>& phoneme_ids) {
  if (anchor_seqs.size() != key_seqs.size() || anchor_seqs.size() != phoneme_ids.size()) {
    throw ContractError("collect_phoneme_batch: list lengths disagree");
  }
  if (anchor_seqs.empty()) throw ContractError("collect_phoneme_batch: empty batch");

  PhonemeBatch batch;
  for (std::size_t p = 0; p < anchor_seqs.size(); ++p) {
    const Tensor& a = anchor_seqs[p];
    const Tensor& k = key_seqs[p];
    if (a.rows() != k.rows()) {
      throw AlignmentError("collect_phoneme_batch: pair " + std::to_string(p) + " has " +
                           std::to_string(a.rows()) + " anchor rows vs " +
                           std::to_string(k.rows()) + " key rows");
    }
    if (a.rows() != static_cast<int>(phoneme_ids[p].size())) {
      throw AlignmentError("collect_phoneme_batch: pair " + std::to_string(p) +
                           " phoneme id count mismatch");
    }
    for (int r = 0; r < a.rows(); ++r) {
      batch.phoneme_ids.push_back(phoneme_ids[p][static_cast<std::size_t>(r)]);
      batch.pair_index.push_back(static_cast<int>(p));
    }
  }
  batch.anchors = concat_rows(anchor_seqs);
  batch.keys = concat_rows(key_seqs);
  return batch;
}

Tensor info_nce(const PhonemeBatch& batch, const ContrastiveConfig& cfg) {
  if (!(cfg.temperature > 0.0)) throw ParamError("info_nce: temperature must be positive");
  if (!batch.anchors.defined() || batch.anchors.rows() < 1) {
    throw ContractError("info_nce: empty phoneme batch");
  }
  // Cosine similarity grid via row normalization: sim[i][j] = cos(a_i, k_j).
  Tensor sim = matmul(l2_normalize_rows(batch.anchors, cfg.eps),
                      transpose(l2_normalize_rows(batch.keys, cfg.eps)));
  Tensor scaled = affine(sim, 1.0 / cfg.temperature, 0.0);
  // -log softmax of the diagonal, summed: sum_i(lse(row_i) - scaled[i][i]).
  return sum_all(sub(logsumexp_rows(scaled), diag(scaled)));
}

}  // namespace kws
