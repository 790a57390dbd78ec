#pragma once

#include <vector>

#include "kws/tensor.hpp"

namespace kws {

struct ContrastiveConfig {
  double temperature = 0.07;
  double eps = 1e-8;
};

/// All positive phoneme pairs of a mini-batch, concatenated in batch order
/// then phoneme order. Row i of anchors and keys is the same phoneme
/// occurrence; every j != i acts as an in-batch negative through the
/// denominator of the loss.
struct PhonemeBatch {
  Tensor anchors;  // [N × d]
  Tensor keys;     // [N × d]
  std::vector<int> phoneme_ids;
  std::vector<int> pair_index;
};

/// Concatenates per-pair anchor/key sequences. Each pair's anchor and key
/// sequences must have the same row count (alignment guarantees this);
/// a mismatch raises AlignmentError.
PhonemeBatch collect_phoneme_batch(const std::vector<Tensor>& anchor_seqs,
                                   const std::vector<Tensor>& key_seqs,
                                   const std::vector<std::vector<int>>& phoneme_ids);

/// Temperature-scaled softmax contrastive loss over cosine similarities,
/// summed over the N anchors. Nonnegative; exactly 0 for N == 1.
Tensor info_nce(const PhonemeBatch& batch, const ContrastiveConfig& cfg);

}  // namespace kws
