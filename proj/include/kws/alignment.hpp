#pragma once

#include <vector>

#include "kws/corpus.hpp"
#include "kws/tensor.hpp"

namespace kws {

/// One embedding row per phoneme, produced by averaging the frame rows of
/// each ground-truth span.
struct PooledSequence {
  Tensor embeddings;  // [phoneme count × d]
  std::vector<int> phoneme_ids;
};

/// Collapses frame-level embeddings to phoneme level using exact alignment
/// spans. Spans must partition [0, T); gradient flows 1/len to each source
/// frame. Throws AlignmentError naming the first gap or overlap.
PooledSequence pool_by_alignment(const Tensor& frames, const std::vector<Span>& spans,
                                 const std::vector<int>& phoneme_ids);

}  // namespace kws
