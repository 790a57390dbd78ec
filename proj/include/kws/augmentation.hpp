#pragma once

#include <map>
#include <vector>

#include "kws/corpus.hpp"
#include "kws/memory_bank.hpp"

namespace kws {

/// One phoneme-level edit. Deletes are never planned on a length-1 sequence
/// and replacements never re-insert the phoneme they remove.
struct EditPlan {
  enum class Op { insert, replace, erase };
  Op op = Op::replace;
  int position = 0;
  int phoneme_id = -1;  // insert/replace payload, drawn from the memory bank
};

/// Derives a confusable negative from a positive pair: applies n_edits
/// bank-sampled edits to the enrollment phoneme sequence, synthesizes fresh
/// enrollment audio for it, and relabels the pair. The edited sequence never
/// collides with a vocabulary keyword (regenerated on collision, bounded
/// retries, then AugmentationError).
PairExample make_hard_negative(const PairExample& positive, int n_edits,
                               const MemoryBank& bank, const PhonemeInventory& inv,
                               const SynthesisConfig& syn,
                               const std::vector<std::vector<int>>& vocab, Rng rng);

/// Training class for the 3-way discriminator: 0 positives, 1 easy natural
/// negatives, 2 hard negatives (natural hard and augmented alike).
int label_tri_class(const PairExample& pair);

/// Appends extra negative pairs for keywords whose error rate sits strictly
/// above the median, pairing each with its nearest-edit-distance vocabulary
/// neighbours. boost_factor scales the target pair count per boosted keyword;
/// 0 (or all-equal error rates) leaves the input unchanged.
std::vector<PairExample> rebalance_pairs(const std::vector<PairExample>& pairs,
                                         const std::map<int, double>& per_keyword_error,
                                         double boost_factor,
                                         const std::vector<std::vector<int>>& vocab,
                                         const PhonemeInventory& inv,
                                         const SynthesisConfig& syn, int hard_threshold,
                                         Rng rng);

}  // namespace kws
