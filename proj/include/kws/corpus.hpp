#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kws/rng.hpp"

namespace kws {

/// Half-open frame interval [begin, end) assigned to one phoneme.
struct Span {
  int begin = 0;
  int end = 0;
  bool operator==(const Span&) const = default;
};

/// Synthetic phoneme inventory: one prototype frame vector per phoneme,
/// pairwise separated so classes stay distinguishable under noise.
struct PhonemeInventory {
  int d_in = 0;
  std::vector<double> prototypes;  // K*d_in, row-major
  std::vector<std::string> labels;

  int k() const { return static_cast<int>(labels.size()); }
  std::span<const double> prototype(int id) const;
  std::uint64_t checksum() const;
  double min_pairwise_distance() const;
};

PhonemeInventory generate_inventory(int k, int d_in, double separation, Rng rng);

/// Frames plus exact ground-truth alignment spans; the alignment is known by
/// construction, one contiguous span per phoneme, covering [0, frame_count).
struct Utterance {
  std::vector<int> phonemes;
  int frame_count = 0;
  int frame_dim = 0;
  std::vector<double> frames;  // frame_count*frame_dim, row-major
  std::vector<Span> spans;

  void validate() const;  // throws AlignmentError / ShapeError on bad structure
  bool operator==(const Utterance&) const = default;
};

struct SynthesisConfig {
  int dur_min = 2;
  int dur_max = 4;
  double noise_sigma = 0.3;
  double speaker_sigma = 0.1;  // per-utterance additive offset scale
};

Utterance synthesize_utterance(const PhonemeInventory& inv, const std::vector<int>& phonemes,
                               int dur_min, int dur_max, double noise_sigma,
                               const std::vector<double>& speaker_offset, Rng rng);

// Convenience wrapper: draws the speaker offset from the config.
Utterance synthesize_utterance(const PhonemeInventory& inv, const std::vector<int>& phonemes,
                               const SynthesisConfig& cfg, Rng rng);

/// Minimum number of single-symbol insertions, deletions and substitutions
/// turning a into b.
int levenshtein(std::span<const int> a, std::span<const int> b);

enum class MatchLabel { positive, negative };
enum class TriLabel { positive = 0, natural_negative = 1, augmented_hard_negative = 2 };
enum class Difficulty { easy, hard };

struct PairExample {
  Utterance query;
  std::optional<std::vector<int>> enroll_text;
  std::optional<Utterance> enroll_audio;
  MatchLabel match_label = MatchLabel::negative;
  TriLabel tri_label = TriLabel::natural_negative;
  std::optional<Difficulty> difficulty;  // negatives only
  int query_keyword = -1;   // vocab index, -1 when not a vocabulary word
  int enroll_keyword = -1;

  void validate() const;
  bool operator==(const PairExample&) const = default;
};

struct PairCounts {
  int positives = 0;
  int easy_negatives = 0;
  int hard_negatives = 0;
};

/// Builds a pair set from a keyword vocabulary. Positives pair two fresh
/// utterances of one keyword; negatives pair different keywords and are hard
/// when the keyword edit distance is within hard_threshold. Every pair
/// carries both enrollment modalities; inference may mask one.
std::vector<PairExample> build_pairs(const std::vector<std::vector<int>>& vocab,
                                     const PhonemeInventory& inv, const PairCounts& counts,
                                     int hard_threshold, const SynthesisConfig& syn, Rng rng);

/// Random keyword vocabulary with deliberate confusable clusters so hard
/// negative pairs exist by construction.
std::vector<std::vector<int>> generate_vocab(int size, int k_phonemes, int len_min,
                                             int len_max, Rng rng);

}  // namespace kws
