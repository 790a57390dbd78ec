#pragma once

#include <string>
#include <vector>

#include "kws/corpus.hpp"

namespace kws {

/// Inventory + keyword vocabulary, stored as one JSON document. The checksum
/// ties pair files and checkpoints to the corpus they were produced from.
struct Corpus {
  PhonemeInventory inventory;
  std::vector<std::vector<int>> vocab;

  std::uint64_t checksum() const;
};

void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

/// Pair dataset files are line-delimited JSON: one header record carrying
/// {version, K, d_in, inventory checksum, pair count}, then one record per
/// pair. Frames are base64 little-endian doubles, so round-trips are
/// bit-exact. Truncated or malformed files raise FormatError with the
/// offending line index and yield no partial result.
void save_pairs(const std::vector<PairExample>& pairs, std::uint64_t inventory_checksum,
                int k, int d_in, const std::string& path);

struct LoadedPairs {
  std::vector<PairExample> pairs;
  std::uint64_t inventory_checksum = 0;
  int k = 0;
  int d_in = 0;
};
LoadedPairs load_pairs(const std::string& path);

// Single-utterance files for the enroll/query CLI verbs; same frame encoding
// as the pair records.
void save_utterance(const Utterance& u, const std::string& path);
Utterance load_utterance(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace kws
