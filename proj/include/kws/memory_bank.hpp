#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "kws/rng.hpp"

namespace kws {

/// Context-agnostic per-phoneme embedding table with momentum updates:
/// p_k <- alpha*p_k + (1-alpha)*p_new. The first applied update initializes
/// the row; updates below the quality threshold are no-ops. Rows never
/// receive gradients; they enter loss graphs as constants.
class MemoryBank {
 public:
  MemoryBank() = default;
  MemoryBank(int k, int d, double alpha);

  int k() const { return k_; }
  int dim() const { return d_; }
  double alpha() const { return alpha_; }

  void update(int phoneme_id, std::span<const double> p_new, double quality,
              double quality_threshold);

  bool initialized(int phoneme_id) const;
  std::uint64_t update_count(int phoneme_id) const;
  std::span<const double> entry(int phoneme_id) const;

  int eligible_count(const std::set<int>& exclude_ids) const;

  /// Uniform sample without replacement over initialized, non-excluded rows.
  /// Throws SamplingError naming the eligible count when count exceeds it.
  std::vector<std::pair<int, std::vector<double>>> sample(int count,
                                                          const std::set<int>& exclude_ids,
                                                          Rng rng) const;

  struct Snapshot {
    std::uint32_t version = 1;
    int k = 0;
    int d = 0;
    double alpha = 0.0;
    std::vector<double> entries;
    std::vector<std::uint8_t> initialized;
    std::vector<std::uint64_t> update_counts;

    bool operator==(const Snapshot&) const = default;
  };
  Snapshot snapshot() const;
  static MemoryBank restore(const Snapshot& snap);  // FormatError on bad version

  bool operator==(const MemoryBank&) const = default;

 private:
  int k_ = 0;
  int d_ = 0;
  double alpha_ = 0.8;
  std::vector<double> entries_;
  std::vector<std::uint8_t> initialized_;
  std::vector<std::uint64_t> update_counts_;
};

}  // namespace kws
