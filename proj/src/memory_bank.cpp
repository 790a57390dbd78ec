#include "kws/memory_bank.hpp"

#include <cmath>
#include <string>

#include "kws/errors.hpp"

namespace kws {

MemoryBank::MemoryBank(int k, int d, double alpha) : k_(k), d_(d), alpha_(alpha) {
  if (k < 1 || d < 1) throw ParamError("memory bank: need k >= 1 and d >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParamError("memory bank: alpha must lie strictly in (0,1)");
  }
  entries_.assign(static_cast<std::size_t>(k) * d, 0.0);
  initialized_.assign(static_cast<std::size_t>(k), 0);
  update_counts_.assign(static_cast<std::size_t>(k), 0);
}

void MemoryBank::update(int phoneme_id, std::span<const double> p_new, double quality,
                        double quality_threshold) {
  if (phoneme_id < 0 || phoneme_id >= k_) {
    throw VocabError("memory bank: phoneme id " + std::to_string(phoneme_id) +
                     " out of range [0," + std::to_string(k_) + ")");
  }
  if (p_new.size() != static_cast<std::size_t>(d_)) {
    throw ShapeError("memory bank: update vector width " + std::to_string(p_new.size()) +
                     " does not match d=" + std::to_string(d_));
  }
  for (double v : p_new) {
    if (!std::isfinite(v)) throw NumericError("memory bank: non-finite update vector");
  }
  if (quality < quality_threshold) return;  // gated out, bit-unchanged

  double* row = &entries_[static_cast<std::size_t>(phoneme_id) * d_];
  if (!initialized_[static_cast<std::size_t>(phoneme_id)]) {
    for (int i = 0; i < d_; ++i) row[i] = p_new[static_cast<std::size_t>(i)];
    initialized_[static_cast<std::size_t>(phoneme_id)] = 1;
  } else {
    for (int i = 0; i < d_; ++i) {
      row[i] = alpha_ * row[i] + (1.0 - alpha_) * p_new[static_cast<std::size_t>(i)];
    }
  }
  ++update_counts_[static_cast<std::size_t>(phoneme_id)];
}

bool MemoryBank::initialized(int phoneme_id) const {
  if (phoneme_id < 0 || phoneme_id >= k_) throw VocabError("memory bank: id out of range");
  return initialized_[static_cast<std::size_t>(phoneme_id)] != 0;
}

std::uint64_t MemoryBank::update_count(int phoneme_id) const {
  if (phoneme_id < 0 || phoneme_id >= k_) throw VocabError("memory bank: id out of range");
  return update_counts_[static_cast<std::size_t>(phoneme_id)];
}

std::span<const double> MemoryBank::entry(int phoneme_id) const {
  if (phoneme_id < 0 || phoneme_id >= k_) throw VocabError("memory bank: id out of range");
  return {entries_.data() + static_cast<std::size_t>(phoneme_id) * d_,
          static_cast<std::size_t>(d_)};
}

int MemoryBank::eligible_count(const std::set<int>& exclude_ids) const {
  int n = 0;
  for (int id = 0; id < k_; ++id) {
    if (initialized_[static_cast<std::size_t>(id)] && !exclude_ids.count(id)) ++n;
  }
  return n;
}

std::vector<std::pair<int, std::vector<double>>> MemoryBank::sample(
    int count, const std::set<int>& exclude_ids, Rng rng) const {
  if (count < 0) throw ParamError("memory bank: negative sample count");
  std::vector<int> eligible;
  for (int id = 0; id < k_; ++id) {
    if (initialized_[static_cast<std::size_t>(id)] && !exclude_ids.count(id)) {
      eligible.push_back(id);
    }
  }
  if (count > static_cast<int>(eligible.size())) {
    throw SamplingError("memory bank: requested " + std::to_string(count) +
                        " samples but only " + std::to_string(eligible.size()) +
                        " entries are eligible");
  }
  rng.shuffle(eligible);
  std::vector<std::pair<int, std::vector<double>>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    int id = eligible[static_cast<std::size_t>(i)];
    auto row = entry(id);
    out.emplace_back(id, std::vector<double>(row.begin(), row.end()));
  }
  return out;
}

MemoryBank::Snapshot MemoryBank::snapshot() const {
  Snapshot s;
  s.k = k_;
  s.d = d_;
  s.alpha = alpha_;
  s.entries = entries_;
  s.initialized = initialized_;
  s.update_counts = update_counts_;
  return s;
}

MemoryBank MemoryBank::restore(const Snapshot& snap) {
  if (snap.version != 1) {
    throw FormatError("memory bank snapshot: unsupported version " +
                      std::to_string(snap.version));
  }
  MemoryBank b(snap.k, snap.d, snap.alpha);
  if (snap.entries.size() != b.entries_.size() ||
      snap.initialized.size() != b.initialized_.size() ||
      snap.update_counts.size() != b.update_counts_.size()) {
    throw FormatError("memory bank snapshot: field sizes inconsistent with k,d");
  }
  b.entries_ = snap.entries;
  b.initialized_ = snap.initialized;
  b.update_counts_ = snap.update_counts;
  return b;
}

}  // namespace kws
