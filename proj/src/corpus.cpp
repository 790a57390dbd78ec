#include "kws/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "kws/bytes.hpp"
#include "kws/errors.hpp"

namespace kws {

std::span<const double> PhonemeInventory::prototype(int id) const {
  if (id < 0 || id >= k()) {
    throw VocabError("phoneme id " + std::to_string(id) + " out of range [0," +
                     std::to_string(k()) + ")");
  }
  return {prototypes.data() + static_cast<std::size_t>(id) * d_in,
          static_cast<std::size_t>(d_in)};
}

std::uint64_t PhonemeInventory::checksum() const {
  auto bytes = doubles_to_le_bytes(prototypes);
  std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
  for (const auto& l : labels) h = fnv1a64(l.data(), l.size(), h);
  std::uint32_t dims[2] = {static_cast<std::uint32_t>(k()), static_cast<std::uint32_t>(d_in)};
  return fnv1a64(dims, sizeof(dims), h);
}

double PhonemeInventory::min_pairwise_distance() const {
  double best = -1.0;
  for (int i = 0; i < k(); ++i) {
    for (int j = i + 1; j < k(); ++j) {
      double d2 = 0.0;
      for (int c = 0; c < d_in; ++c) {
        double diff = prototypes[static_cast<std::size_t>(i) * d_in + c] -
                      prototypes[static_cast<std::size_t>(j) * d_in + c];
        d2 += diff * diff;
      }
      double d = std::sqrt(d2);
      if (best < 0.0 || d < best) best = d;
    }
  }
  return best;
}

PhonemeInventory generate_inventory(int k, int d_in, double separation, Rng rng) {
  if (k < 2) throw ParamError("generate_inventory: need at least 2 phonemes");
  if (d_in < 2) throw ParamError("generate_inventory: need frame dimension >= 2");
  if (!(separation > 0.0)) throw ParamError("generate_inventory: separation must be positive");

  constexpr int kRetries = 16;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    Rng r = rng.split(static_cast<std::uint64_t>(attempt));
    PhonemeInventory inv;
    inv.d_in = d_in;
    inv.prototypes.resize(static_cast<std::size_t>(k) * d_in);
    for (auto& v : inv.prototypes) v = r.normal();
    inv.labels.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) inv.labels.push_back("ph" + std::to_string(i));

    double min_dist = inv.min_pairwise_distance();
    if (min_dist <= 0.0) continue;  // degenerate draw, resample
    if (min_dist < separation) {
      // rescale the cloud until the closest pair sits at the separation target
      double scale = separation / min_dist;
      for (auto& v : inv.prototypes) v *= scale;
    }
    return inv;
  }
  throw GenerationError("generate_inventory: could not reach separation " +
                        std::to_string(separation) + " for K=" + std::to_string(k) +
                        ", d_in=" + std::to_string(d_in));
}

void Utterance::validate() const {
  if (frames.size() != static_cast<std::size_t>(frame_count) * frame_dim) {
    throw ShapeError("utterance: frame buffer does not match frame_count*frame_dim");
  }
  if (spans.size() != phonemes.size()) {
    throw AlignmentError("utterance: " + std::to_string(spans.size()) + " spans for " +
                         std::to_string(phonemes.size()) + " phonemes");
  }
  int cursor = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const Span& s = spans[i];
    if (s.begin != cursor) {
      throw AlignmentError("utterance: span " + std::to_string(i) + " starts at " +
                           std::to_string(s.begin) + ", expected " + std::to_string(cursor));
    }
    if (s.end <= s.begin) {
      throw AlignmentError("utterance: span " + std::to_string(i) + " is empty");
    }
    cursor = s.end;
  }
  if (cursor != frame_count) {
    throw AlignmentError("utterance: spans cover [0," + std::to_string(cursor) +
                         ") but there are " + std::to_string(frame_count) + " frames");
  }
}

Utterance synthesize_utterance(const PhonemeInventory& inv, const std::vector<int>& phonemes,
                               int dur_min, int dur_max, double noise_sigma,
                               const std::vector<double>& speaker_offset, Rng rng) {
  if (phonemes.empty()) throw ContractError("synthesize_utterance: empty phoneme sequence");
  if (dur_min < 1 || dur_max < dur_min) {
    throw ParamError("synthesize_utterance: need 1 <= dur_min <= dur_max");
  }
  if (!speaker_offset.empty() && speaker_offset.size() != static_cast<std::size_t>(inv.d_in)) {
    throw ShapeError("synthesize_utterance: speaker offset width mismatch");
  }

  Utterance u;
  u.phonemes = phonemes;
  u.frame_dim = inv.d_in;
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    auto proto = inv.prototype(phonemes[i]);  // validates the id
    int dur = dur_min == dur_max ? dur_min : rng.uniform_int(dur_min, dur_max);
    Span s{u.frame_count, u.frame_count + dur};
    for (int f = 0; f < dur; ++f) {
      for (int c = 0; c < inv.d_in; ++c) {
        double v = proto[static_cast<std::size_t>(c)];
        if (!speaker_offset.empty()) v += speaker_offset[static_cast<std::size_t>(c)];
        if (noise_sigma > 0.0) v += rng.normal(0.0, noise_sigma);
        u.frames.push_back(v);
      }
    }
    u.spans.push_back(s);
    u.frame_count += dur;
  }
  u.validate();
  return u;
}

Utterance synthesize_utterance(const PhonemeInventory& inv, const std::vector<int>& phonemes,
                               const SynthesisConfig& cfg, Rng rng) {
  std::vector<double> offset(static_cast<std::size_t>(inv.d_in), 0.0);
  if (cfg.speaker_sigma > 0.0) {
    for (auto& v : offset) v = rng.normal(0.0, cfg.speaker_sigma);
  }
  return synthesize_utterance(inv, phonemes, cfg.dur_min, cfg.dur_max, cfg.noise_sigma,
                              offset, rng);
}

namespace {

template <typename Row>
int lev_two_row(std::span<const int> a, std::span<const int> b, Row& prev, Row& cur) {
  const std::size_t n = b.size();
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

}  // namespace

int levenshtein(std::span<const int> a, std::span<const int> b) {
  const std::size_t n = b.size();
  if (n < 64) {  // keyword-scale inputs run allocation-free
    std::array<int, 64> prev, cur;
    return lev_two_row(a, b, prev, cur);
  }
  std::vector<int> prev(n + 1), cur(n + 1);
  return lev_two_row(a, b, prev, cur);
}

void PairExample::validate() const {
  if (!enroll_text && !enroll_audio) {
    throw ContractError("pair: at least one enrollment modality required");
  }
  if (match_label == MatchLabel::positive && tri_label != TriLabel::positive) {
    throw ContractError("pair: positive match label requires positive tri label");
  }
  if (match_label == MatchLabel::positive && difficulty.has_value()) {
    throw ContractError("pair: difficulty is defined only for negatives");
  }
  if (match_label == MatchLabel::negative && !difficulty.has_value()) {
    throw ContractError("pair: negative without difficulty");
  }
  query.validate();
  if (enroll_audio) enroll_audio->validate();
}

std::vector<std::vector<int>> generate_vocab(int size, int k_phonemes, int len_min,
                                             int len_max, Rng rng) {
  if (size < 2) throw ParamError("generate_vocab: need at least 2 keywords");
  if (len_min < 1 || len_max < len_min) throw ParamError("generate_vocab: bad length range");

  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> vocab;
  auto fresh_word = [&](Rng& r) {
    int len = r.uniform_int(len_min, len_max);
    std::vector<int> w(static_cast<std::size_t>(len));
    for (auto& p : w) p = r.uniform_int(0, k_phonemes - 1);
    return w;
  };

  int guard = 0;
  while (static_cast<int>(vocab.size()) < size) {
    if (++guard > size * 200) {
      throw GenerationError("generate_vocab: could not build " + std::to_string(size) +
                            " distinct keywords");
    }
    Rng r = rng.split(static_cast<std::uint64_t>(guard));
    std::vector<int> w;
    // After a seed population exists, half the words are near-variants of an
    // existing word so confusable (hard) pairs exist by construction.
    if (vocab.size() >= 4 && r.uniform() < 0.5) {
      const auto& base = vocab[static_cast<std::size_t>(
          r.uniform_int(0, static_cast<int>(vocab.size()) - 1))];
      w = base;
      int edits = r.uniform() < 0.7 ? 1 : 2;
      for (int e = 0; e < edits; ++e) {
        int op = r.uniform_int(0, 2);
        if (op == 0 && static_cast<int>(w.size()) < len_max) {  // insert
          int pos = r.uniform_int(0, static_cast<int>(w.size()));
          w.insert(w.begin() + pos, r.uniform_int(0, k_phonemes - 1));
        } else if (op == 1 && static_cast<int>(w.size()) > len_min) {  // delete
          int pos = r.uniform_int(0, static_cast<int>(w.size()) - 1);
          w.erase(w.begin() + pos);
        } else {  // replace
          int pos = r.uniform_int(0, static_cast<int>(w.size()) - 1);
          int old = w[static_cast<std::size_t>(pos)];
          int next = r.uniform_int(0, k_phonemes - 2);
          if (next >= old) ++next;
          w[static_cast<std::size_t>(pos)] = next;
        }
      }
    } else {
      w = fresh_word(r);
    }
    if (seen.insert(w).second) vocab.push_back(std::move(w));
  }
  return vocab;
}

std::vector<PairExample> build_pairs(const std::vector<std::vector<int>>& vocab,
                                     const PhonemeInventory& inv, const PairCounts& counts,
                                     int hard_threshold, const SynthesisConfig& syn, Rng rng) {
  if (vocab.size() < 2) throw ParamError("build_pairs: vocabulary must hold >= 2 keywords");
  if (hard_threshold < 1) throw ParamError("build_pairs: hard_threshold must be >= 1");
  if (counts.positives < 0 || counts.easy_negatives < 0 || counts.hard_negatives < 0) {
    throw ParamError("build_pairs: negative class count requested");
  }

  const int v = static_cast<int>(vocab.size());
  std::vector<std::pair<int, int>> easy_pool, hard_pool;
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < v; ++j) {
      if (i == j) continue;
      int dist = levenshtein(vocab[static_cast<std::size_t>(i)], vocab[static_cast<std::size_t>(j)]);
      if (dist == 0) continue;  // duplicate keyword text, not a negative
      (dist <= hard_threshold ? hard_pool : easy_pool).emplace_back(i, j);
    }
  }
  if (counts.hard_negatives > 0 && hard_pool.empty()) {
    throw GenerationError(
        "build_pairs: no keyword pairs within hard threshold; achievable hard count is 0");
  }
  if (counts.easy_negatives > 0 && easy_pool.empty()) {
    throw GenerationError(
        "build_pairs: no keyword pairs beyond hard threshold; achievable easy count is 0");
  }

  std::vector<PairExample> out;
  out.reserve(static_cast<std::size_t>(counts.positives + counts.easy_negatives +
                                       counts.hard_negatives));

  auto make_pair = [&](int query_kw, int enroll_kw, std::uint64_t index) {
    Rng r = rng.split("pair").split(index);
    PairExample p;
    p.query = synthesize_utterance(inv, vocab[static_cast<std::size_t>(query_kw)], syn,
                                   r.split("query"));
    p.enroll_text = vocab[static_cast<std::size_t>(enroll_kw)];
    p.enroll_audio = synthesize_utterance(inv, vocab[static_cast<std::size_t>(enroll_kw)], syn,
                                          r.split("enroll"));
    p.query_keyword = query_kw;
    p.enroll_keyword = enroll_kw;
    if (query_kw == enroll_kw) {
      p.match_label = MatchLabel::positive;
      p.tri_label = TriLabel::positive;
    } else {
      p.match_label = MatchLabel::negative;
      int dist = levenshtein(vocab[static_cast<std::size_t>(query_kw)],
                             vocab[static_cast<std::size_t>(enroll_kw)]);
      p.difficulty = dist <= hard_threshold ? Difficulty::hard : Difficulty::easy;
      p.tri_label = TriLabel::natural_negative;
    }
    p.validate();
    return p;
  };

  std::uint64_t index = 0;
  Rng pick = rng.split("class-pick");
  for (int i = 0; i < counts.positives; ++i) {
    int kw = pick.uniform_int(0, v - 1);
    out.push_back(make_pair(kw, kw, index++));
  }
  for (int i = 0; i < counts.easy_negatives; ++i) {
    auto [a, b] = easy_pool[static_cast<std::size_t>(
        pick.uniform_int(0, static_cast<int>(easy_pool.size()) - 1))];
    out.push_back(make_pair(a, b, index++));
  }
  for (int i = 0; i < counts.hard_negatives; ++i) {
    auto [a, b] = hard_pool[static_cast<std::size_t>(
        pick.uniform_int(0, static_cast<int>(hard_pool.size()) - 1))];
    out.push_back(make_pair(a, b, index++));
  }
  return out;
}

}  // namespace kws
