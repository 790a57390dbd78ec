#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "kws/corpus.hpp"
#include "kws/errors.hpp"
#include "kws/rng.hpp"

using namespace kws;

namespace {

// Full-matrix dynamic-programming oracle, written independently of the
// two-row implementation in the library.
int lev_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      int sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[n][m];
}

std::vector<std::vector<int>> all_sequences(int max_len, int alphabet) {
  std::vector<std::vector<int>> out;
  for (int len = 0; len <= max_len; ++len) {
    long count = 1;
    for (int i = 0; i < len; ++i) count *= alphabet;
    for (long code = 0; code < count; ++code) {
      std::vector<int> seq(static_cast<std::size_t>(len));
      long c = code;
      for (int i = 0; i < len; ++i) {
        seq[static_cast<std::size_t>(i)] = static_cast<int>(c % alphabet);
        c /= alphabet;
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("inventory separation and determinism") {
  Rng rng(42);
  PhonemeInventory inv = generate_inventory(2, 8, 1.0, rng);
  CHECK(inv.min_pairwise_distance() >= 1.0 - 1e-12);

  PhonemeInventory a = generate_inventory(40, 16, 1.0, Rng(7));
  PhonemeInventory b = generate_inventory(40, 16, 1.0, Rng(7));
  CHECK(a.prototypes == b.prototypes);
  CHECK(a.labels == b.labels);
  CHECK(a.checksum() == b.checksum());

  // brute force over all 780 pairs
  int k = a.k();
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < a.d_in; ++c) {
        double diff = a.prototype(i)[static_cast<std::size_t>(c)] -
                      a.prototype(j)[static_cast<std::size_t>(c)];
        d2 += diff * diff;
      }
      CHECK(std::sqrt(d2) >= 1.0 - 1e-12);
    }
  }

  std::set<std::string> labels(a.labels.begin(), a.labels.end());
  CHECK(labels.size() == a.labels.size());

  CHECK_THROWS_AS(generate_inventory(1, 8, 1.0, Rng(0)), ParamError);
  CHECK_THROWS_AS(generate_inventory(4, 1, 1.0, Rng(0)), ParamError);
}

TEST_CASE("utterance synthesis honors durations and noise") {
  Rng rng(3);
  PhonemeInventory inv = generate_inventory(5, 4, 1.0, rng.split("inv"));
  std::vector<double> no_offset(4, 0.0);

  // noiseless, unit duration: frames equal prototypes row for row
  Utterance clean = synthesize_utterance(inv, {2, 0, 4}, 1, 1, 0.0, no_offset, rng.split("a"));
  CHECK(clean.frame_count == 3);
  for (int t = 0; t < 3; ++t) {
    auto proto = inv.prototype(clean.phonemes[static_cast<std::size_t>(t)]);
    for (int c = 0; c < 4; ++c) {
      CHECK(clean.frames[static_cast<std::size_t>(t) * 4 + c] ==
            proto[static_cast<std::size_t>(c)]);
    }
  }

  // forced durations give exact spans
  Utterance forced = synthesize_utterance(inv, {1, 2, 3}, 2, 2, 0.1, no_offset, rng.split("b"));
  CHECK(forced.frame_count == 6);
  CHECK(forced.spans == std::vector<Span>{{0, 2}, {2, 4}, {4, 6}});

  // fixed seed reproduces bit-identically
  Utterance u1 = synthesize_utterance(inv, {0, 1}, 2, 4, 0.3, no_offset, Rng(99));
  Utterance u2 = synthesize_utterance(inv, {0, 1}, 2, 4, 0.3, no_offset, Rng(99));
  CHECK(u1 == u2);

  CHECK_THROWS_AS(synthesize_utterance(inv, {}, 1, 2, 0.0, no_offset, rng), ContractError);
  CHECK_THROWS_AS(synthesize_utterance(inv, {0}, 0, 2, 0.0, no_offset, rng), ParamError);
  CHECK_THROWS_AS(synthesize_utterance(inv, {7}, 1, 2, 0.0, no_offset, rng), VocabError);
}

TEST_CASE("every constructed utterance partitions its frames") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    PhonemeInventory inv = generate_inventory(6, 4, 0.5, rng.split("inv"));
    std::vector<int> word;
    int len = rng.uniform_int(1, 7);
    for (int i = 0; i < len; ++i) word.push_back(rng.uniform_int(0, 5));
    Utterance u = synthesize_utterance(inv, word, SynthesisConfig{1, 4, 0.2, 0.1},
                                       rng.split("utt"));
    CHECK_NOTHROW(u.validate());
    CHECK(u.spans.size() == word.size());
    CHECK(u.spans.front().begin == 0);
    CHECK(u.spans.back().end == u.frame_count);
  }
}

TEST_CASE("levenshtein basics") {
  std::vector<int> a = {1, 2, 3};
  CHECK(levenshtein(a, a) == 0);
  std::vector<int> b = {1, 9, 3};
  CHECK(levenshtein(a, b) == 1);
  // k i t t e n / s i t t i n g as ids
  std::vector<int> kitten = {10, 8, 19, 19, 4, 13};
  std::vector<int> sitting = {18, 8, 19, 19, 8, 13, 6};
  CHECK(levenshtein(kitten, sitting) == 3);
  CHECK(lev_oracle(kitten, sitting) == 3);
}

TEST_CASE("levenshtein matches the DP oracle and is a metric") {
  // exhaustive on a reduced domain in the unit suite; the acceptance suite
  // widens this to length 6 over 5 symbols
  auto seqs = all_sequences(4, 3);
  for (const auto& a : seqs) {
    for (const auto& b : seqs) {
      int d = levenshtein(a, b);
      CHECK(d == lev_oracle(a, b));
      CHECK(d >= 0);
      CHECK((d == 0) == (a == b));
      CHECK(d == levenshtein(b, a));
    }
  }
  // triangle inequality, sampled over the same domain
  Rng rng(5);
  auto pick = [&]() -> const std::vector<int>& {
    return seqs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(seqs.size()) - 1))];
  };
  for (int trial = 0; trial < 4000; ++trial) {
    const auto& a = pick();
    const auto& b = pick();
    const auto& c = pick();
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
  }
}

TEST_CASE("build_pairs labels and counts") {
  Rng rng(11);
  PhonemeInventory inv = generate_inventory(10, 6, 1.0, rng.split("inv"));
  // two keywords one edit apart plus one distant keyword
  std::vector<std::vector<int>> vocab = {{0, 1, 2, 3}, {0, 1, 2, 4}, {5, 6, 7, 8, 9}};
  SynthesisConfig syn{1, 2, 0.1, 0.0};

  auto pairs = build_pairs(vocab, inv, {6, 5, 4}, 2, syn, rng.split("pairs"));
  int pos = 0, easy = 0, hard = 0;
  for (const auto& p : pairs) {
    CHECK_NOTHROW(p.validate());
    CHECK(p.enroll_text.has_value());
    CHECK(p.enroll_audio.has_value());
    if (p.match_label == MatchLabel::positive) {
      ++pos;
      CHECK(p.query_keyword == p.enroll_keyword);
      CHECK(*p.enroll_text == p.query.phonemes);
    } else if (p.difficulty == Difficulty::hard) {
      ++hard;
      CHECK(levenshtein(p.query.phonemes, *p.enroll_text) <= 2);
    } else {
      ++easy;
      CHECK(levenshtein(p.query.phonemes, *p.enroll_text) > 2);
    }
  }
  CHECK(pos == 6);
  CHECK(easy == 5);
  CHECK(hard == 4);

  // vocabulary of two keywords at distance 1: every cross pair is hard
  std::vector<std::vector<int>> close_vocab = {{0, 1, 2}, {0, 1, 3}};
  auto all_hard = build_pairs(close_vocab, inv, {0, 0, 3}, 2, syn, rng.split("h"));
  for (const auto& p : all_hard) CHECK(p.difficulty == Difficulty::hard);

  // unattainable hard pairs name the achievable count
  std::vector<std::vector<int>> far = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
  CHECK_THROWS_AS(build_pairs(far, inv, {1, 1, 1}, 2, syn, rng.split("f")), GenerationError);

  // determinism: same seed, same pairs, field for field
  auto again = build_pairs(vocab, inv, {6, 5, 4}, 2, syn, rng.split("pairs"));
  CHECK(pairs == again);
}

TEST_CASE("generated vocabulary contains confusable clusters") {
  auto vocab = generate_vocab(60, 40, 3, 8, Rng(7));
  CHECK(vocab.size() == 60);
  std::set<std::vector<int>> uniq(vocab.begin(), vocab.end());
  CHECK(uniq.size() == 60);
  int close_pairs = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    for (std::size_t j = i + 1; j < vocab.size(); ++j) {
      if (levenshtein(vocab[i], vocab[j]) <= 2) ++close_pairs;
    }
  }
  CHECK(close_pairs >= 5);
}

}  // TEST_SUITE
