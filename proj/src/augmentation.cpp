#include "kws/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kws/errors.hpp"

namespace kws {

namespace {

// Samples one edit over the current sequence; returns false when no edit is
// feasible under the length and bank constraints.
bool plan_random_edit(const std::vector<int>& seq, const MemoryBank& bank, Rng& rng,
                      EditPlan& plan) {
  const int len = static_cast<int>(seq.size());
  std::vector<EditPlan::Op> feasible = {EditPlan::Op::insert, EditPlan::Op::replace};
  if (len > 1) feasible.push_back(EditPlan::Op::erase);  // never delete down to empty

  plan.op = feasible[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(feasible.size()) - 1))];
  switch (plan.op) {
    case EditPlan::Op::insert: {
      plan.position = rng.uniform_int(0, len);
      plan.phoneme_id = bank.sample(1, {}, rng.split("phoneme"))[0].first;
      return true;
    }
    case EditPlan::Op::replace: {
      plan.position = rng.uniform_int(0, len - 1);
      std::set<int> exclude = {seq[static_cast<std::size_t>(plan.position)]};
      if (bank.eligible_count(exclude) < 1) return false;
      plan.phoneme_id = bank.sample(1, exclude, rng.split("phoneme"))[0].first;
      return true;
    }
    case EditPlan::Op::erase: {
      plan.position = rng.uniform_int(0, len - 1);
      plan.phoneme_id = -1;
      return true;
    }
  }
  return false;
}

void apply_edit(std::vector<int>& seq, const EditPlan& plan) {
  switch (plan.op) {
    case EditPlan::Op::insert:
      seq.insert(seq.begin() + plan.position, plan.phoneme_id);
      break;
    case EditPlan::Op::replace:
      seq[static_cast<std::size_t>(plan.position)] = plan.phoneme_id;
      break;
    case EditPlan::Op::erase:
      seq.erase(seq.begin() + plan.position);
      break;
  }
}

bool in_vocab(const std::vector<int>& seq, const std::vector<std::vector<int>>& vocab) {
  return std::find(vocab.begin(), vocab.end(), seq) != vocab.end();
}

}  // namespace

PairExample make_hard_negative(const PairExample& positive, int n_edits,
                               const MemoryBank& bank, const PhonemeInventory& inv,
                               const SynthesisConfig& syn,
                               const std::vector<std::vector<int>>& vocab, Rng rng) {
  if (positive.match_label != MatchLabel::positive) {
    throw ContractError("make_hard_negative: source pair is not positive");
  }
  if (n_edits < 1) throw ParamError("make_hard_negative: n_edits must be >= 1");
  if (!positive.enroll_text) {
    throw ContractError("make_hard_negative: source pair has no enrollment text");
  }
  if (bank.eligible_count({}) < 1) {
    throw AugmentationError("make_hard_negative: memory bank has no initialized entries");
  }

  const std::vector<int>& original = *positive.enroll_text;
  constexpr int kRetries = 64;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    Rng r = rng.split(static_cast<std::uint64_t>(attempt));
    std::vector<int> edited = original;
    bool ok = true;
    for (int e = 0; e < n_edits && ok; ++e) {
      EditPlan plan;
      Rng er = r.split("edit").split(static_cast<std::uint64_t>(e));
      ok = plan_random_edit(edited, bank, er, plan);
      if (ok) apply_edit(edited, plan);
    }
    if (!ok || edited.empty() || edited == original) continue;
    int dist = levenshtein(original, edited);
    if (dist < 1 || dist > n_edits) continue;  // edits cancelled out
    if (in_vocab(edited, vocab)) continue;     // collision with a real keyword

    PairExample out;
    out.query = positive.query;
    out.enroll_text = edited;
    out.enroll_audio = synthesize_utterance(inv, edited, syn, r.split("audio"));
    out.match_label = MatchLabel::negative;
    out.tri_label = TriLabel::augmented_hard_negative;
    out.difficulty = Difficulty::hard;
    out.query_keyword = positive.query_keyword;
    out.enroll_keyword = -1;  // edited sequence is not a vocabulary word
    out.validate();
    return out;
  }
  throw AugmentationError("make_hard_negative: no feasible edit plan after " +
                          std::to_string(kRetries) + " retries (word length " +
                          std::to_string(original.size()) + ", " + std::to_string(n_edits) +
                          " edits)");
}

int label_tri_class(const PairExample& pair) {
  if (pair.match_label == MatchLabel::positive) return 0;
  if (pair.tri_label == TriLabel::augmented_hard_negative) return 2;
  return pair.difficulty == Difficulty::hard ? 2 : 1;
}

std::vector<PairExample> rebalance_pairs(const std::vector<PairExample>& pairs,
                                         const std::map<int, double>& per_keyword_error,
                                         double boost_factor,
                                         const std::vector<std::vector<int>>& vocab,
                                         const PhonemeInventory& inv,
                                         const SynthesisConfig& syn, int hard_threshold,
                                         Rng rng) {
  for (const auto& [kw, err] : per_keyword_error) {
    if (err < 0.0 || err > 1.0) throw ParamError("rebalance_pairs: error rate outside [0,1]");
  }
  std::vector<PairExample> out = pairs;
  if (boost_factor <= 1.0 || per_keyword_error.empty()) return out;

  std::vector<double> rates;
  rates.reserve(per_keyword_error.size());
  for (const auto& [kw, err] : per_keyword_error) rates.push_back(err);
  std::sort(rates.begin(), rates.end());
  double median = rates.size() % 2 == 1
                      ? rates[rates.size() / 2]
                      : 0.5 * (rates[rates.size() / 2 - 1] + rates[rates.size() / 2]);

  std::map<int, int> pair_count;
  for (const auto& p : pairs) {
    if (p.query_keyword >= 0) ++pair_count[p.query_keyword];
  }

  std::uint64_t index = 0;
  for (const auto& [kw, err] : per_keyword_error) {
    if (!(err > median)) continue;  // only keywords strictly above the median
    if (kw < 0 || kw >= static_cast<int>(vocab.size())) continue;
    int current = pair_count.count(kw) ? pair_count.at(kw) : 0;
    if (current == 0) continue;
    int target = static_cast<int>(std::lround(boost_factor * current));
    int added = std::max(0, target - current);
    if (added == 0) continue;

    // nearest vocabulary neighbours by edit distance, ties to the lower
    // index; boosted pairs cycle over the closest three
    std::vector<std::pair<int, int>> neighbours;  // (distance, keyword)
    for (int other = 0; other < static_cast<int>(vocab.size()); ++other) {
      if (other == kw) continue;
      int d = levenshtein(vocab[static_cast<std::size_t>(kw)],
                          vocab[static_cast<std::size_t>(other)]);
      if (d == 0) continue;
      neighbours.emplace_back(d, other);
    }
    std::sort(neighbours.begin(), neighbours.end());
    if (neighbours.empty()) continue;
    if (neighbours.size() > 3) neighbours.resize(3);

    for (int i = 0; i < added; ++i) {
      int other = neighbours[static_cast<std::size_t>(i) % neighbours.size()].second;
      Rng r = rng.split("boost").split(index++);
      PairExample p;
      p.query = synthesize_utterance(inv, vocab[static_cast<std::size_t>(kw)], syn,
                                     r.split("query"));
      p.enroll_text = vocab[static_cast<std::size_t>(other)];
      p.enroll_audio = synthesize_utterance(inv, vocab[static_cast<std::size_t>(other)], syn,
                                            r.split("enroll"));
      p.match_label = MatchLabel::negative;
      int d = levenshtein(vocab[static_cast<std::size_t>(kw)],
                          vocab[static_cast<std::size_t>(other)]);
      p.difficulty = d <= hard_threshold ? Difficulty::hard : Difficulty::easy;
      p.tri_label = TriLabel::natural_negative;
      p.query_keyword = kw;
      p.enroll_keyword = other;
      p.validate();
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace kws
