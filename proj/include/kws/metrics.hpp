#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kws/corpus.hpp"

namespace kws {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // 1 positive, 0 negative
  std::vector<std::optional<Difficulty>> difficulty;  // per item, negatives only

  void validate() const;  // equal lengths; MetricError without >=1 pos and neg
};

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney).
double auc(const ScoredSet& s);

struct EerResult {
  double rate = 0.0;
  double threshold = 0.0;
};

/// Rate where false-accept and false-reject cross, linearly interpolated
/// between adjacent operating points; the crossing threshold is reported.
EerResult eer(const ScoredSet& s);

struct SubsetMetrics {
  std::string name;
  bool present = false;  // absent subsets keep counts but no metric values
  double auc = 0.0;
  double eer = 0.0;
  double threshold = 0.0;
  int n_pos = 0;
  int n_neg = 0;
};

struct MetricsReport {
  std::vector<SubsetMetrics> rows;

  std::string to_csv() const;
  static MetricsReport from_csv(const std::string& text);
  const SubsetMetrics* find(const std::string& name) const;
};

/// AUC/EER overall plus per-difficulty subsets (positives vs easy negatives,
/// positives vs hard negatives). Empty subsets are marked absent, not zero.
MetricsReport report(const ScoredSet& s);

}  // namespace kws
