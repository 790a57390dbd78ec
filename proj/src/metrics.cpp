#include "kws/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "kws/errors.hpp"

namespace kws {

void ScoredSet::validate() const {
  if (scores.size() != labels.size() ||
      (!difficulty.empty() && difficulty.size() != scores.size())) {
    throw MetricError("scored set: field lengths disagree");
  }
  int pos = 0, neg = 0;
  for (int l : labels) (l == 1 ? pos : neg)++;
  if (pos < 1 || neg < 1) {
    throw MetricError("scored set: need at least one positive and one negative, have " +
                      std::to_string(pos) + "/" + std::to_string(neg));
  }
}

double auc(const ScoredSet& s) {
  s.validate();
  const std::size_t n = s.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });

  // rank-sum with average ranks over tied groups
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && s.scores[order[j]] == s.scores[order[i]]) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (s.labels[order[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      } else {
        ++n_neg;
      }
    }
    i = j;
  }
  double u = pos_rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

EerResult eer(const ScoredSet& s) {
  s.validate();
  // Operating points: accept iff score >= t, for t at each unique score and
  // one point beyond the maximum. far falls and frr rises as t grows.
  std::vector<double> uniq = s.scores;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  double n_pos = 0, n_neg = 0;
  for (int l : s.labels) (l == 1 ? n_pos : n_neg)++;

  auto rates_at = [&](double t) {
    double fa = 0, fr = 0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      if (s.labels[i] == 1 && s.scores[i] < t) ++fr;
      if (s.labels[i] == 0 && s.scores[i] >= t) ++fa;
    }
    return std::pair<double, double>{fa / n_neg, fr / n_pos};
  };

  double prev_t = uniq.front() - 1.0;  // accept-everything point
  auto [prev_far, prev_frr] = rates_at(prev_t);
  double prev_d = prev_far - prev_frr;
  if (prev_d == 0.0) return {prev_far, prev_t};

  std::vector<double> points(uniq.begin(), uniq.end());
  points.push_back(uniq.back() + 1.0);  // reject-everything point
  for (double t : points) {
    auto [far, frr] = rates_at(t);
    double d = far - frr;
    if (d == 0.0) return {far, t};
    if ((prev_d > 0.0) != (d > 0.0)) {
      double lambda = prev_d / (prev_d - d);
      return {prev_far + lambda * (far - prev_far), prev_t + lambda * (t - prev_t)};
    }
    prev_t = t;
    prev_far = far;
    prev_frr = frr;
    prev_d = d;
  }
  throw MetricError("eer: no crossing found");  // unreachable for valid sets
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ScoredSet subset_of(const ScoredSet& s, const std::optional<Difficulty>& want) {
  ScoredSet out;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    bool keep;
    if (!want) {
      keep = true;
    } else if (s.labels[i] == 1) {
      keep = true;  // positives belong to every difficulty subset
    } else {
      keep = !s.difficulty.empty() && s.difficulty[i] == *want;
    }
    if (keep) {
      out.scores.push_back(s.scores[i]);
      out.labels.push_back(s.labels[i]);
      if (!s.difficulty.empty()) out.difficulty.push_back(s.difficulty[i]);
    }
  }
  return out;
}

SubsetMetrics metrics_for(const std::string& name, const ScoredSet& s) {
  SubsetMetrics m;
  m.name = name;
  for (int l : s.labels) (l == 1 ? m.n_pos : m.n_neg)++;
  if (m.n_pos >= 1 && m.n_neg >= 1) {
    m.present = true;
    m.auc = auc(s);
    EerResult e = eer(s);
    m.eer = e.rate;
    m.threshold = e.threshold;
  }
  return m;
}

}  // namespace

MetricsReport report(const ScoredSet& s) {
  if (s.scores.size() != s.labels.size()) throw MetricError("report: field lengths disagree");
  MetricsReport r;
  r.rows.push_back(metrics_for("all", s));
  r.rows.push_back(metrics_for("easy", subset_of(s, Difficulty::easy)));
  r.rows.push_back(metrics_for("hard", subset_of(s, Difficulty::hard)));
  return r;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out << "subset,auc,eer,threshold,n_pos,n_neg\n";
  for (const auto& row : rows) {
    out << row.name << ",";
    if (row.present) {
      out << fmt_double(row.auc) << "," << fmt_double(row.eer) << ","
          << fmt_double(row.threshold);
    } else {
      out << ",,";
    }
    out << "," << row.n_pos << "," << row.n_neg << "\n";
  }
  return out.str();
}

MetricsReport MetricsReport::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "subset,auc,eer,threshold,n_pos,n_neg") {
    throw FormatError("metrics csv: bad header");
  }
  MetricsReport r;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    while (fields.size() < 6) fields.push_back("");
    if (fields.size() != 6) {
      throw FormatError("metrics csv: line " + std::to_string(line_no) + ": bad field count");
    }
    SubsetMetrics m;
    m.name = fields[0];
    m.present = !fields[1].empty();
    try {
      if (m.present) {
        m.auc = std::stod(fields[1]);
        m.eer = std::stod(fields[2]);
        m.threshold = std::stod(fields[3]);
      }
      m.n_pos = std::stoi(fields[4]);
      m.n_neg = std::stoi(fields[5]);
    } catch (const std::exception&) {
      throw FormatError("metrics csv: line " + std::to_string(line_no) + ": bad number");
    }
    r.rows.push_back(std::move(m));
  }
  return r;
}

const SubsetMetrics* MetricsReport::find(const std::string& name) const {
  for (const auto& row : rows) {
    if (row.name == name) return &row;
  }
  return nullptr;
}

}  // namespace kws
