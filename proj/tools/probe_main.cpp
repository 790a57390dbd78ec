// Development probe: raw similarity statistics of a checkpoint on a split,
// bypassing the verifier heads. Reports the AUC of the mean-diagonal
// statistic so the embedding space quality is visible in isolation.

#include <algorithm>
#include <iostream>
#include <string>

#include "kws/alignment.hpp"
#include "kws/checkpoint.hpp"
#include "kws/dataset_io.hpp"
#include "kws/encoders.hpp"
#include "kws/metrics.hpp"
#include "kws/ops.hpp"
#include "kws/verifier.hpp"

using namespace kws;

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: probe <checkpoint> <dataset_dir> <split>\n";
    return 2;
  }
  LoadedCheckpoint ck = load_checkpoint(argv[1]);
  LoadedPairs loaded = load_pairs(std::string(argv[2]) + "/" + argv[3] + ".pairs");
  NoGradGuard ng;

  ScoredSet pooled_diag, raw_max;
  for (const auto& p : loaded.pairs) {
    const Model& m = ck.model;
    EncodedSequence q_enc = encode_audio(m.audio_enc, utterance_frames(p.query),
                                         Origin::query_audio);
    Tensor q_proj = project(m.audio_proj, q_enc, ck.config.ln_eps).embeddings;
    EncodedSequence t_enc = encode_text(m.text_enc, *p.enroll_text);
    Tensor t_proj = project(m.text_proj, t_enc, ck.config.ln_eps).embeddings;
    PooledSequence pq = pool_by_alignment(q_proj, p.query.spans, p.query.phonemes);

    // statistic 1: mean cosine of pooled query phoneme i vs text phoneme i
    // (only meaningful for positives; negatives have mismatched lengths, use
    // min length)
    int n = std::min(pq.embeddings.rows(), t_proj.rows());
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      diag += cosine_similarity(select_row(pq.embeddings, i), select_row(t_proj, i), 1e-8)
                  .scalar_value();
    }
    diag /= n;

    // statistic 2: mean over text rows of max-similarity against query frames
    Tensor m_at = similarity_matrix(t_proj, q_proj, 1e-8);
    Tensor row_max = max_over_cols(m_at);
    double mx = 0.0;
    for (std::size_t i = 0; i < row_max.size(); ++i) mx += row_max.at(i);
    mx /= static_cast<double>(row_max.size());

    int label = p.match_label == MatchLabel::positive ? 1 : 0;
    pooled_diag.scores.push_back(diag);
    pooled_diag.labels.push_back(label);
    pooled_diag.difficulty.push_back(p.difficulty);
    raw_max.scores.push_back(mx);
    raw_max.labels.push_back(label);
    raw_max.difficulty.push_back(p.difficulty);
  }

  auto show = [](const char* name, const ScoredSet& s) {
    MetricsReport rep = report(s);
    std::cout << name << ": ";
    for (const auto& row : rep.rows) {
      if (row.present) std::cout << row.name << "=" << row.auc << " ";
    }
    std::cout << "\n";
  };
  show("pooled-diagonal-cosine", pooled_diag);
  show("rowwise-max-cosine   ", raw_max);
  return 0;
}
