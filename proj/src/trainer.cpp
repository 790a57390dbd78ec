#include "kws/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "kws/augmentation.hpp"
#include "kws/contrastive.hpp"
#include "kws/errors.hpp"
#include "kws/ops.hpp"

namespace kws {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double label_of(const PairExample& p) {
  return p.match_label == MatchLabel::positive ? 1.0 : 0.0;
}

Tensor mean_of(std::vector<Tensor> terms) {
  Tensor acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
  return affine(acc, 1.0 / static_cast<double>(terms.size()), 0.0);
}

void check_finite(const char* name, const Tensor& t) {
  if (!std::isfinite(t.scalar_value())) {
    throw NumericError(std::string("training aborted: loss component ") + name +
                       " is not finite");
  }
}

}  // namespace

std::string EpochLog::to_line() const {
  std::ostringstream out;
  out << "epoch=" << epoch << " l_uat=" << fmt(l_uat) << " l_uat3=" << fmt(l_uat3)
      << " l_clat=" << fmt(l_clat) << " l_uaa=" << fmt(l_uaa) << " l_claa=" << fmt(l_claa)
      << " l_uata=" << fmt(l_uata) << " l_at=" << fmt(l_at) << " l_aa=" << fmt(l_aa)
      << " total=" << fmt(total) << " val_auc_text=" << fmt(auc_text)
      << " val_eer_text=" << fmt(eer_text) << " val_auc_audio=" << fmt(auc_audio)
      << " val_eer_audio=" << fmt(eer_audio) << " val_auc_both=" << fmt(auc_both)
      << " val_eer_both=" << fmt(eer_both);
  return out.str();
}

ScoredSet score_pairs(const Model& model, const std::vector<PairExample>& pairs,
                      EnrollMode mode, Rng rng) {
  ScoredSet set;
  set.scores.reserve(pairs.size());
  // one shared reference sample per run: every pair sees the same injected
  // rows, so the sampling cannot perturb the score ranking
  Rng shared = rng.split("shared-references");
  for (const PairExample& p : pairs) {
    std::optional<std::vector<int>> text =
        mode != EnrollMode::audio ? p.enroll_text : std::nullopt;
    std::optional<Utterance> audio =
        mode != EnrollMode::text ? p.enroll_audio : std::nullopt;
    double s = infer(model, p.query, text, audio, shared);
    set.scores.push_back(s);
    set.labels.push_back(p.match_label == MatchLabel::positive ? 1 : 0);
    set.difficulty.push_back(p.difficulty);
  }
  return set;
}

std::vector<EpochLog> train_model(Model& model, TrainState& state, const Corpus& corpus,
                                  const std::vector<PairExample>& train_pairs,
                                  const std::vector<PairExample>& val_pairs,
                                  const RunConfig& config, int epochs, std::ostream* log) {
  config.validate();
  const SynthesisConfig syn = config.synthesis_config();
  const ContrastiveConfig ccfg{config.tau, config.cos_eps};
  const Rng root(config.seed);
  std::vector<EpochLog> logs;

  for (int run = 0; run < epochs; ++run) {
    const int epoch = state.epochs_done;  // absolute, 0-based
    Rng er = root.split("epoch").split(static_cast<std::uint64_t>(epoch));
    // stepped decay keyed on the absolute epoch, so resumed runs see the
    // same rate sequence as uninterrupted ones
    double lr = config.lr * std::pow(config.lr_decay, epoch / config.lr_decay_interval);

    // 1. epoch working set: base pairs + bank-driven hard negatives
    std::vector<PairExample> pairs = train_pairs;
    if (config.use_bank && config.augment_fraction > 0.0 &&
        model.bank.eligible_count({}) >= 2) {
      std::vector<std::size_t> positives;
      for (std::size_t i = 0; i < train_pairs.size(); ++i) {
        if (train_pairs[i].match_label == MatchLabel::positive) positives.push_back(i);
      }
      Rng order = er.split("augment-order");
      order.shuffle(positives);
      // fractions above 1 revisit positives with fresh edit plans
      auto n_aug = static_cast<std::size_t>(
          config.augment_fraction * static_cast<double>(positives.size()));
      for (std::size_t i = 0; i < n_aug; ++i) {
        Rng ar = er.split("augment").split(static_cast<std::uint64_t>(i));
        int n_edits = ar.split("n-edits").uniform() < config.edit2_prob ? 2 : 1;
        try {
          pairs.push_back(make_hard_negative(train_pairs[positives[i % positives.size()]],
                                             n_edits, model.bank, corpus.inventory, syn,
                                             corpus.vocab, ar.split("plan")));
        } catch (const AugmentationError&) {
          // infeasible source word under current bank content; skip it
        }
      }
    }

    // 2. pair rebalancing from the previous epoch's error rates
    if (config.boost_factor > 1.0 && !state.keyword_error.empty()) {
      pairs = rebalance_pairs(pairs, state.keyword_error, config.boost_factor, corpus.vocab,
                              corpus.inventory, syn, config.hard_threshold,
                              er.split("rebalance"));
    }

    Rng shuffle_rng = er.split("shuffle");
    shuffle_rng.shuffle(pairs);

    // 3. mini-batch SGD
    double sum_uat = 0, sum_uat3 = 0, sum_clat = 0, sum_uaa = 0, sum_claa = 0,
           sum_uata = 0, sum_at = 0, sum_aa = 0, sum_total = 0;
    std::map<int, std::pair<int, int>> kw_stats;  // keyword -> {errors, total}
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    std::size_t n_batches = 0;

    for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
      std::size_t end = std::min(start + batch_size, pairs.size());
      // shared reference rows within the batch; resampled across batches
      Rng batch_rng = er.split("inject").split(static_cast<std::uint64_t>(n_batches));
      std::vector<PairForward> fwd;
      fwd.reserve(end - start);
      std::vector<Tensor> uat_terms, uat3_terms, uaa_terms, uata_terms;
      std::vector<Tensor> cl_anchors, cl_text_keys, cl_audio_keys;
      std::vector<std::vector<int>> cl_ids;

      for (std::size_t i = start; i < end; ++i) {
        const PairExample& p = pairs[i];
        PairForward f = forward_pair(model, p, config.use_bank, batch_rng);
        double y = label_of(p);
        bool synthesized = p.tri_label == TriLabel::augmented_hard_negative;
        // synthesized confusables exist for the 3-class discriminator; the
        // binary heads keep the natural pair distribution
        if (!synthesized) {
          uat_terms.push_back(bce(f.text_out.score, y));
          uaa_terms.push_back(
              focal_loss(f.audio_out.score, y, config.focal_gamma, config.focal_weight));
          uata_terms.push_back(bce(f.fused_score, y));
        }
        if (config.use_uat3) {
          uat3_terms.push_back(three_class_ce(f.text_out.logits3, label_tri_class(p)));
        }
        if (p.match_label == MatchLabel::positive) {
          cl_anchors.push_back(f.pooled_query.embeddings);
          cl_text_keys.push_back(f.text_proj);
          cl_audio_keys.push_back(f.pooled_enroll.embeddings);
          cl_ids.push_back(f.pooled_query.phoneme_ids);
        }
        fwd.push_back(std::move(f));
      }

      Tensor zero = Tensor::scalar(0.0);
      Tensor l_uat = uat_terms.empty() ? zero : mean_of(uat_terms);
      Tensor l_uat3 = uat3_terms.empty() ? zero : mean_of(uat3_terms);
      Tensor l_uaa = uaa_terms.empty() ? zero : mean_of(uaa_terms);
      Tensor l_uata = uata_terms.empty() ? zero : mean_of(uata_terms);
      Tensor l_clat = zero, l_claa = zero;
      if (!cl_anchors.empty()) {
        PhonemeBatch text_batch = collect_phoneme_batch(cl_anchors, cl_text_keys, cl_ids);
        PhonemeBatch audio_batch = collect_phoneme_batch(cl_anchors, cl_audio_keys, cl_ids);
        double scale =
            config.contrastive_mean ? 1.0 / static_cast<double>(text_batch.anchors.rows()) : 1.0;
        if (config.use_clat) l_clat = affine(info_nce(text_batch, ccfg), scale, 0.0);
        if (config.use_claa) l_claa = affine(info_nce(audio_batch, ccfg), scale, 0.0);
      }

      LossBundle bundle = total_loss(l_uat, l_uat3, l_clat, l_uaa, l_claa, l_uata);
      check_finite("l_uat", bundle.l_uat);
      check_finite("l_uat3", bundle.l_uat3);
      check_finite("l_clat", bundle.l_clat);
      check_finite("l_uaa", bundle.l_uaa);
      check_finite("l_claa", bundle.l_claa);
      check_finite("l_uata", bundle.l_uata);
      check_finite("total", bundle.total);

      bundle.total.backward();
      model.params.sgd_step(lr);

      // 4. post-step bookkeeping: error stats and gated bank updates, both
      // over natural pairs only (a synthesized pair reuses its source query)
      for (std::size_t i = start; i < end; ++i) {
        const PairExample& p = pairs[i];
        if (p.tri_label == TriLabel::augmented_hard_negative) continue;
        const PairForward& f = fwd[i - start];
        double fused = f.fused_score.scalar_value();
        double y = label_of(p);
        bool correct = (fused >= 0.5) == (y == 1.0);
        if (p.query_keyword >= 0) {
          auto& [errors, total] = kw_stats[p.query_keyword];
          if (!correct) ++errors;
          ++total;
        }
        if (config.use_bank) {
          double margin = y == 1.0 ? fused - 0.5 : 0.5 - fused;
          const Tensor& pooled = f.pooled_query.embeddings;
          for (int r = 0; r < pooled.rows(); ++r) {
            const double* row = pooled.values().data() + static_cast<std::size_t>(r) * pooled.cols();
            model.bank.update(f.pooled_query.phoneme_ids[static_cast<std::size_t>(r)],
                              {row, static_cast<std::size_t>(pooled.cols())}, margin,
                              config.quality_threshold);
          }
        }
      }

      sum_uat += bundle.l_uat.scalar_value();
      sum_uat3 += bundle.l_uat3.scalar_value();
      sum_clat += bundle.l_clat.scalar_value();
      sum_uaa += bundle.l_uaa.scalar_value();
      sum_claa += bundle.l_claa.scalar_value();
      sum_uata += bundle.l_uata.scalar_value();
      sum_at += bundle.l_at.scalar_value();
      sum_aa += bundle.l_aa.scalar_value();
      sum_total += bundle.total.scalar_value();
      ++n_batches;
    }

    state.keyword_error.clear();
    for (const auto& [kw, stats] : kw_stats) {
      state.keyword_error[kw] =
          static_cast<double>(stats.first) / static_cast<double>(stats.second);
    }

    // 5. validation metrics
    EpochLog entry;
    entry.epoch = epoch + 1;
    double inv = n_batches > 0 ? 1.0 / static_cast<double>(n_batches) : 0.0;
    entry.l_uat = sum_uat * inv;
    entry.l_uat3 = sum_uat3 * inv;
    entry.l_clat = sum_clat * inv;
    entry.l_uaa = sum_uaa * inv;
    entry.l_claa = sum_claa * inv;
    entry.l_uata = sum_uata * inv;
    entry.l_at = sum_at * inv;
    entry.l_aa = sum_aa * inv;
    entry.total = sum_total * inv;

    if (!val_pairs.empty()) {
      Rng vr = root.split("val").split(static_cast<std::uint64_t>(epoch));
      ScoredSet st = score_pairs(model, val_pairs, EnrollMode::text, vr.split("text"));
      ScoredSet sa = score_pairs(model, val_pairs, EnrollMode::audio, vr.split("audio"));
      ScoredSet sb = score_pairs(model, val_pairs, EnrollMode::both, vr.split("both"));
      entry.auc_text = auc(st);
      entry.auc_audio = auc(sa);
      entry.auc_both = auc(sb);
      EerResult et = eer(st), ea = eer(sa), eb = eer(sb);
      entry.eer_text = et.rate;
      entry.eer_audio = ea.rate;
      entry.eer_both = eb.rate;
      model.thr_text = et.threshold;
      model.thr_audio = ea.threshold;
      model.thr_both = eb.threshold;
    }

    if (log) *log << entry.to_line() << "\n";
    logs.push_back(entry);
    ++state.epochs_done;
  }
  return logs;
}

}  // namespace kws
