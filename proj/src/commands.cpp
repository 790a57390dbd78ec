#include "kws/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "kws/bytes.hpp"
#include "kws/checkpoint.hpp"
#include "kws/contrastive.hpp"
#include "kws/dataset_io.hpp"
#include "kws/errors.hpp"
#include "kws/grad_check.hpp"
#include "kws/memory_bank.hpp"
#include "kws/ops.hpp"
#include "kws/verifier.hpp"

namespace fs = std::filesystem;

namespace kws {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Connected components of the keyword graph with edges at edit distance
// <= threshold. Two keywords in different components are always an easy
// pair; a component of size >= 2 always contains a hard pair.
std::vector<std::vector<int>> lev_components(const std::vector<std::vector<int>>& vocab,
                                             int threshold) {
  const int n = static_cast<int>(vocab.size());
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < n; ++i) {
    if (comp[static_cast<std::size_t>(i)] >= 0) continue;
    std::vector<int> members, queue = {i};
    comp[static_cast<std::size_t>(i)] = static_cast<int>(out.size());
    while (!queue.empty()) {
      int cur = queue.back();
      queue.pop_back();
      members.push_back(cur);
      for (int j = 0; j < n; ++j) {
        if (comp[static_cast<std::size_t>(j)] >= 0) continue;
        if (levenshtein(vocab[static_cast<std::size_t>(cur)],
                        vocab[static_cast<std::size_t>(j)]) <= threshold) {
          comp[static_cast<std::size_t>(j)] = static_cast<int>(out.size());
          queue.push_back(j);
        }
      }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

// Allocates whole confusable clusters to the held-out side so both sides
// keep at least one hard pair (a multi-keyword cluster) and one easy pair
// (two clusters).
void split_vocab_open(const std::vector<std::vector<int>>& vocab, int threshold,
                      double test_fraction, Rng rng, std::vector<int>& train_kw,
                      std::vector<int>& test_kw) {
  auto comps = lev_components(vocab, threshold);
  if (comps.size() < 4) {
    throw GenerationError("open-vocab split: need at least 4 confusable clusters, have " +
                          std::to_string(comps.size()));
  }
  std::vector<std::size_t> order(comps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  auto target = static_cast<std::size_t>(
      std::lround(test_fraction * static_cast<double>(vocab.size())));
  target = std::max<std::size_t>(target, 3);

  std::vector<char> to_test(comps.size(), 0);
  std::size_t assigned = 0;
  bool test_has_multi = false;
  // first pass: fill the test side up to the target
  for (std::size_t idx : order) {
    if (assigned >= target) break;
    std::size_t remaining_after = 0;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (!to_test[c] && c != idx) remaining_after += comps[c].size();
    }
    if (remaining_after < 4) continue;  // keep enough words on the train side
    to_test[idx] = 1;
    assigned += comps[idx].size();
    if (comps[idx].size() >= 2) test_has_multi = true;
  }
  if (!test_has_multi) {
    // swap in the smallest multi-keyword cluster still on the train side
    std::size_t best = comps.size();
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (!to_test[c] && comps[c].size() >= 2 &&
          (best == comps.size() || comps[c].size() < comps[best].size())) {
        best = c;
      }
    }
    if (best == comps.size()) {
      throw GenerationError("open-vocab split: no held-out confusable cluster available");
    }
    to_test[best] = 1;
  }

  bool train_has_multi = false;
  std::size_t train_comps = 0, test_comps = 0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (to_test[c]) {
      ++test_comps;
      for (int kw : comps[c]) test_kw.push_back(kw);
    } else {
      ++train_comps;
      if (comps[c].size() >= 2) train_has_multi = true;
      for (int kw : comps[c]) train_kw.push_back(kw);
    }
  }
  std::sort(train_kw.begin(), train_kw.end());
  std::sort(test_kw.begin(), test_kw.end());
  if (!train_has_multi || train_comps < 2 || test_comps < 2 || train_kw.size() < 2 ||
      test_kw.size() < 2) {
    throw GenerationError("open-vocab split: could not allocate clusters to both sides");
  }
}

std::vector<PairExample> build_split(const Corpus& corpus, const std::vector<int>& kw_idx,
                                     const PairCounts& counts, const RunConfig& config,
                                     Rng rng) {
  std::vector<std::vector<int>> sub;
  sub.reserve(kw_idx.size());
  for (int kw : kw_idx) sub.push_back(corpus.vocab[static_cast<std::size_t>(kw)]);
  auto pairs = build_pairs(sub, corpus.inventory, counts, config.hard_threshold,
                           config.synthesis_config(), rng);
  for (auto& p : pairs) {  // remap sub-vocabulary indices to corpus indices
    if (p.query_keyword >= 0) p.query_keyword = kw_idx[static_cast<std::size_t>(p.query_keyword)];
    if (p.enroll_keyword >= 0) p.enroll_keyword = kw_idx[static_cast<std::size_t>(p.enroll_keyword)];
  }
  return pairs;
}

struct SplitCounts {
  PairCounts train, val, test;
};

SplitCounts plan_counts(const RunConfig& c) {
  auto split3 = [&](int total) {
    int a = static_cast<int>(std::lround(total * c.split_train));
    int b = static_cast<int>(std::lround(total * c.split_val));
    int t = total - a - b;
    return std::array<int, 3>{a, b, t};
  };
  int total_pos = static_cast<int>(std::lround(c.n_pairs * c.frac_positive));
  int total_easy = static_cast<int>(std::lround(c.n_pairs * c.frac_easy));
  int total_hard = c.n_pairs - total_pos - total_easy;
  auto pos = split3(total_pos);
  auto easy = split3(total_easy);
  auto hard = split3(total_hard);
  SplitCounts out;
  out.train = {pos[0], easy[0], hard[0]};
  out.val = {pos[1], easy[1], hard[1]};
  out.test = {pos[2], easy[2], hard[2]};
  return out;
}

void count_classes(const std::vector<PairExample>& pairs, int& pos, int& easy, int& hard) {
  pos = easy = hard = 0;
  for (const auto& p : pairs) {
    if (p.match_label == MatchLabel::positive) {
      ++pos;
    } else if (p.difficulty == Difficulty::hard) {
      ++hard;
    } else {
      ++easy;
    }
  }
}

}  // namespace

EnrollMode parse_enroll_mode(const std::string& text) {
  if (text == "text") return EnrollMode::text;
  if (text == "audio") return EnrollMode::audio;
  if (text == "both") return EnrollMode::both;
  throw UsageError("unknown enrollment mode '" + text + "' (expected text|audio|both)");
}

GenSummary cmd_gen(const RunConfig& config, const std::string& out_dir) {
  config.validate();
  fs::create_directories(out_dir);
  Rng gen = Rng(config.seed).split("gen");

  Corpus corpus;
  corpus.inventory = generate_inventory(config.corpus_k, config.corpus_d_in,
                                        config.corpus_separation, gen.split("inventory"));
  corpus.vocab = generate_vocab(config.vocab_size, config.corpus_k, config.kw_len_min,
                                config.kw_len_max, gen.split("vocab"));

  std::vector<int> train_kw, test_kw;
  if (config.open_vocab) {
    split_vocab_open(corpus.vocab, config.hard_threshold, config.test_kw_fraction,
                     gen.split("kw-split"), train_kw, test_kw);
  } else {
    for (int i = 0; i < static_cast<int>(corpus.vocab.size()); ++i) {
      train_kw.push_back(i);
      test_kw.push_back(i);
    }
  }

  SplitCounts counts = plan_counts(config);
  auto train_pairs = build_split(corpus, train_kw, counts.train, config, gen.split("train"));
  auto val_pairs = build_split(corpus, train_kw, counts.val, config, gen.split("val"));
  auto test_pairs = build_split(corpus, test_kw, counts.test, config, gen.split("test"));

  std::uint64_t checksum = corpus.checksum();
  save_corpus(corpus, out_dir + "/corpus.json");
  save_pairs(train_pairs, checksum, corpus.inventory.k(), corpus.inventory.d_in,
             out_dir + "/train.pairs");
  save_pairs(val_pairs, checksum, corpus.inventory.k(), corpus.inventory.d_in,
             out_dir + "/val.pairs");
  save_pairs(test_pairs, checksum, corpus.inventory.k(), corpus.inventory.d_in,
             out_dir + "/test.pairs");
  write_text_file(out_dir + "/config.echo", config.normalized());

  GenSummary s;
  count_classes(train_pairs, s.train_pos, s.train_easy, s.train_hard);
  count_classes(val_pairs, s.val_pos, s.val_easy, s.val_hard);
  count_classes(test_pairs, s.test_pos, s.test_easy, s.test_hard);
  s.train_keywords = static_cast<int>(train_kw.size());
  s.test_keywords = static_cast<int>(test_kw.size());
  return s;
}

TrainSummary cmd_train(const RunConfig& config, const std::string& dataset_dir,
                       const std::string& out_checkpoint,
                       const std::optional<std::string>& resume_path) {
  config.validate();
  Corpus corpus = load_corpus(dataset_dir + "/corpus.json");
  LoadedPairs train_loaded = load_pairs(dataset_dir + "/train.pairs");
  LoadedPairs val_loaded = load_pairs(dataset_dir + "/val.pairs");
  std::uint64_t checksum = corpus.checksum();
  if (train_loaded.inventory_checksum != checksum ||
      val_loaded.inventory_checksum != checksum) {
    throw CompatibilityError("dataset split checksums do not match corpus.json");
  }

  Model model;
  TrainState state;
  if (resume_path) {
    LoadedCheckpoint ck = load_checkpoint(*resume_path);
    // the epoch budget may grow across a resume; everything else must match
    RunConfig ck_cfg = ck.config;
    RunConfig want = config;
    ck_cfg.epochs = want.epochs = 0;
    if (ck_cfg.normalized() != want.normalized()) {
      throw CompatibilityError("resume: checkpoint config differs from the requested config");
    }
    if (ck.corpus_checksum != checksum) {
      throw CompatibilityError("resume: checkpoint was trained on a different corpus");
    }
    model = std::move(ck.model);
    state = ck.state;
  } else {
    model = Model::build(config.model_config());
  }

  int remaining = config.epochs - state.epochs_done;
  if (remaining < 0) {
    throw UsageError("checkpoint has " + std::to_string(state.epochs_done) +
                     " epochs, more than train.epochs=" + std::to_string(config.epochs));
  }

  std::ostringstream log;
  TrainSummary summary;
  summary.epochs = train_model(model, state, corpus, train_loaded.pairs, val_loaded.pairs,
                               config, remaining, &log);

  if (auto parent = fs::path(out_checkpoint).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  write_text_file(out_checkpoint + ".log", log.str());
  write_text_file(out_checkpoint + ".config", config.normalized());
  save_checkpoint(out_checkpoint, model, config, checksum, state);

  if (!summary.epochs.empty()) {
    const EpochLog& last = summary.epochs.back();
    summary.final_auc_text = last.auc_text;
    summary.final_auc_audio = last.auc_audio;
    summary.final_auc_both = last.auc_both;
  }
  return summary;
}

MetricsReport cmd_eval(const std::string& checkpoint_path, const std::string& dataset_dir,
                       const std::string& split, EnrollMode mode, const std::string& out_csv) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
  Corpus corpus = load_corpus(dataset_dir + "/corpus.json");
  if (ck.corpus_checksum != corpus.checksum()) {
    throw CompatibilityError("checkpoint and dataset corpus checksums do not match");
  }
  LoadedPairs loaded = load_pairs(dataset_dir + "/" + split + ".pairs");
  if (loaded.inventory_checksum != ck.corpus_checksum) {
    throw CompatibilityError("dataset split checksum does not match the checkpoint");
  }

  Rng rng = Rng(ck.config.seed).split("eval").split(split);
  ScoredSet scored = score_pairs(ck.model, loaded.pairs, mode, rng);
  MetricsReport rep = report(scored);
  if (auto parent = fs::path(out_csv).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  write_text_file(out_csv, rep.to_csv());
  return rep;
}

namespace {

constexpr int kStoreVersion = 1;

nlohmann::json proj_to_json(const Tensor& t) {
  return nlohmann::json{{"rows", t.rows()},
                        {"cols", t.cols()},
                        {"values", base64_encode(doubles_to_le_bytes(t.values()))}};
}

Tensor proj_from_json(const nlohmann::json& j) {
  int rows = j.at("rows").get<int>();
  int cols = j.at("cols").get<int>();
  auto values = le_bytes_to_doubles(base64_decode(j.at("values").get<std::string>()));
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    throw FormatError("enrollment store: feature matrix size mismatch");
  }
  return Tensor::from_values({rows, cols}, std::move(values), false);
}

}  // namespace

void cmd_enroll(const std::string& checkpoint_path,
                const std::optional<std::vector<int>>& text,
                const std::optional<std::string>& audio_path, const std::string& store_path) {
  if (!text && !audio_path) {
    throw UsageError("enroll: at least one of text or audio is required");
  }
  LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
  NoGradGuard ng;

  nlohmann::json store{{"version", kStoreVersion},
                       {"corpus", hex64(ck.corpus_checksum)},
                       {"text", nullptr},
                       {"text_proj", nullptr},
                       {"audio_proj", nullptr}};
  if (text) {
    EncodedSequence enc = encode_text(ck.model.text_enc, *text);
    Tensor proj = project(ck.model.text_proj, enc, ck.config.ln_eps).embeddings;
    store["text"] = *text;
    store["text_proj"] = proj_to_json(proj);
  }
  if (audio_path) {
    Utterance u = load_utterance(*audio_path);
    EncodedSequence enc =
        encode_audio(ck.model.audio_enc, utterance_frames(u), Origin::enroll_audio);
    Tensor proj = project(ck.model.audio_proj, enc, ck.config.ln_eps).embeddings;
    store["audio_proj"] = proj_to_json(proj);
  }
  write_text_file(store_path, store.dump(2) + "\n");
}

QueryResult cmd_query(const std::string& checkpoint_path, const std::string& store_path,
                      const std::string& query_audio_path) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
  nlohmann::json store;
  try {
    store = nlohmann::json::parse(read_text_file(store_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("enrollment store " + store_path + ": " + e.what());
  }
  if (store.value("version", 0) != kStoreVersion) {
    throw FormatError("enrollment store " + store_path + ": unsupported version");
  }
  if (store.at("corpus").get<std::string>() != hex64(ck.corpus_checksum)) {
    throw CompatibilityError("enrollment store was built for a different corpus/checkpoint");
  }
  bool has_text = !store.at("text_proj").is_null();
  bool has_audio = !store.at("audio_proj").is_null();
  if (!has_text && !has_audio) {
    throw UsageError("enrollment store is empty: no enrolled modality");
  }

  Utterance query = load_utterance(query_audio_path);
  NoGradGuard ng;
  const Model& model = ck.model;
  EncodedSequence q_enc = encode_audio(model.audio_enc, utterance_frames(query),
                                       Origin::query_audio);
  Tensor q_proj = project(model.audio_proj, q_enc, ck.config.ln_eps).embeddings;

  Tensor text_feature, audio_feature, text_score, audio_score;
  if (has_text) {
    Tensor stored = proj_from_json(store.at("text_proj"));
    Tensor m_at = similarity_matrix(stored, q_proj, model.cfg.cos_eps);
    int inject = std::min(model.cfg.inject_count, model.bank.eligible_count({}));
    if (inject > 0) {
      m_at = concat_rows({memory_reference_rows(model.bank, inject, q_proj,
                                                model.cfg.cos_eps,
                                                Rng(ck.config.seed).split("query-inject")),
                          m_at});
    }
    HeadOutput out = run_text_head(model, m_at);
    text_feature = out.feature;
    text_score = out.score;
  }
  if (has_audio) {
    Tensor stored = proj_from_json(store.at("audio_proj"));
    Tensor m_aa = similarity_matrix(stored, q_proj, model.cfg.cos_eps);
    HeadOutput out = run_audio_head(model, m_aa);
    audio_feature = out.feature;
    audio_score = out.score;
  }

  QueryResult r;
  if (has_text && has_audio) {
    r.mode = EnrollMode::both;
    r.score = fuse_score(model, text_feature, audio_feature).scalar_value();
    r.threshold = model.thr_both;
  } else if (has_text) {
    r.mode = EnrollMode::text;
    r.score = text_score.scalar_value();
    r.threshold = model.thr_text;
  } else {
    r.mode = EnrollMode::audio;
    r.score = audio_score.scalar_value();
    r.threshold = model.thr_audio;
  }
  r.accept = r.score >= r.threshold;
  return r;
}

void write_matrix_file(const std::string& path, const std::string& title, const Tensor& m) {
  std::ostringstream out;
  out << "# " << title << "\n" << m.rows() << " " << m.cols() << "\n";
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << " ";
      out << fmt(m.at(r, c));
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

Tensor read_matrix_file(const std::string& path, std::string* title) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line.size() < 2 || line[0] != '#') {
    throw FormatError("matrix file " + path + ": missing title line");
  }
  if (title) *title = line.substr(2);
  int rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1) {
    throw FormatError("matrix file " + path + ": bad dimensions");
  }
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (auto& v : values) {
    if (!(in >> v)) throw FormatError("matrix file " + path + ": truncated data");
  }
  return Tensor::from_values({rows, cols}, std::move(values), false);
}

void cmd_dump_attention(const std::string& checkpoint_path, const std::string& dataset_dir,
                        const std::string& split, int pair_index, const std::string& out_dir) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
  LoadedPairs loaded = load_pairs(dataset_dir + "/" + split + ".pairs");
  if (loaded.inventory_checksum != ck.corpus_checksum) {
    throw CompatibilityError("dataset split checksum does not match the checkpoint");
  }
  if (pair_index < 0 || pair_index >= static_cast<int>(loaded.pairs.size())) {
    throw UsageError("pair index " + std::to_string(pair_index) + " out of range, split has " +
                     std::to_string(loaded.pairs.size()) + " pairs");
  }
  const PairExample& pair = loaded.pairs[static_cast<std::size_t>(pair_index)];
  Rng rng = Rng(ck.config.seed).split("dump").split(static_cast<std::uint64_t>(pair_index));
  AttentionDump dump = dump_pair_matrices(ck.model, pair, true, rng);

  fs::create_directories(out_dir);
  std::string tag = split + "[" + std::to_string(pair_index) + "] " +
                    (pair.match_label == MatchLabel::positive ? "positive" : "negative");
  write_matrix_file(out_dir + "/m_at.txt", tag + " text-head similarity", dump.m_at);
  write_matrix_file(out_dir + "/m_aa.txt", tag + " audio-head similarity", dump.m_aa);
  write_matrix_file(out_dir + "/att_text.txt", tag + " text-head attention", dump.att_text);
  write_matrix_file(out_dir + "/att_audio.txt", tag + " audio-head attention", dump.att_audio);
}

// ---------------------------------------------------------------- selftest

namespace {

int lev_naive(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) return static_cast<int>(b.size());
  if (b.empty()) return static_cast<int>(a.size());
  int same = a.back() == b.back() ? 0 : 1;
  int del = lev_naive(a.subspan(0, a.size() - 1), b) + 1;
  int ins = lev_naive(a, b.subspan(0, b.size() - 1)) + 1;
  int sub = lev_naive(a.subspan(0, a.size() - 1), b.subspan(0, b.size() - 1)) + same;
  return std::min({del, ins, sub});
}

bool check_line(std::ostream& out, const std::string& name, bool ok) {
  out << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
  return ok;
}

}  // namespace

int cmd_selftest(std::ostream& out) {
  int failures = 0;
  auto run = [&](const std::string& name, bool ok) {
    if (!check_line(out, name, ok)) ++failures;
  };

  {  // gradient checks on a few representative ops
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 5 && ok; ++seed) {
      Rng rng(seed);
      std::vector<double> av(6), bv(6);
      for (auto& x : av) x = rng.uniform(-2.0, 2.0);
      for (auto& x : bv) x = rng.uniform(-2.0, 2.0);
      Tensor a = Tensor::from_values({2, 3}, av, true);
      Tensor b = Tensor::from_values({2, 3}, bv, true);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(softmax_rows(in[0], 0.5), tanh(in[1])));
      };
      ok = grad_check("softmax/tanh", f, {a, b}, 1e-5, 1e-4).passed;
    }
    run("gradient check: softmax/tanh composite", ok);
  }
  {  // closed-form contrastive values
    PhonemeBatch single;
    single.anchors = Tensor::from_values({1, 2}, {0.3, 0.7});
    single.keys = single.anchors;
    single.phoneme_ids = {0};
    single.pair_index = {0};
    double l1 = info_nce(single, {1.0, 1e-8}).scalar_value();

    PhonemeBatch orth;
    orth.anchors = Tensor::from_values({2, 2}, {1, 0, 0, 1});
    orth.keys = orth.anchors;
    orth.phoneme_ids = {0, 1};
    orth.pair_index = {0, 1};
    double l2 = info_nce(orth, {1.0, 1e-8}).scalar_value();
    double expect = 2.0 * std::log(1.0 + std::exp(-1.0));
    run("contrastive loss closed forms", l1 == 0.0 && std::abs(l2 - expect) < 1e-5);
  }
  {  // focal reduces to bce at gamma 0; uniform 3-class ce is log 3
    Tensor s = Tensor::scalar(0.73);
    double f0 = focal_loss(s, 1.0, 0.0, 1.0).scalar_value();
    double b = bce(s, 1.0).scalar_value();
    Tensor logits = Tensor::from_values({3}, {0.4, 0.4, 0.4});
    double ce = three_class_ce(logits, 1).scalar_value();
    run("utterance loss closed forms",
        std::abs(f0 - b) < 1e-9 && std::abs(ce - std::log(3.0)) < 1e-9);
  }
  {  // memory bank geometric recursion
    MemoryBank bank(4, 3, 0.8);
    std::vector<double> start = {1.0, 1.0, 1.0}, target = {0.0, 2.0, -1.0};
    bank.update(2, start, 1.0, 0.0);
    double d0 = 0.0;
    for (int i = 0; i < 3; ++i) d0 += (start[i] - target[i]) * (start[i] - target[i]);
    d0 = std::sqrt(d0);
    bool ok = true;
    for (int n = 1; n <= 8; ++n) {
      bank.update(2, target, 1.0, 0.0);
      double d = 0.0;
      auto row = bank.entry(2);
      for (int i = 0; i < 3; ++i) d += (row[i] - target[i]) * (row[i] - target[i]);
      d = std::sqrt(d);
      ok = ok && std::abs(d - std::pow(0.8, n) * d0) < 1e-9;
    }
    run("memory bank momentum recursion", ok);
  }
  {  // auc against the quadratic pairwise oracle
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 10 && ok; ++seed) {
      Rng rng(seed);
      ScoredSet s;
      for (int i = 0; i < 40; ++i) {
        s.scores.push_back(rng.uniform());
        s.labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
        s.difficulty.push_back(std::nullopt);
      }
      if (std::count(s.labels.begin(), s.labels.end(), 1) == 0) s.labels[0] = 1;
      if (std::count(s.labels.begin(), s.labels.end(), 0) == 0) s.labels[1] = 0;
      double wins = 0, total = 0;
      for (std::size_t i = 0; i < s.scores.size(); ++i) {
        for (std::size_t j = 0; j < s.scores.size(); ++j) {
          if (s.labels[i] == 1 && s.labels[j] == 0) {
            total += 1.0;
            if (s.scores[i] > s.scores[j]) wins += 1.0;
            if (s.scores[i] == s.scores[j]) wins += 0.5;
          }
        }
      }
      ok = std::abs(auc(s) - wins / total) < 1e-12;
    }
    run("auc against pairwise oracle", ok);
  }
  {  // edit distance against naive recursion, exhaustive small domain
    bool ok = true;
    std::vector<std::vector<int>> all;
    for (int len = 0; len <= 3; ++len) {
      int count = 1;
      for (int i = 0; i < len; ++i) count *= 3;
      for (int code = 0; code < count; ++code) {
        std::vector<int> seq(static_cast<std::size_t>(len));
        int c = code;
        for (int i = 0; i < len; ++i) {
          seq[static_cast<std::size_t>(i)] = c % 3;
          c /= 3;
        }
        all.push_back(std::move(seq));
      }
    }
    for (const auto& a : all) {
      for (const auto& b : all) {
        if (levenshtein(a, b) != lev_naive(a, b)) ok = false;
      }
    }
    std::vector<int> kitten = {0, 1, 2, 2, 3, 4};   // k i t t e n
    std::vector<int> sitting = {5, 1, 2, 2, 1, 4, 6};  // s i t t i n g
    ok = ok && levenshtein(kitten, sitting) == 3;
    run("edit distance against naive recursion", ok);
  }
  out << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures;
}

}  // namespace kws
