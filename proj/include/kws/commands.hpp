#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kws/config.hpp"
#include "kws/corpus.hpp"
#include "kws/tensor.hpp"
#include "kws/trainer.hpp"

namespace kws {

// Command implementations behind the CLI verbs. The CLI binary is a thin
// argument-parsing wrapper over these, and the acceptance suite drives them
// directly so file artifacts are byte-identical either way.

struct GenSummary {
  int train_pos = 0, train_easy = 0, train_hard = 0;
  int val_pos = 0, val_easy = 0, val_hard = 0;
  int test_pos = 0, test_easy = 0, test_hard = 0;
  int train_keywords = 0, test_keywords = 0;
};

/// Writes corpus.json, train.pairs, val.pairs, test.pairs and config.echo
/// into out_dir. With open_vocab the test split draws from held-out keyword
/// clusters that never appear in train/val.
GenSummary cmd_gen(const RunConfig& config, const std::string& out_dir);

struct TrainSummary {
  std::vector<EpochLog> epochs;
  double final_auc_text = 0, final_auc_audio = 0, final_auc_both = 0;
};

/// Trains (or resumes from resume_path) and writes the checkpoint, a .log
/// file with one line per epoch, and a .config echo next to it.
TrainSummary cmd_train(const RunConfig& config, const std::string& dataset_dir,
                       const std::string& out_checkpoint,
                       const std::optional<std::string>& resume_path = std::nullopt);

/// Scores one split under one enrollment mode and writes the metrics CSV.
MetricsReport cmd_eval(const std::string& checkpoint_path, const std::string& dataset_dir,
                       const std::string& split, EnrollMode mode, const std::string& out_csv);

/// Persists encoded enrollment features (projected text and/or audio) plus
/// the corpus checksum into store_path.
void cmd_enroll(const std::string& checkpoint_path,
                const std::optional<std::vector<int>>& text,
                const std::optional<std::string>& audio_path, const std::string& store_path);

struct QueryResult {
  double score = 0.0;
  double threshold = 0.0;
  bool accept = false;
  EnrollMode mode = EnrollMode::text;
};
QueryResult cmd_query(const std::string& checkpoint_path, const std::string& store_path,
                      const std::string& query_audio_path);

/// Dumps the similarity matrices and attention weights behind one pair's
/// scores as plain-text grids that re-parse bit-exactly.
void cmd_dump_attention(const std::string& checkpoint_path, const std::string& dataset_dir,
                        const std::string& split, int pair_index, const std::string& out_dir);

/// Fast oracle smoke: gradient checks, closed-form losses, metric oracles,
/// edit-distance exhaustive small domain. Returns the number of failures and
/// prints one line per check.
int cmd_selftest(std::ostream& out);

// Plain-text numeric grid helpers for the dump files ("%.17g" cells, so
// doubles survive the round trip exactly).
void write_matrix_file(const std::string& path, const std::string& title, const Tensor& m);
Tensor read_matrix_file(const std::string& path, std::string* title = nullptr);

EnrollMode parse_enroll_mode(const std::string& text);  // "text" | "audio" | "both"

}  // namespace kws
