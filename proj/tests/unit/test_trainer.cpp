#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "kws/checkpoint.hpp"
#include "kws/commands.hpp"
#include "kws/dataset_io.hpp"
#include "kws/errors.hpp"
#include "kws/trainer.hpp"
#include "test_helpers.hpp"

using namespace kws;
using namespace kws::testfix;

namespace {

struct TrainFixture {
  RunConfig cfg;
  Corpus corpus;
  std::vector<PairExample> train, val;

  TrainFixture() {
    cfg = tiny_config();
    corpus = tiny_corpus(cfg, Rng(cfg.seed));
    train = tiny_pairs(cfg, corpus, {16, 8, 8}, Rng(100));
    val = tiny_pairs(cfg, corpus, {8, 4, 4}, Rng(200));
  }
};

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("training is deterministic under a fixed seed") {
  TrainFixture fx;
  Model m1 = tiny_model(fx.cfg);
  Model m2 = tiny_model(fx.cfg);
  TrainState s1, s2;
  std::ostringstream log1, log2;
  auto e1 = train_model(m1, s1, fx.corpus, fx.train, fx.val, fx.cfg, 2, &log1);
  auto e2 = train_model(m2, s2, fx.corpus, fx.train, fx.val, fx.cfg, 2, &log2);
  CHECK(log1.str() == log2.str());
  for (const auto& [name, t] : m1.params.entries) {
    CHECK(m2.params.at(name).values() == t.values());
  }
  CHECK(m1.bank == m2.bank);
  CHECK(e1.size() == 2);
  CHECK(e1.back().epoch == 2);
}

TEST_CASE("loss decreases over a short run") {
  TrainFixture fx;
  Model model = tiny_model(fx.cfg);
  TrainState state;
  auto logs = train_model(model, state, fx.corpus, fx.train, fx.val, fx.cfg, 8, nullptr);
  CHECK(logs.back().total < logs.front().total);
}

TEST_CASE("resumed training walks the same trajectory") {
  TrainFixture fx;

  Model full = tiny_model(fx.cfg);
  TrainState full_state;
  std::ostringstream full_log;
  train_model(full, full_state, fx.corpus, fx.train, fx.val, fx.cfg, 4, &full_log);

  Model part = tiny_model(fx.cfg);
  TrainState part_state;
  std::ostringstream log_a, log_b;
  train_model(part, part_state, fx.corpus, fx.train, fx.val, fx.cfg, 2, &log_a);

  // round-trip through a checkpoint between the two halves
  auto dir = std::filesystem::temp_directory_path() / "kws_trainer_tests";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "half.ckpt").string();
  save_checkpoint(path, part, fx.cfg, fx.corpus.checksum(), part_state);
  LoadedCheckpoint back = load_checkpoint(path);

  train_model(back.model, back.state, fx.corpus, fx.train, fx.val, fx.cfg, 2, &log_b);

  CHECK(log_a.str() + log_b.str() == full_log.str());
  for (const auto& [name, t] : full.params.entries) {
    CHECK(back.model.params.at(name).values() == t.values());
  }
  CHECK(back.model.bank == full.bank);
  CHECK(back.state.keyword_error == full_state.keyword_error);
}

TEST_CASE("ablation toggles zero their loss components") {
  TrainFixture fx;
  RunConfig cfg = fx.cfg;
  cfg.use_claa = false;
  cfg.use_uat3 = false;
  Model model = tiny_model(cfg);
  TrainState state;
  auto logs = train_model(model, state, fx.corpus, fx.train, fx.val, cfg, 1, nullptr);
  CHECK(logs[0].l_claa == 0.0);
  CHECK(logs[0].l_uat3 == 0.0);
  CHECK(logs[0].l_clat > 0.0);
  CHECK(logs[0].l_uat > 0.0);

  RunConfig no_bank = fx.cfg;
  no_bank.use_bank = false;
  Model m2 = tiny_model(no_bank);
  TrainState s2;
  train_model(m2, s2, fx.corpus, fx.train, fx.val, no_bank, 2, nullptr);
  CHECK(m2.bank.eligible_count({}) == 0);  // bank never populated
}

TEST_CASE("the bank fills during training when enabled") {
  TrainFixture fx;
  RunConfig cfg = fx.cfg;
  cfg.quality_threshold = 0.0;  // accept every update so the gate cannot stall
  Model model = tiny_model(cfg);
  TrainState state;
  train_model(model, state, fx.corpus, fx.train, fx.val, cfg, 1, nullptr);
  CHECK(model.bank.eligible_count({}) > 0);
}

TEST_CASE("epoch logs carry every loss component") {
  TrainFixture fx;
  Model model = tiny_model(fx.cfg);
  TrainState state;
  std::ostringstream log;
  train_model(model, state, fx.corpus, fx.train, fx.val, fx.cfg, 1, &log);
  std::string line = log.str();
  for (const char* field :
       {"epoch=", "l_uat=", "l_uat3=", "l_clat=", "l_uaa=", "l_claa=", "l_uata=", "l_at=",
        "l_aa=", "total=", "val_auc_text=", "val_eer_text=", "val_auc_audio=",
        "val_auc_both="}) {
    CHECK_MESSAGE(line.find(field) != std::string::npos, "missing field ", field);
  }
}

}  // TEST_SUITE
