// Command-line front end: keyword-spotting corpus generation, training,
// evaluation, enrollment, querying and attention dumps.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kws/commands.hpp"
#include "kws/config.hpp"
#include "kws/dataset_io.hpp"
#include "kws/errors.hpp"

namespace {

// exit codes: 0 success, 2 usage/config, 3 data/format, 4 numerical abort
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

kws::RunConfig load_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
  kws::RunConfig cfg;
  if (!config_path.empty()) {
    cfg = kws::RunConfig::parse(kws::read_text_file(config_path));
  }
  for (const auto& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw kws::UsageError("--set expects key=value, got '" + kv + "'");
    }
    std::string key = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    cfg.apply_override(key, value);
  }
  cfg.validate();
  return cfg;
}

std::vector<int> parse_id_list(const std::string& text) {
  std::vector<int> ids;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      ids.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) ids.push_back(std::stoi(cur));
  if (ids.empty()) throw kws::UsageError("--text expects a comma-separated phoneme id list");
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"user-defined keyword spotting trainer and verifier"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--set", overrides, "override one config key, e.g. --set train.epochs=5");

  auto* gen = app.add_subcommand("gen", "generate corpus and dataset splits");
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model on a generated dataset");
  std::string train_data, train_out, train_resume;
  train->add_option("--dataset", train_data, "dataset directory from gen")->required();
  train->add_option("--out", train_out, "output checkpoint path")->required();
  train->add_option("--resume", train_resume, "checkpoint to continue from");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  std::string eval_ckpt, eval_data, eval_split = "test", eval_mode = "both", eval_out;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
  eval->add_option("--dataset", eval_data, "dataset directory")->required();
  eval->add_option("--split", eval_split, "train|val|test (default test)");
  eval->add_option("--mode", eval_mode, "enrollment mode: text|audio|both");
  eval->add_option("--out", eval_out, "output CSV path")->required();

  auto* enroll = app.add_subcommand("enroll", "enroll a keyword by text and/or audio");
  std::string enroll_ckpt, enroll_text, enroll_audio, enroll_store;
  enroll->add_option("--checkpoint", enroll_ckpt, "checkpoint path")->required();
  enroll->add_option("--text", enroll_text, "comma-separated phoneme ids");
  enroll->add_option("--audio", enroll_audio, "utterance file");
  enroll->add_option("--store", enroll_store, "enrollment store output path")->required();

  auto* query = app.add_subcommand("query", "score a query utterance against an enrollment");
  std::string query_ckpt, query_store, query_audio;
  query->add_option("--checkpoint", query_ckpt, "checkpoint path")->required();
  query->add_option("--store", query_store, "enrollment store path")->required();
  query->add_option("--audio", query_audio, "query utterance file")->required();

  auto* dump = app.add_subcommand("dump-attn", "dump similarity/attention matrices for a pair");
  std::string dump_ckpt, dump_data, dump_split = "test", dump_out;
  int dump_index = 0;
  dump->add_option("--checkpoint", dump_ckpt, "checkpoint path")->required();
  dump->add_option("--dataset", dump_data, "dataset directory")->required();
  dump->add_option("--split", dump_split, "train|val|test (default test)");
  dump->add_option("--pair", dump_index, "pair index within the split")->required();
  dump->add_option("--out", dump_out, "output directory")->required();

  auto* selftest = app.add_subcommand("selftest", "run the built-in oracle checks");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      kws::RunConfig cfg = load_config(config_path, overrides);
      kws::GenSummary s = kws::cmd_gen(cfg, gen_out);
      std::cout << "train: " << s.train_pos << " positive, " << s.train_easy << " easy, "
                << s.train_hard << " hard (" << s.train_keywords << " keywords)\n"
                << "val:   " << s.val_pos << " positive, " << s.val_easy << " easy, "
                << s.val_hard << " hard\n"
                << "test:  " << s.test_pos << " positive, " << s.test_easy << " easy, "
                << s.test_hard << " hard (" << s.test_keywords << " keywords)\n";
    } else if (*train) {
      kws::RunConfig cfg = load_config(config_path, overrides);
      std::optional<std::string> resume;
      if (!train_resume.empty()) resume = train_resume;
      kws::TrainSummary s = kws::cmd_train(cfg, train_data, train_out, resume);
      for (const auto& e : s.epochs) std::cout << e.to_line() << "\n";
      std::cout << "checkpoint written to " << train_out << "\n";
    } else if (*eval) {
      kws::MetricsReport rep = kws::cmd_eval(eval_ckpt, eval_data, eval_split,
                                             kws::parse_enroll_mode(eval_mode), eval_out);
      std::cout << rep.to_csv();
    } else if (*enroll) {
      std::optional<std::vector<int>> text;
      if (!enroll_text.empty()) text = parse_id_list(enroll_text);
      std::optional<std::string> audio;
      if (!enroll_audio.empty()) audio = enroll_audio;
      kws::cmd_enroll(enroll_ckpt, text, audio, enroll_store);
      std::cout << "enrollment stored (" << (text ? "text" : "")
                << (text && audio ? "+" : "") << (audio ? "audio" : "") << ")\n";
    } else if (*query) {
      kws::QueryResult r = kws::cmd_query(query_ckpt, query_store, query_audio);
      const char* mode = r.mode == kws::EnrollMode::both
                             ? "both(fusion)"
                             : (r.mode == kws::EnrollMode::text ? "text" : "audio");
      std::cout << "mode=" << mode << " score=" << r.score << " threshold=" << r.threshold
                << " decision=" << (r.accept ? "accept" : "reject") << "\n";
      return 0;
    } else if (*dump) {
      kws::cmd_dump_attention(dump_ckpt, dump_data, dump_split, dump_index, dump_out);
      std::cout << "matrices written to " << dump_out << "\n";
    } else if (*selftest) {
      int failures = kws::cmd_selftest(std::cout);
      return failures == 0 ? 0 : 1;
    }
    return 0;
  } catch (const kws::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kws::ParamError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kws::NumericError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const kws::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
