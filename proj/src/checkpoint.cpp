#include "kws/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "kws/bytes.hpp"
#include "kws/errors.hpp"

namespace kws {

namespace {

constexpr char kMagic[8] = {'K', 'W', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

struct Block {
  std::vector<int> shape;
  std::vector<double> values;
};

void append_block(std::vector<std::uint8_t>& out, const std::string& name, const Block& b) {
  append_le32(out, static_cast<std::uint32_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
  append_le32(out, static_cast<std::uint32_t>(b.shape.size()));
  for (int d : b.shape) append_le32(out, static_cast<std::uint32_t>(d));
  append_le64(out, static_cast<std::uint64_t>(b.values.size()));
  for (double v : b.values) append_le_double(out, v);
}

std::map<std::string, Block> collect_blocks(const Model& model, const TrainState& state) {
  std::map<std::string, Block> blocks;
  for (const auto& [name, t] : model.params.entries) {
    blocks["param." + name] = Block{t.shape(), t.values()};
  }
  auto snap = model.bank.snapshot();
  blocks["bank.entries"] = Block{{snap.k, snap.d}, snap.entries};
  blocks["bank.alpha"] = Block{{1}, {snap.alpha}};
  std::vector<double> init(snap.initialized.begin(), snap.initialized.end());
  blocks["bank.initialized"] = Block{{snap.k}, init};
  std::vector<double> counts(snap.update_counts.begin(), snap.update_counts.end());
  blocks["bank.update_counts"] = Block{{snap.k}, counts};
  blocks["thresholds"] = Block{{3}, {model.thr_text, model.thr_audio, model.thr_both}};
  std::vector<double> err;
  err.reserve(state.keyword_error.size() * 2);
  for (const auto& [kw, rate] : state.keyword_error) {
    err.push_back(static_cast<double>(kw));
    err.push_back(rate);
  }
  blocks["trainer.keyword_error"] =
      Block{{static_cast<int>(state.keyword_error.size()), 2}, err};
  return blocks;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const RunConfig& config,
                     std::uint64_t corpus_checksum, const TrainState& state) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  append_le32(out, kVersion);
  std::string echo = config.normalized();
  append_le32(out, static_cast<std::uint32_t>(echo.size()));
  out.insert(out.end(), echo.begin(), echo.end());
  append_le64(out, corpus_checksum);
  append_le32(out, static_cast<std::uint32_t>(state.epochs_done));
  append_le64(out, config.seed);

  auto blocks = collect_blocks(model, state);
  append_le32(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& [name, block] : blocks) append_block(out, name, block);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write checkpoint " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("write failed for checkpoint " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > data.size()) throw FormatError("checkpoint " + path + ": truncated");
  };

  need(8);
  if (std::memcmp(data.data(), kMagic, 8) != 0) {
    throw FormatError("checkpoint " + path + ": bad magic");
  }
  pos += 8;
  need(4);
  std::uint32_t version = read_le32(&data[pos]);
  pos += 4;
  if (version != kVersion) {
    throw FormatError("checkpoint " + path + ": unsupported version " +
                      std::to_string(version));
  }
  need(4);
  std::uint32_t echo_len = read_le32(&data[pos]);
  pos += 4;
  need(echo_len);
  std::string echo(reinterpret_cast<const char*>(&data[pos]), echo_len);
  pos += echo_len;

  LoadedCheckpoint out;
  out.config = RunConfig::parse(echo);
  out.config.validate();
  need(8 + 4 + 8);
  out.corpus_checksum = read_le64(&data[pos]);
  pos += 8;
  out.state.epochs_done = static_cast<int>(read_le32(&data[pos]));
  pos += 4;
  std::uint64_t seed = read_le64(&data[pos]);
  pos += 8;
  if (seed != out.config.seed) {
    throw FormatError("checkpoint " + path + ": seed does not match config echo");
  }

  need(4);
  std::uint32_t n_blocks = read_le32(&data[pos]);
  pos += 4;
  std::map<std::string, Block> blocks;
  for (std::uint32_t i = 0; i < n_blocks; ++i) {
    need(4);
    std::uint32_t name_len = read_le32(&data[pos]);
    pos += 4;
    need(name_len);
    std::string name(reinterpret_cast<const char*>(&data[pos]), name_len);
    pos += name_len;
    need(4);
    std::uint32_t rank = read_le32(&data[pos]);
    pos += 4;
    Block b;
    std::size_t expect = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      need(4);
      int d = static_cast<int>(read_le32(&data[pos]));
      pos += 4;
      b.shape.push_back(d);
      expect *= static_cast<std::size_t>(d);
    }
    need(8);
    std::uint64_t count = read_le64(&data[pos]);
    pos += 8;
    if (count != expect) {
      throw FormatError("checkpoint " + path + ": block '" + name + "' count/shape mismatch");
    }
    need(count * 8);
    b.values.resize(count);
    for (std::uint64_t k = 0; k < count; ++k) {
      b.values[k] = read_le_double(&data[pos]);
      pos += 8;
    }
    blocks.emplace(std::move(name), std::move(b));
  }
  if (pos != data.size()) throw FormatError("checkpoint " + path + ": trailing bytes");

  auto take = [&](const std::string& name) -> Block& {
    auto it = blocks.find(name);
    if (it == blocks.end()) {
      throw FormatError("checkpoint " + path + ": missing block '" + name + "'");
    }
    return it->second;
  };

  // Rebuild the model, then overwrite every parameter from its block.
  out.model = Model::build(out.config.model_config());
  for (auto& [name, t] : out.model.params.entries) {
    Block& b = take("param." + name);
    if (b.shape != t.shape()) {
      throw FormatError("checkpoint " + path + ": parameter '" + name + "' shape mismatch");
    }
    t.values() = b.values;
  }

  MemoryBank::Snapshot snap;
  Block& entries = take("bank.entries");
  if (entries.shape.size() != 2) throw FormatError("checkpoint: bank.entries must be rank-2");
  snap.k = entries.shape[0];
  snap.d = entries.shape[1];
  snap.entries = entries.values;
  snap.alpha = take("bank.alpha").values.at(0);
  for (double v : take("bank.initialized").values) {
    snap.initialized.push_back(static_cast<std::uint8_t>(v != 0.0));
  }
  for (double v : take("bank.update_counts").values) {
    snap.update_counts.push_back(static_cast<std::uint64_t>(v));
  }
  out.model.bank = MemoryBank::restore(snap);

  Block& thr = take("thresholds");
  out.model.thr_text = thr.values.at(0);
  out.model.thr_audio = thr.values.at(1);
  out.model.thr_both = thr.values.at(2);

  Block& err = take("trainer.keyword_error");
  for (std::size_t i = 0; i + 1 < err.values.size(); i += 2) {
    out.state.keyword_error[static_cast<int>(err.values[i])] = err.values[i + 1];
  }
  return out;
}

}  // namespace kws
