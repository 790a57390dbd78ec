#include "kws/dataset_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "kws/bytes.hpp"
#include "kws/errors.hpp"

namespace kws {

using nlohmann::json;

namespace {

constexpr int kPairFormatVersion = 1;
constexpr int kCorpusFormatVersion = 1;

json utterance_to_json(const Utterance& u) {
  json spans = json::array();
  for (const auto& s : u.spans) spans.push_back(json::array({s.begin, s.end}));
  return json{{"phonemes", u.phonemes},
              {"rows", u.frame_count},
              {"cols", u.frame_dim},
              {"frames", base64_encode(doubles_to_le_bytes(u.frames))},
              {"spans", spans}};
}

Utterance utterance_from_json(const json& j) {
  Utterance u;
  u.phonemes = j.at("phonemes").get<std::vector<int>>();
  u.frame_count = j.at("rows").get<int>();
  u.frame_dim = j.at("cols").get<int>();
  u.frames = le_bytes_to_doubles(base64_decode(j.at("frames").get<std::string>()));
  for (const auto& s : j.at("spans")) {
    u.spans.push_back(Span{s.at(0).get<int>(), s.at(1).get<int>()});
  }
  u.validate();
  return u;
}

json pair_to_json(const PairExample& p) {
  json j{{"kind", "pair"},
         {"query", utterance_to_json(p.query)},
         {"match", p.match_label == MatchLabel::positive ? 1 : 0},
         {"tri", static_cast<int>(p.tri_label)},
         {"query_kw", p.query_keyword},
         {"enroll_kw", p.enroll_keyword}};
  j["enroll_text"] = p.enroll_text ? json(*p.enroll_text) : json(nullptr);
  j["enroll_audio"] = p.enroll_audio ? utterance_to_json(*p.enroll_audio) : json(nullptr);
  if (p.difficulty) {
    j["difficulty"] = *p.difficulty == Difficulty::hard ? "hard" : "easy";
  } else {
    j["difficulty"] = nullptr;
  }
  return j;
}

PairExample pair_from_json(const json& j) {
  PairExample p;
  p.query = utterance_from_json(j.at("query"));
  if (!j.at("enroll_text").is_null()) p.enroll_text = j.at("enroll_text").get<std::vector<int>>();
  if (!j.at("enroll_audio").is_null()) p.enroll_audio = utterance_from_json(j.at("enroll_audio"));
  p.match_label = j.at("match").get<int>() == 1 ? MatchLabel::positive : MatchLabel::negative;
  int tri = j.at("tri").get<int>();
  if (tri < 0 || tri > 2) throw FormatError("pair record: tri label out of range");
  p.tri_label = static_cast<TriLabel>(tri);
  if (!j.at("difficulty").is_null()) {
    std::string d = j.at("difficulty").get<std::string>();
    if (d == "hard") {
      p.difficulty = Difficulty::hard;
    } else if (d == "easy") {
      p.difficulty = Difficulty::easy;
    } else {
      throw FormatError("pair record: unknown difficulty '" + d + "'");
    }
  }
  p.query_keyword = j.at("query_kw").get<int>();
  p.enroll_keyword = j.at("enroll_kw").get<int>();
  p.validate();
  return p;
}

}  // namespace

std::uint64_t Corpus::checksum() const {
  std::uint64_t h = inventory.checksum();
  for (const auto& w : vocab) {
    h = fnv1a64(w.data(), w.size() * sizeof(int), h);
  }
  return h;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  json j{{"version", kCorpusFormatVersion},
         {"K", corpus.inventory.k()},
         {"d_in", corpus.inventory.d_in},
         {"labels", corpus.inventory.labels},
         {"prototypes", base64_encode(doubles_to_le_bytes(corpus.inventory.prototypes))},
         {"vocab", corpus.vocab},
         {"checksum", hex64(corpus.checksum())}};
  write_text_file(path, j.dump(2) + "\n");
}

Corpus load_corpus(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError("corpus file " + path + ": " + e.what());
  }
  try {
    if (j.at("version").get<int>() != kCorpusFormatVersion) {
      throw FormatError("corpus file " + path + ": unsupported version");
    }
    Corpus c;
    c.inventory.d_in = j.at("d_in").get<int>();
    c.inventory.labels = j.at("labels").get<std::vector<std::string>>();
    c.inventory.prototypes =
        le_bytes_to_doubles(base64_decode(j.at("prototypes").get<std::string>()));
    c.vocab = j.at("vocab").get<std::vector<std::vector<int>>>();
    if (c.inventory.prototypes.size() !=
        static_cast<std::size_t>(c.inventory.k()) * c.inventory.d_in) {
      throw FormatError("corpus file " + path + ": prototype matrix size mismatch");
    }
    if (static_cast<int>(c.inventory.labels.size()) != j.at("K").get<int>()) {
      throw FormatError("corpus file " + path + ": K does not match labels");
    }
    if (hex64(c.checksum()) != j.at("checksum").get<std::string>()) {
      throw FormatError("corpus file " + path + ": checksum mismatch");
    }
    return c;
  } catch (const json::exception& e) {
    throw FormatError("corpus file " + path + ": " + e.what());
  }
}

void save_pairs(const std::vector<PairExample>& pairs, std::uint64_t inventory_checksum,
                int k, int d_in, const std::string& path) {
  std::ostringstream out;
  json header{{"kind", "header"},
              {"version", kPairFormatVersion},
              {"K", k},
              {"d_in", d_in},
              {"inventory", hex64(inventory_checksum)},
              {"count", pairs.size()}};
  out << header.dump() << "\n";
  for (const auto& p : pairs) out << pair_to_json(p).dump() << "\n";
  write_text_file(path, out.str());
}

LoadedPairs load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset file " + path);
  std::string line;
  std::size_t line_no = 0;

  auto parse_line = [&](const std::string& text) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw FormatError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  };

  if (!std::getline(in, line)) throw FormatError(path + ": empty file, missing header");
  ++line_no;
  json header = parse_line(line);
  LoadedPairs result;
  std::size_t expected = 0;
  try {
    if (header.at("kind").get<std::string>() != "header") {
      throw FormatError(path + ": line 1: first record is not a header");
    }
    if (header.at("version").get<int>() != kPairFormatVersion) {
      throw FormatError(path + ": unsupported format version");
    }
    result.k = header.at("K").get<int>();
    result.d_in = header.at("d_in").get<int>();
    std::string hex = header.at("inventory").get<std::string>();
    result.inventory_checksum = std::stoull(hex, nullptr, 16);
    expected = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(path + ": line 1: " + e.what());
  }

  result.pairs.reserve(expected);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line);
    try {
      result.pairs.push_back(pair_from_json(j));
    } catch (const json::exception& e) {
      throw FormatError(path + ": record " + std::to_string(line_no - 1) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path + ": record " + std::to_string(line_no - 1) + ": " + e.what());
    }
  }
  if (result.pairs.size() != expected) {
    throw FormatError(path + ": truncated: header promises " + std::to_string(expected) +
                      " records, found " + std::to_string(result.pairs.size()));
  }
  return result;
}

void save_utterance(const Utterance& u, const std::string& path) {
  write_text_file(path, utterance_to_json(u).dump(2) + "\n");
}

Utterance load_utterance(const std::string& path) {
  try {
    return utterance_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw FormatError("utterance file " + path + ": " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << content;
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace kws
