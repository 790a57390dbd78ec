#include "kws/config.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

#include "kws/errors.hpp"

namespace kws {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing junk");
    return x;
  } catch (const std::exception&) {
    throw ParamError("config: " + key + ": '" + v + "' is not an integer");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing junk");
    return x;
  } catch (const std::exception&) {
    throw ParamError("config: " + key + ": '" + v + "' is not a number");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParamError("config: " + key + ": '" + v + "' is not a boolean");
}

std::vector<Field> fields(RunConfig& c) {
  auto int_field = [](const std::string& key, int& ref) {
    return Field{key, [&ref] { return std::to_string(ref); },
                 [&ref, key](const std::string& v) { ref = static_cast<int>(parse_int(key, v)); }};
  };
  auto u64_field = [](const std::string& key, std::uint64_t& ref) {
    return Field{key, [&ref] { return std::to_string(ref); },
                 [&ref, key](const std::string& v) {
                   ref = static_cast<std::uint64_t>(parse_int(key, v));
                 }};
  };
  auto dbl_field = [](const std::string& key, double& ref) {
    return Field{key, [&ref] { return fmt_double(ref); },
                 [&ref, key](const std::string& v) { ref = parse_double(key, v); }};
  };
  auto bool_field = [](const std::string& key, bool& ref) {
    return Field{key, [&ref] { return ref ? std::string("true") : std::string("false"); },
                 [&ref, key](const std::string& v) { ref = parse_bool(key, v); }};
  };
  auto str_field = [](const std::string& key, std::string& ref) {
    return Field{key, [&ref] { return ref; },
                 [&ref](const std::string& v) { ref = v; }};
  };

  return {
      int_field("corpus.k", c.corpus_k),
      int_field("corpus.d_in", c.corpus_d_in),
      dbl_field("corpus.separation", c.corpus_separation),
      int_field("corpus.vocab_size", c.vocab_size),
      int_field("corpus.kw_len_min", c.kw_len_min),
      int_field("corpus.kw_len_max", c.kw_len_max),
      int_field("corpus.dur_min", c.dur_min),
      int_field("corpus.dur_max", c.dur_max),
      dbl_field("corpus.noise_sigma", c.noise_sigma),
      dbl_field("corpus.speaker_sigma", c.speaker_sigma),
      int_field("corpus.hard_threshold", c.hard_threshold),
      int_field("corpus.n_pairs", c.n_pairs),
      dbl_field("corpus.frac_positive", c.frac_positive),
      dbl_field("corpus.frac_easy", c.frac_easy),
      dbl_field("corpus.frac_hard", c.frac_hard),
      dbl_field("corpus.split_train", c.split_train),
      dbl_field("corpus.split_val", c.split_val),
      dbl_field("corpus.split_test", c.split_test),
      bool_field("corpus.open_vocab", c.open_vocab),
      dbl_field("corpus.test_kw_fraction", c.test_kw_fraction),
      int_field("model.d_model", c.d_model),
      int_field("model.d_proj", c.d_proj),
      int_field("model.d_attn", c.d_attn),
      int_field("model.d_head", c.d_head),
      int_field("model.max_query_frames", c.max_query_frames),
      int_field("model.max_enroll_frames", c.max_enroll_frames),
      dbl_field("model.tau", c.tau),
      dbl_field("model.cos_eps", c.cos_eps),
      dbl_field("model.ln_eps", c.ln_eps),
      dbl_field("model.alpha", c.alpha),
      dbl_field("model.focal_gamma", c.focal_gamma),
      dbl_field("model.focal_weight", c.focal_weight),
      int_field("model.inject_count", c.inject_count),
      str_field("model.activation", c.activation),
      dbl_field("train.lr", c.lr),
      dbl_field("train.lr_decay", c.lr_decay),
      int_field("train.lr_decay_interval", c.lr_decay_interval),
      int_field("train.batch_size", c.batch_size),
      int_field("train.epochs", c.epochs),
      u64_field("train.seed", c.seed),
      bool_field("train.use_clat", c.use_clat),
      bool_field("train.use_claa", c.use_claa),
      bool_field("train.use_uat3", c.use_uat3),
      bool_field("train.use_bank", c.use_bank),
      bool_field("train.contrastive_mean", c.contrastive_mean),
      dbl_field("train.augment_fraction", c.augment_fraction),
      dbl_field("train.boost_factor", c.boost_factor),
      dbl_field("train.quality_threshold", c.quality_threshold),
      dbl_field("train.edit2_prob", c.edit2_prob),
  };
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ParamError("config: " + message);
}

}  // namespace

void RunConfig::validate() const {
  check(corpus_k >= 2 && corpus_k <= 4096, "corpus.k must lie in [2, 4096]");
  check(corpus_d_in >= 2 && corpus_d_in <= 1024, "corpus.d_in must lie in [2, 1024]");
  check(corpus_separation > 0.0 && corpus_separation <= 100.0,
        "corpus.separation must lie in (0, 100]");
  check(vocab_size >= 2 && vocab_size <= 100000, "corpus.vocab_size must lie in [2, 100000]");
  check(kw_len_min >= 1 && kw_len_min <= 64, "corpus.kw_len_min must lie in [1, 64]");
  check(kw_len_max >= kw_len_min && kw_len_max <= 128,
        "corpus.kw_len_max must lie in [kw_len_min, 128]");
  check(dur_min >= 1 && dur_min <= 64, "corpus.dur_min must lie in [1, 64]");
  check(dur_max >= dur_min && dur_max <= 256, "corpus.dur_max must lie in [dur_min, 256]");
  check(noise_sigma >= 0.0 && noise_sigma <= 10.0, "corpus.noise_sigma must lie in [0, 10]");
  check(speaker_sigma >= 0.0 && speaker_sigma <= 10.0,
        "corpus.speaker_sigma must lie in [0, 10]");
  check(hard_threshold >= 1 && hard_threshold <= 64,
        "corpus.hard_threshold must lie in [1, 64]");
  check(n_pairs >= 10 && n_pairs <= 10000000, "corpus.n_pairs must lie in [10, 10000000]");
  check(frac_positive > 0.0 && frac_positive < 1.0, "corpus.frac_positive must lie in (0,1)");
  check(frac_easy >= 0.0 && frac_easy < 1.0, "corpus.frac_easy must lie in [0,1)");
  check(frac_hard >= 0.0 && frac_hard < 1.0, "corpus.frac_hard must lie in [0,1)");
  check(std::abs(frac_positive + frac_easy + frac_hard - 1.0) < 1e-9,
        "corpus class fractions must sum to 1");
  check(split_train > 0.0 && split_val >= 0.0 && split_test >= 0.0,
        "corpus splits must be nonnegative with a positive train share");
  check(std::abs(split_train + split_val + split_test - 1.0) < 1e-9,
        "corpus splits must sum to 1");
  check(test_kw_fraction >= 0.0 && test_kw_fraction <= 0.5,
        "corpus.test_kw_fraction must lie in [0, 0.5]");
  check(d_model >= 4 && d_model <= 4096, "model.d_model must lie in [4, 4096]");
  check(d_proj >= 2 && d_proj <= d_model, "model.d_proj must lie in [2, d_model]");
  check(d_attn >= 2 && d_attn <= 4096, "model.d_attn must lie in [2, 4096]");
  check(d_head >= 2 && d_head <= 4096, "model.d_head must lie in [2, 4096]");
  check(max_query_frames >= kw_len_max * dur_max,
        "model.max_query_frames must cover kw_len_max*dur_max");
  // augmentation may insert up to 2 phonemes into enrollment sequences
  check(max_enroll_frames >= (kw_len_max + 2) * dur_max,
        "model.max_enroll_frames must cover (kw_len_max+2)*dur_max");
  check(tau > 0.0 && tau <= 100.0, "model.tau must lie in (0, 100]");
  check(cos_eps > 0.0 && cos_eps <= 1.0, "model.cos_eps must lie in (0, 1]");
  check(ln_eps > 0.0 && ln_eps <= 1.0, "model.ln_eps must lie in (0, 1]");
  check(alpha > 0.0 && alpha < 1.0, "model.alpha must lie in (0, 1)");
  check(focal_gamma >= 0.0 && focal_gamma <= 16.0, "model.focal_gamma must lie in [0, 16]");
  check(focal_weight > 0.0 && focal_weight <= 100.0,
        "model.focal_weight must lie in (0, 100]");
  check(inject_count >= 0 && inject_count <= 256, "model.inject_count must lie in [0, 256]");
  check(activation == "tanh", "model.activation must be 'tanh'");
  check(lr > 0.0 && lr <= 10.0, "train.lr must lie in (0, 10]");
  check(lr_decay > 0.0 && lr_decay <= 1.0, "train.lr_decay must lie in (0, 1]");
  check(lr_decay_interval >= 1 && lr_decay_interval <= 100000,
        "train.lr_decay_interval must lie in [1, 100000]");
  check(batch_size >= 1 && batch_size <= 65536, "train.batch_size must lie in [1, 65536]");
  check(epochs >= 1 && epochs <= 100000, "train.epochs must lie in [1, 100000]");
  check(augment_fraction >= 0.0 && augment_fraction <= 4.0,
        "train.augment_fraction must lie in [0, 4]");
  check(boost_factor >= 0.0 && boost_factor <= 8.0, "train.boost_factor must lie in [0, 8]");
  check(quality_threshold >= 0.0 && quality_threshold <= 0.5,
        "train.quality_threshold must lie in [0, 0.5]");
  check(edit2_prob >= 0.0 && edit2_prob <= 1.0, "train.edit2_prob must lie in [0, 1]");
}

std::string RunConfig::normalized() const {
  RunConfig copy = *this;
  std::ostringstream out;
  for (const auto& f : fields(copy)) out << f.key << " = " << f.get() << "\n";
  return out.str();
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.k_phonemes = corpus_k;
  m.d_in = corpus_d_in;
  m.d_model = d_model;
  m.d_proj = d_proj;
  m.d_attn = d_attn;
  m.d_head = d_head;
  m.max_query_frames = max_query_frames;
  m.max_enroll_frames = max_enroll_frames;
  m.tau = tau;
  m.cos_eps = cos_eps;
  m.ln_eps = ln_eps;
  m.alpha = alpha;
  m.focal_gamma = focal_gamma;
  m.focal_weight = focal_weight;
  m.inject_count = inject_count;
  m.activation = activation;
  m.init_seed = seed;
  return m;
}

SynthesisConfig RunConfig::synthesis_config() const {
  return SynthesisConfig{dur_min, dur_max, noise_sigma, speaker_sigma};
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParamError("config: line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    c.apply_override(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return c;
}

void RunConfig::apply_override(const std::string& key, const std::string& value) {
  for (const auto& f : fields(*this)) {
    if (f.key == key) {
      f.set(value);
      return;
    }
  }
  throw ParamError("config: unknown key '" + key + "'");
}

}  // namespace kws
