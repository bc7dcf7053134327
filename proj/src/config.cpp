#include "cl4srec/config.hpp"

#include "cl4srec/dataset_io.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace cl4srec {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::CL4SRec: return "cl4srec";
    case TrainMode::SASRec: return "sasrec";
    case TrainMode::SASRecAug: return "sasrec_aug";
  }
  return "?";
}

TrainMode parse_train_mode(const std::string& name) {
  if (name == "cl4srec") return TrainMode::CL4SRec;
  if (name == "sasrec") return TrainMode::SASRec;
  if (name == "sasrec_aug") return TrainMode::SASRecAug;
  throw Error("unknown train mode '" + name + "'");
}

std::vector<AugmentOp> AugmentConfig::to_ops() const {
  std::vector<AugmentOp> out;
  for (auto k : ops) {
    const double rate = k == AugmentKind::Crop ? eta : k == AugmentKind::Mask ? gamma : beta;
    out.push_back({k, rate});
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw Error("train.lr must be positive");
  if (batch_size < 1) throw Error("train.batch_size must be positive");
  if (mode == TrainMode::CL4SRec && batch_size < 2) {
    throw Error("train.batch_size must be at least 2 in cl4srec mode");
  }
  if (max_epochs < 1) throw Error("train.epochs must be positive");
  if (patience < 0) throw Error("train.patience must be non-negative");
  if (!(lr_floor >= 0.0 && lr_floor <= 1.0)) throw Error("train.lr_floor must lie in [0, 1]");
  if (!(loss.lambda >= 0.0)) throw Error("loss.lambda must be non-negative");
  if (loss.negatives_k < 1) throw Error("loss.negatives_k must be positive");
  for (double r : {augment.eta, augment.gamma, augment.beta}) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error("augmentation rates must lie in [0, 1]");
  }
  if (mode != TrainMode::SASRec && augment.ops.empty() &&
      !(mode == TrainMode::CL4SRec && loss.lambda == 0.0)) {
    throw Error("augment.ops must be non-empty for " + to_string(mode));
  }
}

namespace {

std::string fmt_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

double parse_double(const std::string& key, const std::string& s) {
  double x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(key + ": not a number: '" + s + "'");
  return x;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& s) {
  Int x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(key + ": not an integer: '" + s + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(key + ": expected true/false, got '" + s + "'");
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\t') {
      out += "\\t";
    } else if (c == '\\') {
      out += "\\\\";
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      out += s[i] == 't' ? '\t' : s[i];
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class Get>
Field double_field(Get g) {
  return {[g](ExperimentConfig& c, const std::string& v) { g(c) = parse_double("value", v); },
          [g](const ExperimentConfig& c) { return fmt_double(g(const_cast<ExperimentConfig&>(c))); }};
}

template <class Int, class Get>
Field int_field(Get g) {
  return {[g](ExperimentConfig& c, const std::string& v) { g(c) = parse_int<Int>("value", v); },
          [g](const ExperimentConfig& c) { return std::to_string(g(const_cast<ExperimentConfig&>(c))); }};
}

template <class Get>
Field bool_field(Get g) {
  return {[g](ExperimentConfig& c, const std::string& v) { g(c) = parse_bool("value", v); },
          [g](const ExperimentConfig& c) { return std::string(g(const_cast<ExperimentConfig&>(c)) ? "true" : "false"); }};
}

template <class Get>
Field string_field(Get g) {
  return {[g](ExperimentConfig& c, const std::string& v) { g(c) = unescape(v); },
          [g](const ExperimentConfig& c) { return escape(g(const_cast<ExperimentConfig&>(c))); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"data.dir", string_field([](C& c) -> std::string& { return c.dataset_dir; })},
      {"data.name", string_field([](C& c) -> std::string& { return c.dataset_name; })},
      {"corpus.delimiter", string_field([](C& c) -> std::string& { return c.delimiter; })},
      {"corpus.min_count", int_field<std::size_t>([](C& c) -> std::size_t& { return c.min_count; })},
      {"corpus.max_len", int_field<int>([](C& c) -> int& { return c.encoder.max_len; })},
      {"encoder.d", int_field<int>([](C& c) -> int& { return c.encoder.d; })},
      {"encoder.heads", int_field<int>([](C& c) -> int& { return c.encoder.heads; })},
      {"encoder.layers", int_field<int>([](C& c) -> int& { return c.encoder.layers; })},
      {"encoder.d_ff", int_field<int>([](C& c) -> int& { return c.encoder.d_ff; })},
      {"encoder.dropout", double_field([](C& c) -> double& { return c.encoder.dropout; })},
      {"augment.ops",
       {[](C& c, const std::string& v) {
          c.train.augment.ops.clear();
          std::istringstream in(v);
          std::string tok;
          while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty() && tok != "none") c.train.augment.ops.push_back(parse_augment_kind(tok));
          }
        },
        [](const C& c) {
          std::string s;
          for (auto k : c.train.augment.ops) s += (s.empty() ? "" : ",") + to_string(k);
          return s.empty() ? std::string("none") : s;
        }}},
      {"augment.eta", double_field([](C& c) -> double& { return c.train.augment.eta; })},
      {"augment.gamma", double_field([](C& c) -> double& { return c.train.augment.gamma; })},
      {"augment.beta", double_field([](C& c) -> double& { return c.train.augment.beta; })},
      {"loss.lambda", double_field([](C& c) -> double& { return c.train.loss.lambda; })},
      {"loss.negatives_k", int_field<std::size_t>([](C& c) -> std::size_t& { return c.train.loss.negatives_k; })},
      {"loss.symmetric_cl", bool_field([](C& c) -> bool& { return c.train.loss.symmetric_cl; })},
      {"loss.filter_history", bool_field([](C& c) -> bool& { return c.train.loss.filter_history; })},
      {"train.mode",
       {[](C& c, const std::string& v) { c.train.mode = parse_train_mode(v); },
        [](const C& c) { return to_string(c.train.mode); }}},
      {"train.batch_size", int_field<std::size_t>([](C& c) -> std::size_t& { return c.train.batch_size; })},
      {"train.lr", double_field([](C& c) -> double& { return c.train.lr; })},
      {"train.adam_beta1", double_field([](C& c) -> double& { return c.train.adam_beta1; })},
      {"train.adam_beta2", double_field([](C& c) -> double& { return c.train.adam_beta2; })},
      {"train.adam_epsilon", double_field([](C& c) -> double& { return c.train.adam_epsilon; })},
      {"train.lr_floor", double_field([](C& c) -> double& { return c.train.lr_floor; })},
      {"train.epochs", int_field<int>([](C& c) -> int& { return c.train.max_epochs; })},
      {"train.patience", int_field<int>([](C& c) -> int& { return c.train.patience; })},
      {"train.seed", int_field<std::uint64_t>([](C& c) -> std::uint64_t& { return c.train.seed; })},
      {"eval.ks",
       {[](C& c, const std::string& v) {
          c.eval.ks.clear();
          std::istringstream in(v);
          std::string tok;
          while (std::getline(in, tok, ',')) c.eval.ks.push_back(parse_int<std::size_t>("eval.ks", trim(tok)));
        },
        [](const C& c) {
          std::string s;
          for (auto k : c.eval.ks) s += (s.empty() ? "" : ",") + std::to_string(k);
          return s;
        }}},
      {"eval.filter_seen", bool_field([](C& c) -> bool& { return c.eval.filter_seen; })},
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return f;
  }
  throw Error("unknown config key '" + key + "'");
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  encoder.max_len = 50;
  encoder.d = 64;
  encoder.d_ff = 64;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& f = field(key);
  try {
    f.set(*this, value);
  } catch (const Error& e) {
    throw Error(key + ": " + e.what());
  }
}

std::string ExperimentConfig::get(const std::string& key) const { return field(key).get(*this); }

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return k;
}

void ExperimentConfig::validate() const {
  EncoderHyper probe = encoder;
  if (probe.num_items == 0) probe.num_items = 1;  // catalog known only after loading data
  probe.validate();
  train.validate();
  if (eval.ks.empty()) throw Error("eval.ks must list at least one cutoff");
  for (auto k : eval.ks) {
    if (k == 0) throw Error("eval.ks entries must be positive");
  }
  if (delimiter.empty()) throw Error("corpus.delimiter must be non-empty");
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  for (const auto& [k, f] : fields()) s += k + " = " + f.get(*this) + "\n";
  return s;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string ExperimentConfig::run_name() const {
  std::string ops;
  for (auto k : train.augment.ops) ops += (ops.empty() ? "" : "+") + to_string(k);
  if (ops.empty() || train.mode == TrainMode::SASRec) ops = "noaug";
  std::string rate;
  if (train.augment.ops.size() == 1 && train.mode != TrainMode::SASRec) {
    rate = "-" + fmt_double(train.augment.to_ops()[0].rate);
  }
  const double lambda = train.mode == TrainMode::CL4SRec ? train.loss.lambda : 0.0;
  return dataset_name + "_" + to_string(train.mode) + "_" + ops + rate + "_l" + fmt_double(lambda) + "_s" +
         std::to_string(train.seed);
}

}  // namespace cl4srec
