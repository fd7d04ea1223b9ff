#include "sequnet/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sequnet/errors.hpp"

namespace sequnet {

namespace {

long to_long(const std::string& k, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key " + k + ": expected an integer, got '" + v + "'");
}

double to_double(const std::string& k, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key " + k + ": expected a number, got '" + v + "'");
}

bool to_bool(const std::string& k, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + k + ": expected true or false, got '" + v + "'");
}

std::string anchor(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

std::string opt_text(const std::optional<double>& v) {
  if (!v) return "none";
  std::ostringstream o;
  o << *v;
  return o.str();
}

std::string num(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

const std::vector<std::string> kOwnKeys = {
    "run.seed",           "run.out_dir",
    "task.kind",          "task.train",          "task.valid",          "task.test",
    "task.vocab",         "task.max_vocab",      "task.holdout",        "task.period",
    "task.period_vocab",  "task.period_length",
    "train.learning_rate", "train.batch_size",   "train.max_epochs",    "train.patience",
    "train.clip",         "train.clip_by_value", "train.target_span",   "train.eval_cadence",
    "train.max_steps",    "train.steps_per_epoch", "train.target_metric",
    "generate.steps",     "generate.temperature", "generate.seed_length", "generate.naive",
    "generate.prompt",
    "profile.input_length", "profile.update_steps", "profile.bench_steps", "profile.bench_runs",
    "profile.compare",
    "gradcheck.instances",
};

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> all = [] {
    std::vector<std::string> k;
    for (const auto& m : ModelConfig::keys()) k.push_back("model." + m);
    k.insert(k.end(), kOwnKeys.begin(), kOwnKeys.end());
    return k;
  }();
  return all;
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& base) {
  const std::string& k = key;
  const std::string& v = value;
  if (k.rfind("model.", 0) == 0) {
    model.set(k, v);
  } else if (k == "run.seed") {
    seed = static_cast<std::uint64_t>(to_long(k, v));
    train.seed = seed;
  } else if (k == "run.out_dir") {
    out_dir = v;
  } else if (k == "task.kind") {
    task.kind = parse_task(v);
  } else if (k == "task.train") {
    task.train_path = anchor(v, base);
  } else if (k == "task.valid") {
    task.valid_path = anchor(v, base);
  } else if (k == "task.test") {
    task.test_path = anchor(v, base);
  } else if (k == "task.vocab") {
    task.vocab_path = anchor(v, base);
  } else if (k == "task.max_vocab") {
    task.max_vocab = static_cast<int>(to_long(k, v));
  } else if (k == "task.holdout") {
    task.holdout = to_double(k, v);
  } else if (k == "task.period") {
    task.period = static_cast<int>(to_long(k, v));
  } else if (k == "task.period_vocab") {
    task.period_vocab = static_cast<int>(to_long(k, v));
  } else if (k == "task.period_length") {
    task.period_length = to_long(k, v);
  } else if (k == "train.learning_rate") {
    train.learning_rate = to_double(k, v);
  } else if (k == "train.batch_size") {
    train.batch_size = static_cast<int>(to_long(k, v));
  } else if (k == "train.max_epochs") {
    train.max_epochs = static_cast<int>(to_long(k, v));
  } else if (k == "train.patience") {
    train.patience = static_cast<int>(to_long(k, v));
  } else if (k == "train.clip") {
    if (v == "none" || v == "no") train.clip.reset();
    else train.clip = to_double(k, v);
  } else if (k == "train.clip_by_value") {
    train.clip_by_value = to_bool(k, v);
  } else if (k == "train.target_span") {
    train.target_span = to_long(k, v);
  } else if (k == "train.eval_cadence") {
    train.eval_cadence = static_cast<int>(to_long(k, v));
  } else if (k == "train.max_steps") {
    train.max_steps = to_long(k, v);
  } else if (k == "train.steps_per_epoch") {
    train.steps_per_epoch = to_long(k, v);
  } else if (k == "train.target_metric") {
    if (v == "none") train.target_metric.reset();
    else train.target_metric = to_double(k, v);
  } else if (k == "generate.steps") {
    generate.steps = to_long(k, v);
  } else if (k == "generate.temperature") {
    generate.temperature = to_double(k, v);
  } else if (k == "generate.seed_length") {
    generate.seed_length = to_long(k, v);
  } else if (k == "generate.naive") {
    generate.naive = to_bool(k, v);
  } else if (k == "generate.prompt") {
    generate.prompt = anchor(v, base);
  } else if (k == "profile.input_length") {
    profile.input_length = to_long(k, v);
  } else if (k == "profile.update_steps") {
    profile.update_steps = to_long(k, v);
  } else if (k == "profile.bench_steps") {
    profile.bench_steps = to_long(k, v);
  } else if (k == "profile.bench_runs") {
    profile.bench_runs = static_cast<int>(to_long(k, v));
  } else if (k == "profile.compare") {
    profile.compare = anchor(v, base);
  } else if (k == "gradcheck.instances") {
    gradcheck_instances = static_cast<int>(to_long(k, v));
  } else {
    throw ConfigError("unknown config key: " + k);
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << model.to_text();
  o << "run.seed = " << seed << '\n';
  o << "run.out_dir = " << out_dir << '\n';
  o << "task.kind = " << to_string(task.kind) << '\n';
  o << "task.train = " << task.train_path << '\n';
  o << "task.valid = " << task.valid_path << '\n';
  o << "task.test = " << task.test_path << '\n';
  o << "task.vocab = " << task.vocab_path << '\n';
  o << "task.max_vocab = " << task.max_vocab << '\n';
  o << "task.holdout = " << num(task.holdout) << '\n';
  o << "task.period = " << task.period << '\n';
  o << "task.period_vocab = " << task.period_vocab << '\n';
  o << "task.period_length = " << task.period_length << '\n';
  o << "train.learning_rate = " << num(train.learning_rate) << '\n';
  o << "train.batch_size = " << train.batch_size << '\n';
  o << "train.max_epochs = " << train.max_epochs << '\n';
  o << "train.patience = " << train.patience << '\n';
  o << "train.clip = " << opt_text(train.clip) << '\n';
  o << "train.clip_by_value = " << (train.clip_by_value ? "true" : "false") << '\n';
  o << "train.target_span = " << train.target_span << '\n';
  o << "train.eval_cadence = " << train.eval_cadence << '\n';
  o << "train.max_steps = " << train.max_steps << '\n';
  o << "train.steps_per_epoch = " << train.steps_per_epoch << '\n';
  o << "train.target_metric = " << opt_text(train.target_metric) << '\n';
  o << "generate.steps = " << generate.steps << '\n';
  o << "generate.temperature = " << num(generate.temperature) << '\n';
  o << "generate.seed_length = " << generate.seed_length << '\n';
  o << "generate.naive = " << (generate.naive ? "true" : "false") << '\n';
  o << "generate.prompt = " << generate.prompt << '\n';
  o << "profile.input_length = " << profile.input_length << '\n';
  o << "profile.update_steps = " << profile.update_steps << '\n';
  o << "profile.bench_steps = " << profile.bench_steps << '\n';
  o << "profile.bench_runs = " << profile.bench_runs << '\n';
  o << "profile.compare = " << profile.compare << '\n';
  o << "gradcheck.instances = " << gradcheck_instances << '\n';
  return o.str();
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (!(generate.temperature > 0.0)) throw ConfigError("generate.temperature must be > 0");
  if (generate.steps < 0) throw ConfigError("generate.steps must be >= 0");
  if (gradcheck_instances < 1) throw ConfigError("gradcheck.instances must be >= 1");
}

RunConfig RunConfig::from_text(const std::string& text, const std::string& base) {
  RunConfig r;
  for (const auto& [k, v] : parse_key_values(text)) {
    // Empty values keep defaults, so resolved configs parse back.
    if (v.empty()) continue;
    r.set(k, v, base);
  }
  return r;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace sequnet
