#include "sequnet/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "sequnet/checkpoint.hpp"
#include "sequnet/codec.hpp"
#include "sequnet/generate.hpp"
#include "sequnet/gradcheck_suite.hpp"
#include "sequnet/metrics.hpp"
#include "sequnet/profile.hpp"
#include "sequnet/run_config.hpp"

namespace sequnet {

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string checkpoint;
  bool naive = false;
  std::optional<double> temperature;
  std::optional<long> steps;
};

RunConfig resolve(const Flags& f, std::ostream& out) {
  RunConfig rc = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
  std::vector<std::string> applied;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    rc.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    applied.push_back(s);
  }
  if (f.seed) {
    rc.set("run.seed", std::to_string(*f.seed));
    applied.push_back("--seed " + std::to_string(*f.seed));
  }
  if (!f.out_dir.empty()) {
    rc.out_dir = f.out_dir;
    applied.push_back("--out-dir " + f.out_dir);
  }
  if (f.naive) {
    rc.generate.naive = true;
    applied.push_back("--naive");
  }
  if (f.temperature) {
    rc.generate.temperature = *f.temperature;
    applied.push_back("--temperature " + std::to_string(*f.temperature));
  }
  if (f.steps) {
    rc.generate.steps = *f.steps;
    applied.push_back("--steps " + std::to_string(*f.steps));
  }
  rc.validate();

  out << "# config file: " << (f.config.empty() ? "(none)" : f.config) << '\n';
  out << "# overrides:";
  for (const auto& a : applied) out << ' ' << a;
  out << '\n' << rc.to_text();
  std::filesystem::create_directories(rc.out_dir);
  std::ofstream log(rc.out_dir + "/resolved.cfg");
  log << "# config file: " << (f.config.empty() ? "(none)" : f.config) << '\n' << rc.to_text();
  return rc;
}

Model<float> model_for(const RunConfig& rc, const std::string& checkpoint) {
  if (checkpoint.empty()) return build_model(rc.model, rc.seed);
  if (!std::filesystem::exists(checkpoint)) throw DataError("checkpoint not found: " + checkpoint);
  return model_from_checkpoint(load_checkpoint(checkpoint));
}

int cmd_train(const Flags& f, std::ostream& out) {
  RunConfig rc = resolve(f, out);
  Model<float> model = model_for(rc, f.checkpoint);
  out << "parameters " << model.params().element_count() << " min_input_length " << model.min_input_length() << '\n';
  TaskData task = load_task(rc.task, rc.seed);
  TrainResult r = train_model(model, task, rc.train, rc.out_dir, &out);
  out << "best " << task_metric_name(task.kind) << "_valid " << r.best_valid << " at epoch " << r.best_epoch << '\n';
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  if (f.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
  RunConfig rc = resolve(f, out);
  Model<float> model = model_for(rc, f.checkpoint);
  TaskData task = load_task(rc.task, rc.seed);
  const char* name = task_metric_name(task.kind);
  std::ofstream res(rc.out_dir + "/eval.txt");
  res << std::setprecision(10);
  for (const auto& [split, set] : {std::pair{"valid", &task.valid}, std::pair{"test", &task.test}}) {
    const double m = task_split_metric(model, task, *set);
    out << split << ' ' << name << ' ' << m << '\n';
    res << split << '_' << name << " = " << m << '\n';
  }
  return kExitOk;
}

std::vector<int> prompt_symbols(const RunConfig& rc, const TaskData& task) {
  if (!rc.generate.prompt.empty()) {
    switch (rc.task.kind) {
      case TaskKind::char_lm: return load_char_corpus(rc.generate.prompt);
      case TaskKind::word_lm: return encode_words(read_words(rc.generate.prompt), task.vocab);
      case TaskKind::audio: return mu_law_encode(load_audio_pcm(rc.generate.prompt));
      case TaskKind::pianoroll: break;
    }
  }
  if (task.test.symbols.empty()) throw DataError("no test sequence to seed generation");
  return task.test.symbols.front();
}

int cmd_generate(const Flags& f, std::ostream& out) {
  if (f.checkpoint.empty()) throw ConfigError("generate needs --checkpoint");
  RunConfig rc = resolve(f, out);
  Model<float> model = model_for(rc, f.checkpoint);
  TaskData task = load_task(rc.task, rc.seed);
  const long seed_len = rc.generate.seed_length > 0 ? rc.generate.seed_length : model.min_input_length();
  std::mt19937_64 rng(rc.seed);
  const double tau = rc.generate.temperature;
  const long n = rc.generate.steps;

  if (task.kind == TaskKind::pianoroll) {
    const std::vector<PianoRoll> prompt = rc.generate.prompt.empty() ? task.test.rolls : load_pianoroll(rc.generate.prompt);
    if (prompt.empty()) throw DataError("no piece to seed generation");
    const PianoRoll& src = prompt.front();
    if (src.time() < seed_len) throw InsufficientLength(seed_len, src.time(), "generation seed piece");
    PianoRoll seed(src.channels(), static_cast<int>(seed_len));
    for (int p = 0; p < src.channels(); ++p)
      for (long t = 0; t < seed_len; ++t) seed.at(p, static_cast<int>(t)) = src.at(p, static_cast<int>(t));
    PianoRoll gen = generate_frames(model, seed, n, tau, rng, rc.generate.naive);
    const std::string path = rc.out_dir + "/generated.json";
    save_pianoroll(path, {gen});
    out << "wrote " << path << " (" << gen.time() << " frames)\n";
    return kExitOk;
  }

  std::vector<int> prompt = prompt_symbols(rc, task);
  if (static_cast<long>(prompt.size()) < seed_len)
    throw InsufficientLength(seed_len, static_cast<long>(prompt.size()), "generation seed");
  prompt.resize(seed_len);
  const auto symbols = generate_symbols(model, prompt, n, tau, rng, rc.generate.naive);
  std::string path;
  if (task.kind == TaskKind::audio) {
    path = rc.out_dir + "/generated.wav";
    save_wav(path, mu_law_decode(std::span<const int>(symbols)));
  } else {
    path = rc.out_dir + "/generated.txt";
    std::ofstream o(path, std::ios::binary);
    if (!o) throw DataError("cannot write " + path);
    if (task.kind == TaskKind::char_lm) {
      for (int s : symbols) o.put(static_cast<char>(static_cast<unsigned char>(s)));
    } else {
      bool fresh = true;
      for (int s : symbols) {
        const std::string& tok = task.vocab.tokens.at(s);
        if (tok == "<eos>") {
          o << '\n';
          fresh = true;
          continue;
        }
        if (!fresh) o << ' ';
        o << tok;
        fresh = false;
      }
    }
  }
  out << "wrote " << path << " (" << symbols.size() << " symbols, " << n << " generated)\n";
  return kExitOk;
}

int cmd_profile(const Flags& f, std::ostream& out) {
  RunConfig rc = resolve(f, out);
  Model<float> model = model_for(rc, f.checkpoint);
  const long period = model.graph().phase_period();
  long I = rc.profile.input_length;
  if (I <= 0) I = (model.min_input_length() + period - 1) / period * period;
  const long steps = rc.profile.update_steps > 0 ? rc.profile.update_steps : 10 * period;
  CostReport report = build_cost_report(model, I, steps, rc.seed);
  if (rc.profile.bench_steps > 0) {
    std::vector<std::pair<std::string, Model<float>*>> models{{"model", &model}};
    std::optional<Model<float>> other;
    if (!rc.profile.compare.empty()) {
      other.emplace(build_model(RunConfig::load(rc.profile.compare).model, rc.seed));
      models.emplace_back("compare", &*other);
    }
    report.bench = bench_generation(models, rc.seed, rc.profile.bench_steps, rc.profile.bench_runs);
    if (report.bench.size() == 2) report.speedup = report.bench[0].samples_per_sec / report.bench[1].samples_per_sec;
  }
  emit_report(report, rc.out_dir + "/cost_report.csv", "csv");
  emit_report(report, rc.out_dir + "/cost_report.md", "markdown");
  emit_report(report, out, "csv");
  return kExitOk;
}

int cmd_gradcheck(const Flags& f, std::ostream& out) {
  RunConfig rc = resolve(f, out);
  bool ok = true;
  for (const auto& e : run_gradcheck_suite(rc.gradcheck_instances, rc.seed)) {
    out << (e.passed ? "PASS " : "FAIL ") << e.name << " instances=" << e.instances
        << " max_rel_error=" << e.max_rel_error << (e.worst.empty() ? "" : " worst=" + e.worst) << '\n';
    ok = ok && e.passed;
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal multi-scale convolutional sequence models"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "key = value config file");
    sub->add_option("--set", f.sets, "override, as key=value (repeatable)");
    sub->add_option("--seed", f.seed, "run seed");
    sub->add_option("--out-dir", f.out_dir, "output directory");
    sub->add_option("--checkpoint", f.checkpoint, "checkpoint file");
    sub->add_flag("--naive", f.naive, "generate with full forwards instead of streaming");
    sub->add_option("--temperature", f.temperature, "sampling temperature (default 0.95)");
    sub->add_option("--steps", f.steps, "number of generated steps");
  };
  std::vector<std::pair<CLI::App*, int (*)(const Flags&, std::ostream&)>> subs = {
      {app.add_subcommand("train", "train a model"), cmd_train},
      {app.add_subcommand("eval", "evaluate a checkpoint"), cmd_eval},
      {app.add_subcommand("generate", "sample a continuation"), cmd_generate},
      {app.add_subcommand("profile", "count activations, updates and generation speed"), cmd_profile},
      {app.add_subcommand("gradcheck", "finite-difference gradient checks"), cmd_gradcheck},
  };
  for (auto& s : subs) common(s.first);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    for (auto& [sub, fn] : subs)
      if (sub->parsed()) return fn(f, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InsufficientLength& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace sequnet
