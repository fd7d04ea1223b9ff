#include "sequnet/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "sequnet/checkpoint.hpp"
#include "sequnet/codec.hpp"
#include "sequnet/metrics.hpp"
#include "sequnet/optim.hpp"

namespace sequnet {

namespace {

// Splits `all` into (head, tail) with `fraction` of the frames in the tail.
template <typename V>
V take_tail(V& all, double fraction) {
  const std::size_t n = all.size();
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * fraction)));
  if (k >= n) throw DataError("training split too small to carve a held-out split");
  V tail(all.end() - static_cast<std::ptrdiff_t>(k), all.end());
  all.erase(all.end() - static_cast<std::ptrdiff_t>(k), all.end());
  return tail;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw DataError(std::string("no ") + what + " path configured");
  if (!std::filesystem::exists(path)) throw DataError(std::string(what) + " not found: " + path);
}

std::vector<int> load_symbols(TaskKind kind, const std::string& path, const Vocab& vocab) {
  switch (kind) {
    case TaskKind::char_lm: return load_char_corpus(path);
    case TaskKind::word_lm: return encode_words(read_words(path), vocab);
    case TaskKind::audio: return mu_law_encode(load_audio_pcm(path));
    case TaskKind::pianoroll: break;
  }
  throw ConfigError("piano rolls are not a symbol stream");
}

}  // namespace

TaskData load_task(const TaskSpec& spec, std::uint64_t seed) {
  TaskData d;
  d.kind = spec.kind;
  if (!(spec.holdout > 0.0 && spec.holdout < 0.5)) throw ConfigError("task.holdout must be in (0, 0.5)");

  if (spec.period > 0) {
    if (spec.kind != TaskKind::char_lm) throw ConfigError("periodic data is a char_lm task");
    auto s = periodic_sequence(spec.period, spec.period_length, spec.period_vocab, seed);
    d.symbols = spec.period_vocab;
    d.valid.symbols.push_back(take_tail(s, spec.holdout));
    d.test.symbols.push_back(d.valid.symbols.back());
    d.train.symbols.push_back(std::move(s));
    return d;
  }

  require_file(spec.train_path, "training data");
  if (!spec.valid_path.empty()) require_file(spec.valid_path, "validation data");
  if (!spec.test_path.empty()) require_file(spec.test_path, "test data");

  if (spec.kind == TaskKind::pianoroll) {
    auto train = load_pianoroll(spec.train_path);
    if (train.empty()) throw DataError(spec.train_path + ": no pieces");
    d.symbols = kPianoPitches;
    d.test.rolls = spec.test_path.empty() ? take_tail(train, spec.holdout) : load_pianoroll(spec.test_path);
    d.valid.rolls = spec.valid_path.empty() ? take_tail(train, spec.holdout) : load_pianoroll(spec.valid_path);
    d.train.rolls = std::move(train);
    return d;
  }

  if (spec.kind == TaskKind::word_lm) {
    if (!spec.vocab_path.empty() && std::filesystem::exists(spec.vocab_path)) {
      d.vocab = Vocab::load(spec.vocab_path);
    } else {
      d.vocab = Vocab::build(read_words(spec.train_path), spec.max_vocab);
      if (!spec.vocab_path.empty()) d.vocab.save(spec.vocab_path);
    }
    d.symbols = d.vocab.size();
  } else {
    d.symbols = 256;
  }
  auto train = load_symbols(spec.kind, spec.train_path, d.vocab);
  d.test.symbols.push_back(spec.test_path.empty() ? take_tail(train, spec.holdout)
                                                  : load_symbols(spec.kind, spec.test_path, d.vocab));
  d.valid.symbols.push_back(spec.valid_path.empty() ? take_tail(train, spec.holdout)
                                                    : load_symbols(spec.kind, spec.valid_path, d.vocab));
  d.train.symbols.push_back(std::move(train));
  return d;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("train.patience must be >= 1");
  if (clip && !(*clip > 0.0)) throw ConfigError("train.clip must be > 0");
  if (target_span < 0) throw ConfigError("train.target_span must be >= 1, or 0 for whole sequences");
  if (eval_cadence < 1) throw ConfigError("train.eval_cadence must be >= 1");
  if (max_steps < 0 || steps_per_epoch < 0) throw ConfigError("train step budgets must be >= 0");
}

double task_split_metric(Model<float>& model, const TaskData& task, const SequenceSet& split) {
  return task_metric(task.kind, evaluate_nll(model, split).nats_per_frame);
}

TrainResult train_model(Model<float>& model, const TaskData& task, const TrainConfig& config,
                        const std::string& out_dir, std::ostream* log) {
  config.validate();
  const ModelConfig& mc = model.config();
  if (task.train.symbolic()) {
    const int width = mc.io_mode == IoMode::embedding_tied ? mc.vocab_size : mc.in_channels;
    if (mc.io_mode == IoMode::pitch_logits) throw ConfigError("io_mode/task mismatch: pitch io on a symbolic task");
    if (task.symbols > width)
      throw ConfigError("model alphabet " + std::to_string(width) + " smaller than task alphabet " +
                        std::to_string(task.symbols));
  } else if (mc.io_mode != IoMode::pitch_logits) {
    throw ConfigError("io_mode/task mismatch: piano rolls need pitch_logits");
  }

  std::mt19937_64 rng(config.seed);
  AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  ac.clip = config.clip;
  ac.clip_by_value = config.clip_by_value;
  Adam adam(model.params(), ac);
  PlateauSchedule schedule(config.learning_rate, config.patience);

  std::ofstream csv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(out_dir + "/metrics.csv");
    if (!csv) throw DataError("cannot write " + out_dir + "/metrics.csv");
    csv << "epoch,step,train_nats," << task_metric_name(task.kind) << "_valid,learning_rate\n";
    csv << std::setprecision(10);
  }

  TrainResult result;
  result.best_valid = std::numeric_limits<double>::infinity();
  ParameterStore<float> best = model.params();
  bool stop = false;

  for (int epoch = 1; epoch <= config.max_epochs && !stop; ++epoch) {
    double loss_sum = 0.0;
    long loss_frames = 0;
    long epoch_steps = 0;
    while (!stop) {
      auto batches = make_batches(task.train, model.min_input_length(), config.batch_size, config.target_span, rng);
      for (const Batch& batch : batches) {
        model.params().zero_grads();
        model.refresh();
        const float scale = 1.0f / static_cast<float>(batch.size());
        for (const Window& w : batch) {
          Tape<float> tape;
          auto wl = window_loss(model, tape, task.train, w, true, rng);
          const double l = tape.scalar(wl.loss);
          if (!std::isfinite(l)) throw NumericError("non-finite training loss at step " + std::to_string(result.steps));
          loss_sum += l * wl.frames;
          loss_frames += wl.frames;
          tape.backward(wl.loss, scale);
        }
        model.pull_gradients();
        adam.step();
        ++result.steps;
        ++epoch_steps;
        if (config.max_steps > 0 && result.steps >= config.max_steps) stop = true;
        if (stop || (config.steps_per_epoch > 0 && epoch_steps >= config.steps_per_epoch)) break;
      }
      if (config.steps_per_epoch == 0 || epoch_steps >= config.steps_per_epoch) break;
    }
    model.refresh();

    const bool last = stop || epoch == config.max_epochs;
    if (epoch % config.eval_cadence != 0 && !last) continue;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = result.steps;
    rec.train_loss = loss_frames ? loss_sum / loss_frames : 0.0;
    rec.valid_metric = task_split_metric(model, task, task.valid);
    rec.learning_rate = adam.learning_rate();
    result.history.push_back(rec);

    if (rec.valid_metric < result.best_valid) {
      result.best_valid = rec.valid_metric;
      result.best_epoch = epoch;
      for (std::size_t i = 0; i < best.size(); ++i) best[i].value = model.params()[i].value;
    }
    adam.set_learning_rate(schedule.on_epoch_end(rec.valid_metric, epoch));

    if (csv.is_open()) {
      csv << rec.epoch << ',' << rec.step << ',' << rec.train_loss << ',' << rec.valid_metric << ','
          << rec.learning_rate << '\n';
      csv.flush();
    }
    if (log) {
      *log << "epoch " << epoch << " step " << result.steps << " train_nats " << rec.train_loss << ' '
           << task_metric_name(task.kind) << "_valid " << rec.valid_metric << " lr " << rec.learning_rate << '\n';
    }
    if (!out_dir.empty() && result.best_epoch == epoch) {
      OptimizerSection os;
      adam.export_state(os);
      os.epoch = epoch;
      os.learning_rate = adam.learning_rate();
      os.best_metric = result.best_valid;
      os.stalled_epochs = schedule.stalled();
      save_checkpoint(out_dir + "/best.ckpt", model, &os);
    }
    if (config.target_metric && rec.valid_metric < *config.target_metric) stop = true;
  }

  for (std::size_t i = 0; i < best.size(); ++i) model.params()[i].value = best[i].value;
  model.refresh();
  if (task.test.size() > 0) {
    result.test_metric = task_split_metric(model, task, task.test);
    if (csv.is_open()) csv << "# test_" << task_metric_name(task.kind) << ',' << *result.test_metric << '\n';
    if (log) *log << "test " << task_metric_name(task.kind) << ' ' << *result.test_metric << '\n';
  }
  return result;
}

}  // namespace sequnet
