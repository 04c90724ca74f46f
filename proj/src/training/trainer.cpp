#include "coseg/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include "coseg/numerics/checkpoint.hpp"
#include "coseg/numerics/rng.hpp"
#include "coseg/text.hpp"

namespace coseg::training {

namespace {

constexpr std::size_t kBucketWidth = 8;
const std::string kParamPrefix = "param/";
const std::string kVelocityPrefix = "velocity/";
const std::string kStateBlock = "trainer/state";

}  // namespace

// ---------------------------------------------------------------- config

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (patience == 0) throw std::invalid_argument("patience must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw std::invalid_argument("lr_decay must be in (0, 1]");
  if (min_count == 0) throw std::invalid_argument("min_count must be positive");
}

void TrainConfig::write(KeyValues& kv) const {
  kv["lr"] = format_double(lr);
  kv["momentum"] = format_double(momentum);
  kv["clip_norm"] = format_double(clip_norm);
  kv["epochs"] = std::to_string(epochs);
  kv["batch_size"] = std::to_string(batch_size);
  kv["seed"] = std::to_string(seed);
  kv["patience"] = std::to_string(patience);
  kv["lr_decay"] = format_double(lr_decay);
  kv["min_count"] = std::to_string(min_count);
}

TrainConfig TrainConfig::read(const KeyValues& kv) {
  TrainConfig c;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("lr")) c.lr = parse_double(*v, "lr");
  if (auto v = get("momentum")) c.momentum = parse_double(*v, "momentum");
  if (auto v = get("clip_norm")) c.clip_norm = parse_double(*v, "clip_norm");
  if (auto v = get("epochs")) c.epochs = parse_size(*v, "epochs");
  if (auto v = get("batch_size")) c.batch_size = parse_size(*v, "batch_size");
  if (auto v = get("seed")) c.seed = parse_size(*v, "seed");
  if (auto v = get("patience")) c.patience = parse_size(*v, "patience");
  if (auto v = get("lr_decay")) c.lr_decay = parse_double(*v, "lr_decay");
  if (auto v = get("min_count")) c.min_count = parse_size(*v, "min_count");
  return c;
}

// ---------------------------------------------------------------- trainer

Trainer::Trainer(model::CosegModel& model, const TrainConfig& config)
    : model_(model), config_(config), optimizer_(config.lr, config.momentum) {
  config_.validate();
}

void Trainer::skip(const std::string& why) {
  ++consecutive_skips_;
  ++total_skips_;
  std::cerr << "warning: skipping update (" << why << "), " << consecutive_skips_
            << " consecutive\n";
  model_.params().zero_grad();
  if (consecutive_skips_ >= kMaxConsecutiveSkips) {
    throw DivergenceError("training diverged: " + std::to_string(consecutive_skips_) +
                          " consecutive non-finite steps");
  }
}

StepResult Trainer::train_step(std::span<const Example* const> batch) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  ParameterStore& params = model_.params();
  params.zero_grad();

  std::size_t tokens = 0;
  for (const Example* ex : batch) tokens += ex->target.size();
  const double inv_tokens = 1.0 / static_cast<double>(tokens);

  double total = 0.0;
  for (const Example* ex : batch) {
    Tape tape;
    Var loss = model_.nll(tape, ex->input, ex->target);
    total += loss.value()[0];
    tape.backward(loss, inv_tokens);
  }

  StepResult result;
  result.loss = total * inv_tokens;
  if (!std::isfinite(result.loss)) {
    skip("non-finite loss");
    return result;
  }
  result.grad_norm = clip_grad_norm(params, config_.clip_norm);
  if (!optimizer_.step(params)) {
    skip("non-finite gradient");
    return result;
  }
  result.applied = true;
  consecutive_skips_ = 0;
  return result;
}

// ---------------------------------------------------------------- evaluation

Perplexity evaluate_perplexity(model::CosegModel& model, std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("perplexity of an empty set");
  Perplexity out;
  for (const auto& ex : examples) {
    Tape tape;
    out.total_nll += model.nll(tape, ex.input, ex.target).value()[0];
    out.tokens += ex.target.size();
  }
  out.ppl = std::exp(out.total_nll / static_cast<double>(out.tokens));
  return out;
}

double validate(model::CosegModel& model, std::span<const Example> examples) {
  return evaluate_perplexity(model, examples).ppl;
}

std::vector<std::vector<const Example*>> make_batches(std::span<const Example> examples,
                                                      std::size_t batch_size, std::uint64_t seed,
                                                      std::size_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  std::vector<const Example*> order;
  order.reserve(examples.size());
  for (const auto& ex : examples) order.push_back(&ex);

  Rng rng(seed * 1000003ULL + epoch);
  rng.shuffle(std::span<const Example*>(order));
  std::stable_sort(order.begin(), order.end(), [](const Example* a, const Example* b) {
    return a->context_length() / kBucketWidth < b->context_length() / kBucketWidth;
  });

  std::vector<std::vector<const Example*>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(end));
  }
  rng.shuffle(std::span<std::vector<const Example*>>(batches));
  return batches;
}

// ---------------------------------------------------------------- checkpoints

std::string run_config_text(const model::ModelConfig& model, const TrainConfig& train,
                            const KeyValues& extra) {
  KeyValues kv = extra;
  model.write(kv);
  train.write(kv);
  return format_key_values(kv);
}

void save_model_checkpoint(const std::filesystem::path& path, const model::CosegModel& model,
                           const TrainConfig& train, const KeyValues& extra,
                           const std::optional<TrainerState>& state) {
  Checkpoint ckpt;
  ckpt.config_text = run_config_text(model.config(), train, extra);
  for (const auto& p : model.params()) ckpt.blocks.emplace_back(kParamPrefix + p->name, p->value);
  if (state) {
    for (const auto& p : model.params()) {
      ckpt.blocks.emplace_back(kVelocityPrefix + p->name, p->velocity);
    }
    ckpt.blocks.emplace_back(
        kStateBlock,
        Tensor::vector({static_cast<double>(state->epoch), state->lr, state->best_val_ppl,
                        static_cast<double>(state->best_epoch), static_cast<double>(state->bad_epochs),
                        static_cast<double>(state->consecutive_skips),
                        static_cast<double>(state->total_skips), state->initial_val_ppl}));
  }
  write_checkpoint(path, ckpt);
}

LoadedModel load_model_checkpoint(const std::filesystem::path& path) {
  Checkpoint ckpt = read_checkpoint(path);
  KeyValues kv = parse_key_values(ckpt.config_text, path.string());
  model::ModelConfig mc = model::ModelConfig::read(kv);
  TrainConfig tc = TrainConfig::read(kv);
  LoadedModel out{model::CosegModel(mc, tc.seed), tc, kv, std::nullopt};
  for (auto& p : out.model.params()) {
    const Tensor* t = ckpt.find(kParamPrefix + p->name);
    if (!t) throw InputError(path.string() + ": missing parameter block " + p->name);
    if (!t->same_shape(p->value)) {
      throw InputError(path.string() + ": parameter " + p->name + " has shape " +
                       t->shape_string() + ", expected " + p->value.shape_string());
    }
    p->value = *t;
    if (const Tensor* v = ckpt.find(kVelocityPrefix + p->name)) p->velocity = *v;
  }
  if (const Tensor* s = ckpt.find(kStateBlock)) {
    if (s->size() != 8) throw InputError(path.string() + ": malformed trainer state");
    TrainerState st;
    st.epoch = static_cast<std::size_t>((*s)[0]);
    st.lr = (*s)[1];
    st.best_val_ppl = (*s)[2];
    st.best_epoch = static_cast<std::size_t>((*s)[3]);
    st.bad_epochs = static_cast<std::size_t>((*s)[4]);
    st.consecutive_skips = static_cast<std::size_t>((*s)[5]);
    st.total_skips = static_cast<std::size_t>((*s)[6]);
    st.initial_val_ppl = (*s)[7];
    out.state = st;
  }
  return out;
}

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "epoch,train_loss,val_ppl,lr,wall_seconds\n";
  for (const auto& e : log) {
    f << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_ppl) << ','
      << format_double(e.lr) << ',' << format_double(e.wall_seconds) << '\n';
  }
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::vector<EpochLog> read_training_log(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  std::vector<EpochLog> out;
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 5) throw InputError(path.string() + ": malformed log row");
    out.push_back(EpochLog{parse_size(cols[0], "epoch"), parse_double(cols[1], "train_loss"),
                           parse_double(cols[2], "val_ppl"), parse_double(cols[3], "lr"),
                           parse_double(cols[4], "wall_seconds")});
  }
  return out;
}

// ---------------------------------------------------------------- fit

FitResult fit(model::CosegModel& model, std::span<const Example> train,
              std::span<const Example> val, const TrainConfig& config, const FitOptions& options) {
  config.validate();
  if (val.empty()) throw std::invalid_argument("fit: empty validation set");
  std::filesystem::create_directories(options.out_dir);

  FitResult result;
  result.best_checkpoint = options.out_dir / "best.ckpt";
  result.last_checkpoint = options.out_dir / "last.ckpt";
  const auto log_path = options.out_dir / "train_log.csv";

  Trainer trainer(model, config);
  TrainerState state;
  state.lr = config.lr;

  if (options.resume) {
    LoadedModel loaded = load_model_checkpoint(result.last_checkpoint);
    if (!loaded.state) throw InputError(result.last_checkpoint.string() + ": no trainer state to resume");
    model.params().copy_values_from(loaded.model.params());
    for (auto& p : model.params()) p->velocity = loaded.model.params().get(p->name).velocity;
    state = *loaded.state;
    trainer.set_lr(state.lr);
    trainer.restore_skip_counters(state.consecutive_skips, state.total_skips);
    for (const auto& row : read_training_log(log_path)) {
      if (row.epoch <= state.epoch) result.log.push_back(row);
    }
  } else {
    model.params().zero_velocity();
    const auto t0 = std::chrono::steady_clock::now();
    state.initial_val_ppl = validate(model, val);
    state.best_val_ppl = state.initial_val_ppl;
    const double train_loss = train.empty() ? 0.0 : std::log(validate(model, train));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(EpochLog{0, train_loss, state.initial_val_ppl, state.lr, secs});
    save_model_checkpoint(result.best_checkpoint, model, config, options.extra_config);
    save_model_checkpoint(result.last_checkpoint, model, config, options.extra_config, state);
    write_training_log(log_path, result.log);
  }

  const std::size_t first_epoch = state.epoch + 1;
  for (std::size_t epoch = first_epoch; epoch <= config.epochs; ++epoch) {
    if (state.bad_epochs >= config.patience) {
      result.early_stopped = true;
      break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    double loss_tokens = 0.0;
    std::size_t tokens = 0;
    for (const auto& batch : make_batches(train, config.batch_size, config.seed, epoch)) {
      StepResult step = trainer.train_step(batch);
      if (!step.applied) continue;
      std::size_t n = 0;
      for (const Example* ex : batch) n += ex->target.size();
      loss_tokens += step.loss * static_cast<double>(n);
      tokens += n;
    }
    const double ppl = validate(model, val);
    if (!std::isfinite(ppl)) {
      throw DivergenceError("validation perplexity is not finite after epoch " + std::to_string(epoch));
    }
    const double epoch_lr = trainer.lr();
    if (ppl < state.best_val_ppl) {
      state.best_val_ppl = ppl;
      state.best_epoch = epoch;
      state.bad_epochs = 0;
      save_model_checkpoint(result.best_checkpoint, model, config, options.extra_config);
    } else {
      ++state.bad_epochs;
      trainer.set_lr(trainer.lr() * config.lr_decay);
    }
    state.epoch = epoch;
    state.lr = trainer.lr();
    state.consecutive_skips = trainer.consecutive_skips();
    state.total_skips = trainer.total_skips();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(EpochLog{epoch, tokens ? loss_tokens / static_cast<double>(tokens) : 0.0,
                                  ppl, epoch_lr, secs});
    save_model_checkpoint(result.last_checkpoint, model, config, options.extra_config, state);
    write_training_log(log_path, result.log);
  }
  if (state.bad_epochs >= config.patience && state.epoch < config.epochs) result.early_stopped = true;

  result.initial_val_ppl = state.initial_val_ppl;
  result.best_val_ppl = state.best_val_ppl;
  result.best_epoch = state.best_epoch;
  result.epochs_run = state.epoch;
  return result;
}

}  // namespace coseg::training
