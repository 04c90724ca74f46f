#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coseg/config_file.hpp"
#include "coseg/error.hpp"
#include "coseg/model/coseg_model.hpp"
#include "coseg/numerics/optimizer.hpp"
#include "coseg/training/example.hpp"

namespace coseg::training {

struct TrainConfig {
  double lr = 0.1;
  double momentum = 0.9;
  double clip_norm = 5.0;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  std::size_t patience = 3;
  /// Factor applied to lr after an epoch that does not improve validation PPL.
  double lr_decay = 0.5;
  std::size_t min_count = 2;

  void validate() const;
  void write(KeyValues& kv) const;
  static TrainConfig read(const KeyValues& kv);
};

/// Thrown after three consecutive non-finite steps, or when validation
/// perplexity stops being finite.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct StepResult {
  double loss = 0.0;  // per-token mean before the update
  bool applied = false;
  double grad_norm = 0.0;
};

/// Owns the optimizer state for one model.
class Trainer {
 public:
  static constexpr std::size_t kMaxConsecutiveSkips = 3;

  Trainer(model::CosegModel& model, const TrainConfig& config);

  /// Forward, per-token mean cross-entropy, backward, clip, momentum update.
  /// A non-finite loss or gradient skips the update; the third consecutive
  /// skip throws DivergenceError.
  StepResult train_step(std::span<const Example* const> batch);

  double lr() const { return optimizer_.lr(); }
  void set_lr(double lr) { optimizer_.set_lr(lr); }
  std::size_t consecutive_skips() const { return consecutive_skips_; }
  std::size_t total_skips() const { return total_skips_; }
  void restore_skip_counters(std::size_t consecutive, std::size_t total) {
    consecutive_skips_ = consecutive;
    total_skips_ = total;
  }

 private:
  void skip(const std::string& why);

  model::CosegModel& model_;
  TrainConfig config_;
  MomentumSgd optimizer_;
  std::size_t consecutive_skips_ = 0;
  std::size_t total_skips_ = 0;
};

struct Perplexity {
  double ppl = 0.0;
  double total_nll = 0.0;
  std::size_t tokens = 0;
};

/// Teacher-forced perplexity exp(total NLL / total target tokens).
/// Throws std::invalid_argument for an empty set.
Perplexity evaluate_perplexity(model::CosegModel& model, std::span<const Example> examples);
double validate(model::CosegModel& model, std::span<const Example> examples);

/// Shuffles with (seed, epoch), groups by context-length bucket, cuts
/// batches and shuffles the batch order.
std::vector<std::vector<const Example*>> make_batches(std::span<const Example> examples,
                                                      std::size_t batch_size, std::uint64_t seed,
                                                      std::size_t epoch);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_ppl = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
};

struct FitOptions {
  std::filesystem::path out_dir;
  bool resume = false;
  /// Extra `key = value` entries stored in checkpoints (e.g. data paths).
  KeyValues extra_config;
};

struct FitResult {
  double initial_val_ppl = 0.0;
  double best_val_ppl = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  std::vector<EpochLog> log;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
};

/// Epoch loop with per-epoch validation. Writes `best.ckpt` (lowest
/// validation PPL), `last.ckpt` (resumable state) and `train_log.csv` in
/// `out_dir`. With `resume`, continues from `last.ckpt`.
FitResult fit(model::CosegModel& model, std::span<const Example> train,
              std::span<const Example> val, const TrainConfig& config, const FitOptions& options);

// Checkpointing.

struct TrainerState {
  std::size_t epoch = 0;
  double lr = 0.0;
  double best_val_ppl = 0.0;
  std::size_t best_epoch = 0;
  std::size_t bad_epochs = 0;
  std::size_t consecutive_skips = 0;
  std::size_t total_skips = 0;
  double initial_val_ppl = 0.0;
};

/// Model + train config as one `key = value` document.
std::string run_config_text(const model::ModelConfig& model, const TrainConfig& train,
                            const KeyValues& extra = {});

void save_model_checkpoint(const std::filesystem::path& path, const model::CosegModel& model,
                           const TrainConfig& train, const KeyValues& extra = {},
                           const std::optional<TrainerState>& state = std::nullopt);

struct LoadedModel {
  model::CosegModel model;
  TrainConfig train;
  KeyValues config;
  std::optional<TrainerState> state;
};

LoadedModel load_model_checkpoint(const std::filesystem::path& path);

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);
std::vector<EpochLog> read_training_log(const std::filesystem::path& path);

}  // namespace coseg::training
