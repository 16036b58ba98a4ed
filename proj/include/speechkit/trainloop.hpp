#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "speechkit/batching.hpp"
#include "speechkit/common.hpp"

namespace speechkit::train {

enum class Stage { Train, Valid, Test };

std::string stage_name(Stage stage);

struct StageStats {
  double avg_loss = 0;
  std::size_t batches = 0;
};

struct Objective {
  double loss = 0;
  std::vector<double> gradient;  // w.r.t. the flat parameter vector
};

/// User-defined computations plugged into the loop. Valid/Test stages
/// never update parameters.
class Program {
 public:
  virtual ~Program() = default;

  virtual std::vector<double> initial_parameters() const = 0;

  virtual data::Tensor compute_forward(const data::PaddedBatch& batch, Stage stage,
                                       std::span<const double> parameters) = 0;

  virtual Objective compute_objectives(const data::Tensor& predictions,
                                       const data::PaddedBatch& batch, Stage stage,
                                       std::span<const double> parameters) = 0;

  virtual void on_stage_start(Stage, std::int64_t /*epoch*/) {}
  virtual void on_stage_end(Stage, std::int64_t /*epoch*/, const StageStats&) {}
};

/// Full training position; serialization round-trips exactly.
struct TrainState {
  std::int64_t epoch = 0;        // epoch currently in progress (or next)
  std::int64_t global_step = 0;
  std::uint64_t batch_index = 0;  // next batch within the current epoch
  std::vector<double> parameters;
  std::vector<double> optimizer_state;  // empty for plain SGD
  std::string rng_state;
  double epoch_loss_sum = 0;  // running train-loss accumulator
  std::uint64_t epoch_loss_count = 0;
};

struct SgdOptions {
  double learning_rate = 0.1;
};

/// One stage's data: a pipeline plus a per-epoch batch plan. `make_plan`
/// must be a pure function of the epoch index so that mid-epoch resumes
/// regenerate the same order.
struct DataPlan {
  const data::Pipeline* pipeline = nullptr;
  std::function<data::BatchPlan(std::int64_t epoch)> make_plan;
  std::vector<std::string> numeric_keys;

  static DataPlan fixed(const data::Pipeline& pipeline, data::BatchPlan plan,
                        std::vector<std::string> numeric_keys);
};

struct FitOptions {
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint_dir;        // empty: checkpointing off
  std::chrono::seconds checkpoint_interval{15 * 60};
  std::uint64_t checkpoint_interval_steps = 0;  // > 0: step-based (test mode)
  std::uint64_t max_steps = 0;                  // > 0: stop after N steps (fault testing)
  std::size_t keep_recent = 2;
};

/// Single SGD update: parameters -= lr * gradient, global_step += 1.
/// Returns the loss before the update.
double fit_batch(Program& program, TrainState& state, const data::PaddedBatch& batch,
                 const SgdOptions& sgd);

/// Epoch loop: per epoch a TRAIN pass with updates, then a VALID pass
/// without. Resumes from the latest checkpoint in checkpoint_dir when
/// one exists.
TrainState fit(Program& program, std::int64_t n_epochs, const DataPlan& train,
               const std::optional<DataPlan>& valid, const SgdOptions& sgd,
               const FitOptions& options);

/// Loss over a plan without updates.
StageStats evaluate(Program& program, const DataPlan& plan, Stage stage, const TrainState& state,
                    std::int64_t epoch);

/// Assembles one padded batch by evaluating the pipeline for `ids`.
data::PaddedBatch assemble_batch(const data::Pipeline& pipeline,
                                 const std::vector<std::string>& ids,
                                 const std::vector<std::string>& numeric_keys);

// ── Checkpointing ───────────────────────────────────────────────────────────

struct Checkpoint {
  std::filesystem::path dir;
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  std::int64_t unix_time_ns = 0;
  SmallMap<double> metrics;
};

/// Writes `CKPT+<iso8601>/{state.bin, meta.yaml}` under `parent`,
/// atomically (temp dir + rename). Retention keeps the most recent
/// `keep_recent` checkpoints plus per-metric extremes.
Checkpoint save_checkpoint(const TrainState& state, const std::filesystem::path& parent,
                           const SmallMap<double>& metrics, std::size_t keep_recent = 2);

std::vector<Checkpoint> list_checkpoints(const std::filesystem::path& parent);

/// Latest by (epoch, step, wall clock); nullopt when none exist.
std::optional<Checkpoint> recover_latest_checkpoint(const std::filesystem::path& parent);

/// Extremal recorded metric, latest wins on ties. Throws when no
/// checkpoint records the metric.
enum class BestDirection { Min, Max };
Checkpoint find_best_checkpoint(const std::filesystem::path& parent, const std::string& metric,
                                BestDirection direction);

TrainState load_checkpoint_state(const Checkpoint& ckpt);

// ── Bundled reference program ───────────────────────────────────────────────

/// Linear model y = W x with mean L1 loss; parameters are W flattened
/// row-major [out_dim x in_dim]. Batches must carry numeric keys
/// `input` [B, in_dim] and `target` [B, out_dim].
class LinearProgram : public Program {
 public:
  LinearProgram(std::size_t in_dim, std::size_t out_dim, std::uint64_t init_seed = 0);

  std::vector<double> initial_parameters() const override;
  data::Tensor compute_forward(const data::PaddedBatch& batch, Stage stage,
                               std::span<const double> parameters) override;
  Objective compute_objectives(const data::Tensor& predictions, const data::PaddedBatch& batch,
                               Stage stage, std::span<const double> parameters) override;

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::uint64_t init_seed_;
};

}  // namespace speechkit::train
