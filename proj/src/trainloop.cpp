#include <chrono>
#include <cmath>
#include <sstream>

#include "speechkit/trainloop.hpp"

namespace speechkit::train {

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::Train: return "TRAIN";
    case Stage::Valid: return "VALID";
    case Stage::Test: return "TEST";
  }
  return "?";
}

DataPlan DataPlan::fixed(const data::Pipeline& pipeline, data::BatchPlan plan,
                         std::vector<std::string> numeric_keys) {
  DataPlan dp;
  dp.pipeline = &pipeline;
  dp.make_plan = [plan = std::move(plan)](std::int64_t) { return plan; };
  dp.numeric_keys = std::move(numeric_keys);
  return dp;
}

data::PaddedBatch assemble_batch(const data::Pipeline& pipeline,
                                 const std::vector<std::string>& ids,
                                 const std::vector<std::string>& numeric_keys) {
  std::vector<data::Example> examples;
  examples.reserve(ids.size());
  for (const auto& id : ids) examples.push_back(pipeline.evaluate(id));
  return data::pad_batch(examples, numeric_keys);
}

double fit_batch(Program& program, TrainState& state, const data::PaddedBatch& batch,
                 const SgdOptions& sgd) {
  data::Tensor predictions = program.compute_forward(batch, Stage::Train, state.parameters);
  Objective objective =
      program.compute_objectives(predictions, batch, Stage::Train, state.parameters);
  if (objective.gradient.size() != state.parameters.size()) {
    throw Error("fit_batch: gradient length " + std::to_string(objective.gradient.size()) +
                " does not match parameter length " + std::to_string(state.parameters.size()));
  }
  if (!std::isfinite(objective.loss)) {
    throw Error("non-finite loss at step " + std::to_string(state.global_step));
  }
  for (std::size_t i = 0; i < state.parameters.size(); ++i) {
    state.parameters[i] -= sgd.learning_rate * objective.gradient[i];
  }
  state.global_step += 1;
  return objective.loss;
}

StageStats evaluate(Program& program, const DataPlan& plan, Stage stage, const TrainState& state,
                    std::int64_t epoch) {
  data::BatchPlan batches = plan.make_plan(epoch);
  StageStats stats;
  double loss_sum = 0;
  for (const auto& ids : batches.batches) {
    data::PaddedBatch batch = assemble_batch(*plan.pipeline, ids, plan.numeric_keys);
    data::Tensor predictions = program.compute_forward(batch, stage, state.parameters);
    Objective objective = program.compute_objectives(predictions, batch, stage, state.parameters);
    loss_sum += objective.loss;
    ++stats.batches;
  }
  stats.avg_loss = stats.batches ? loss_sum / static_cast<double>(stats.batches) : 0;
  return stats;
}

namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ",";
    out += id;
  }
  return out;
}

}  // namespace

TrainState fit(Program& program, std::int64_t n_epochs, const DataPlan& train,
               const std::optional<DataPlan>& valid, const SgdOptions& sgd,
               const FitOptions& options) {
  if (!train.pipeline || !train.make_plan) throw Error("fit: train plan is not set up");

  TrainState state;
  state.parameters = program.initial_parameters();
  {
    Rng rng(options.seed);
    state.rng_state = rng.serialize();
  }

  const bool checkpointing = !options.checkpoint_dir.empty();
  if (checkpointing) {
    if (auto latest = recover_latest_checkpoint(options.checkpoint_dir)) {
      state = load_checkpoint_state(*latest);
      log_info("resuming from checkpoint " + latest->dir.string() + " (epoch " +
               std::to_string(state.epoch) + ", step " + std::to_string(state.global_step) + ")");
    }
  }

  auto last_save = std::chrono::steady_clock::now();
  auto due_for_periodic_save = [&]() {
    if (!checkpointing) return false;
    if (options.checkpoint_interval_steps > 0) {
      return state.global_step > 0 &&
             static_cast<std::uint64_t>(state.global_step) % options.checkpoint_interval_steps == 0;
    }
    return std::chrono::steady_clock::now() - last_save >= options.checkpoint_interval;
  };
  auto save = [&](const SmallMap<double>& metrics) {
    save_checkpoint(state, options.checkpoint_dir, metrics, options.keep_recent);
    last_save = std::chrono::steady_clock::now();
  };

  while (state.epoch < n_epochs) {
    std::int64_t epoch = state.epoch;
    data::BatchPlan plan = train.make_plan(epoch);
    program.on_stage_start(Stage::Train, epoch);

    for (std::size_t b = state.batch_index; b < plan.batches.size(); ++b) {
      const std::vector<std::string>& ids = plan.batches[b];
      data::PaddedBatch batch = assemble_batch(*train.pipeline, ids, train.numeric_keys);
      double loss;
      try {
        loss = fit_batch(program, state, batch, sgd);
      } catch (const Error& e) {
        throw Error(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", step " +
                    std::to_string(state.global_step) + ", batch ids " + join_ids(ids) + ")");
      }
      state.batch_index = b + 1;
      state.epoch_loss_sum += loss;
      state.epoch_loss_count += 1;

      if (due_for_periodic_save()) {
        SmallMap<double> metrics;
        metrics.insert("train_loss_running",
                       state.epoch_loss_sum / static_cast<double>(state.epoch_loss_count));
        save(metrics);
      }
      if (options.max_steps > 0 && static_cast<std::uint64_t>(state.global_step) >= options.max_steps) {
        return state;  // early stop for fault-tolerance tests
      }
    }

    StageStats train_stats;
    train_stats.batches = state.epoch_loss_count;
    train_stats.avg_loss = state.epoch_loss_count
                               ? state.epoch_loss_sum / static_cast<double>(state.epoch_loss_count)
                               : 0;
    program.on_stage_end(Stage::Train, epoch, train_stats);

    SmallMap<double> metrics;
    metrics.insert("train_loss", train_stats.avg_loss);
    if (valid) {
      program.on_stage_start(Stage::Valid, epoch);
      StageStats valid_stats = evaluate(program, *valid, Stage::Valid, state, epoch);
      program.on_stage_end(Stage::Valid, epoch, valid_stats);
      metrics.insert("valid_loss", valid_stats.avg_loss);
    }

    state.epoch = epoch + 1;
    state.batch_index = 0;
    state.epoch_loss_sum = 0;
    state.epoch_loss_count = 0;
    if (checkpointing) save(metrics);  // end-of-epoch checkpoint, always on
  }
  return state;
}

LinearProgram::LinearProgram(std::size_t in_dim, std::size_t out_dim, std::uint64_t init_seed)
    : in_dim_(in_dim), out_dim_(out_dim), init_seed_(init_seed) {}

std::vector<double> LinearProgram::initial_parameters() const {
  std::vector<double> params(in_dim_ * out_dim_, 0.0);
  if (init_seed_ != 0) {
    Rng rng(init_seed_);
    for (double& p : params) p = rng.uniform() - 0.5;
  }
  return params;
}

data::Tensor LinearProgram::compute_forward(const data::PaddedBatch& batch, Stage,
                                            std::span<const double> parameters) {
  const data::PaddedKey* input = batch.numeric.find("input");
  if (!input) throw Error("LinearProgram: batch lacks numeric key 'input'");
  const data::Tensor& x = input->data;
  if (x.shape.size() != 2 || x.shape[1] != in_dim_) {
    throw Error("LinearProgram: input must be [B, " + std::to_string(in_dim_) + "]");
  }
  std::size_t batch_size = x.shape[0];
  data::Tensor preds{{batch_size, out_dim_}, std::vector<double>(batch_size * out_dim_, 0.0)};
  for (std::size_t b = 0; b < batch_size; ++b) {
    for (std::size_t o = 0; o < out_dim_; ++o) {
      double acc = 0;
      for (std::size_t i = 0; i < in_dim_; ++i) {
        acc += parameters[o * in_dim_ + i] * x.data[b * in_dim_ + i];
      }
      preds.data[b * out_dim_ + o] = acc;
    }
  }
  return preds;
}

Objective LinearProgram::compute_objectives(const data::Tensor& predictions,
                                            const data::PaddedBatch& batch, Stage,
                                            std::span<const double>) {
  const data::PaddedKey* target = batch.numeric.find("target");
  if (!target) throw Error("LinearProgram: batch lacks numeric key 'target'");
  const data::Tensor& t = target->data;
  const data::PaddedKey& input = *batch.numeric.find("input");
  const data::Tensor& x = input.data;
  if (t.shape != predictions.shape) throw Error("LinearProgram: target/prediction shape mismatch");

  std::size_t batch_size = predictions.shape[0];
  double denom = static_cast<double>(batch_size * out_dim_);
  Objective objective;
  objective.gradient.assign(in_dim_ * out_dim_, 0.0);
  for (std::size_t b = 0; b < batch_size; ++b) {
    for (std::size_t o = 0; o < out_dim_; ++o) {
      double err = predictions.data[b * out_dim_ + o] - t.data[b * out_dim_ + o];
      objective.loss += std::abs(err);
      double sign = err > 0 ? 1.0 : (err < 0 ? -1.0 : 0.0);
      for (std::size_t i = 0; i < in_dim_; ++i) {
        objective.gradient[o * in_dim_ + i] += sign * x.data[b * in_dim_ + i] / denom;
      }
    }
  }
  objective.loss /= denom;
  return objective;
}

}  // namespace speechkit::train
