#pragma once

// Supervised training of the constraint predictor on demonstrations, mixing
// teacher forcing with SymSim self-rollout.

#include <functional>
#include <ostream>

#include "goalnet/data.hpp"
#include "goalnet/model.hpp"

namespace goalnet {

struct TrainConfig {
  double lr = 5e-4;
  double decay_factor = 0.2;
  int decay_every = 50;
  int max_epochs = 100;
  double p_symsim = 0.2;  // chance a step feeds symsim_step of the prediction
  std::uint64_t seed = 0;
  int patience = 15;      // epochs without validation improvement
  double augment = 0;     // semantic augmentation budget (fraction of train)
  int snapshot_every = 0; // metric snapshot period in epochs, 0 = never

  void validate() const;  // throws InvalidInput
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;  // mean per-demo episode loss
  double val_loss = 0;
  double lr = 0;
  bool improved = false;
};

struct TrainResult {
  nn::ParamSet best;  // parameters at the best validation loss
  int best_epoch = 0;
  double best_val_loss = 0;
  int epochs_run = 0;
  bool early_stopped = false;
  std::vector<EpochRecord> history;
};

struct TrainHooks {
  // One JSON line per epoch when set.
  std::ostream* log = nullptr;
  // Extra fields merged into the epoch record every snapshot_every epochs.
  std::function<nlohmann::json(const GoalNet&, int epoch)> snapshot;
  // Sees every state fed to the network: (demo, step, state).
  std::function<void(const Demonstration&, std::size_t, const WorldState&)> on_step;
};

// Mean teacher-forced loss per demo, no noise.
double validation_loss(const GoalNet& net, const std::vector<const Demonstration*>& demos,
                       const Lexicon& lex);

// Trains `net` in place (it ends at the last epoch's weights; the best are in
// the result). Throws NumericError on a non-finite loss.
TrainResult train(GoalNet& net, const std::vector<const Demonstration*>& train_set,
                  const std::vector<const Demonstration*>& val_set, const Lexicon& lex,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace goalnet
