#include "goalnet/train.hpp"

#include <cmath>
#include <numeric>

namespace goalnet {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr > 0)) throw InvalidInput("lr must be positive");
  if (decay_factor <= 0 || decay_factor > 1) throw InvalidInput("decay factor must be in (0,1]");
  if (max_epochs < 0) throw InvalidInput("max epochs must be non-negative");
  if (p_symsim < 0 || p_symsim > 1) throw InvalidInput("teacher-forcing probability must be in [0,1]");
  if (patience < 1) throw InvalidInput("patience must be at least 1");
  if (augment < 0 || augment > 1) throw InvalidInput("augmentation budget must be in [0,1]");
  if (snapshot_every < 0) throw InvalidInput("snapshot period must be non-negative");
}

json TrainConfig::to_json() const {
  return {{"lr", lr},
          {"decay_factor", decay_factor},
          {"decay_every", decay_every},
          {"max_epochs", max_epochs},
          {"p_symsim", p_symsim},
          {"seed", seed},
          {"patience", patience},
          {"augment", augment},
          {"snapshot_every", snapshot_every}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.decay_factor = j.value("decay_factor", c.decay_factor);
  c.decay_every = j.value("decay_every", c.decay_every);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.p_symsim = j.value("p_symsim", c.p_symsim);
  c.seed = j.value("seed", c.seed);
  c.patience = j.value("patience", c.patience);
  c.augment = j.value("augment", c.augment);
  c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
  c.validate();
  return c;
}

namespace {

DatumInputs inputs_for(const GoalNet& net, const Demonstration& d, const Lexicon& lex) {
  return prepare_inputs(d.universe(), d.instruction, d.grounding.empty() ? nullptr : &d.grounding,
                        lex, net.config(), d.id);
}

}  // namespace

double validation_loss(const GoalNet& net, const std::vector<const Demonstration*>& demos,
                       const Lexicon& lex) {
  if (demos.empty()) return 0;
  double total = 0;
  for (const auto* d : demos) {
    auto in = inputs_for(net, *d, lex);
    auto sup = extract_supervision(*d);
    Episode ep(net, in, false);
    for (std::size_t j = 0; j < sup.size(); ++j) {
      ep.step(d->states[j], j ? &sup[j - 1] : nullptr, &sup[j], nullptr);
    }
    total += double(ep.loss());
  }
  return total / double(demos.size());
}

TrainResult train(GoalNet& net, const std::vector<const Demonstration*>& train_set,
                  const std::vector<const Demonstration*>& val_set, const Lexicon& lex,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (train_set.empty()) throw InvalidInput("empty training split");

  // Inputs do not change across epochs.
  std::vector<DatumInputs> inputs;
  std::vector<std::vector<GoalSpec>> sups;
  for (const auto* d : train_set) {
    inputs.push_back(inputs_for(net, *d, lex));
    sups.push_back(extract_supervision(*d));
  }

  nn::AdamConfig ac;
  ac.lr = cfg.lr;
  ac.decay_factor = cfg.decay_factor;
  ac.decay_every = cfg.decay_every;
  nn::Adam adam(net.params(), ac);

  std::mt19937_64 order_rng(cfg.seed), mix_rng(cfg.seed ^ 0x5eedf00dULL),
      noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::bernoulli_distribution self_rollout(cfg.p_symsim);

  TrainResult res;
  res.best = net.params();
  res.best_val_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double total = 0;
    for (std::size_t k : order) {
      const Demonstration& d = *train_set[k];
      const auto& sup = sups[k];
      Episode ep(net, inputs[k], true);
      WorldState cur = d.states[0];
      GoalSpec prev;
      for (std::size_t j = 0; j < sup.size(); ++j) {
        if (hooks.on_step) hooks.on_step(d, j, cur);
        auto pred = ep.step(cur, j ? &prev : nullptr, &sup[j], &noise_rng);
        if (j + 1 == sup.size()) break;
        bool fed_own = false;
        if (self_rollout(mix_rng)) {
          try {
            GoalSpec g = pred.goal();
            cur = symsim_step(cur, g);
            prev = g;
            fed_own = true;
          } catch (const Error&) {
            // an ungrammatical prediction (grammar-mask ablation) cannot be
            // simulated; fall back to the recorded state
          }
        }
        if (!fed_own) {
          cur = d.states[j + 1];
          prev = sup[j];
        }
      }
      double loss = double(ep.loss());
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " on demo " +
                           d.id);
      }
      net.params().zero_grad();
      ep.backward(net);
      if (!net.params().finite()) {
        throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) + " on demo " +
                           d.id);
      }
      adam.step(net.params());
      total += loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / double(train_set.size());
    rec.val_loss = val_set.empty() ? rec.train_loss : validation_loss(net, val_set, lex);
    rec.lr = double(adam.lr());
    if (!std::isfinite(rec.val_loss)) {
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    rec.improved = rec.val_loss < res.best_val_loss;
    if (rec.improved) {
      res.best_val_loss = rec.val_loss;
      res.best_epoch = epoch;
      res.best = net.params();
      stale = 0;
    } else {
      ++stale;
    }
    adam.end_epoch(epoch);
    res.history.push_back(rec);
    res.epochs_run = epoch;

    if (hooks.log) {
      json line = {{"epoch", rec.epoch},       {"train_loss", rec.train_loss},
                   {"val_loss", rec.val_loss}, {"lr", rec.lr},
                   {"improved", rec.improved}};
      if (hooks.snapshot && cfg.snapshot_every > 0 && epoch % cfg.snapshot_every == 0) {
        line.update(hooks.snapshot(net, epoch));
      }
      *hooks.log << line.dump() << "\n" << std::flush;
    }
    if (stale >= cfg.patience) {
      res.early_stopped = true;
      break;
    }
  }
  for (auto& t : res.best.tensors()) std::fill(t.grad.begin(), t.grad.end(), 0.0);
  return res;
}

}  // namespace goalnet
