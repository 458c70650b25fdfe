#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "goalnet/metrics.hpp"
#include "goalnet/run_config.hpp"
#include "goalnet/train.hpp"

using namespace goalnet;
using namespace fixtures;

namespace {

Lexicon lexicon() { return {&lex().table, &lex().encoder, &lex().aliases}; }

const std::vector<Demonstration>& fifty() {
  static auto d = synth_generate(both_domains(), 0, 50);
  return d;
}

std::vector<const Demonstration*> first(std::size_t n) {
  std::vector<const Demonstration*> out;
  for (std::size_t i = 0; i < n && i < fifty().size(); ++i) out.push_back(&fifty()[i]);
  return out;
}

}  // namespace

TEST_CASE("train config validation and round trip") {
  TrainConfig c;
  c.p_symsim = 0.35;
  c.seed = 12;
  auto back = TrainConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  TrainConfig bad;
  bad.p_symsim = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = {};
  bad.patience = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  GoalNet net(ModelConfig{}, 1);
  CHECK_THROWS_AS(train(net, {}, {}, lexicon(), TrainConfig{}), InvalidInput);
}

TEST_CASE("p = 0 feeds exactly the recorded states") {
  GoalNet net(ModelConfig{}, 2);
  TrainConfig c;
  c.max_epochs = 1;
  c.p_symsim = 0;
  int fed = 0, off = 0;
  TrainHooks hooks;
  hooks.on_step = [&](const Demonstration& d, std::size_t j, const WorldState& s) {
    ++fed;
    if (!(s == d.states[j])) ++off;
  };
  train(net, first(8), {}, lexicon(), c, hooks);
  int steps = 0;
  for (const auto* d : first(8)) steps += int(d->states.size());
  CHECK(fed == steps);
  CHECK(off == 0);

  // with p = 1 an untrained model drifts off the recorded trajectory
  GoalNet fresh(ModelConfig{}, 2);
  c.p_symsim = 1;
  off = 0;
  train(fresh, first(8), {}, lexicon(), c, hooks);
  CHECK(off > 0);
}

TEST_CASE("training loss decreases over the first ten epochs") {
  GoalNet net(ModelConfig{}, 0);
  TrainConfig c;
  c.max_epochs = 10;
  c.seed = 0;
  auto all = first(50);
  auto r = train(net, all, {}, lexicon(), c);
  REQUIRE(r.history.size() == 10);
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    CHECK_MESSAGE(r.history[e].train_loss < r.history[e - 1].train_loss, "epoch " << e + 1);
  }
}

TEST_CASE("overfitting one demonstration reproduces its aggregate predicates") {
  const Demonstration* demo = nullptr;
  for (const auto& d : fifty()) {
    if (d.instruction.rfind("gather", 0) == 0 || d.instruction.rfind("collect", 0) == 0) demo = &d;
  }
  REQUIRE(demo != nullptr);
  GoalNet net(ModelConfig{}, 4);
  TrainConfig c;
  c.max_epochs = 150;
  c.lr = 1e-3;
  c.patience = 150;
  auto r = train(net, {demo}, {}, lexicon(), c);
  GoalNet best(ModelConfig{}, r.best);
  auto rep = evaluate({demo}, model_rollout(best, lexicon(), PlannerConfig{4, 20000}));
  CHECK(rep.mean.grr == 1.0);
  CHECK(rep.mean.sji == 1.0);
  CHECK(rep.mean.ied == 1.0);
}

TEST_CASE("training is reproducible and keeps the best validation epoch") {
  auto run = [&](std::string* log) {
    GoalNet net(ModelConfig{}, 9);
    TrainConfig c;
    c.max_epochs = 3;
    c.seed = 9;
    std::ostringstream out;
    TrainHooks hooks;
    hooks.log = &out;
    auto r = train(net, first(10), {&fifty()[40], &fifty()[41]}, lexicon(), c, hooks);
    *log = out.str();
    return r;
  };
  std::string log1, log2;
  auto a = run(&log1), b = run(&log2);
  CHECK(log1 == log2);
  CHECK(std::count(log1.begin(), log1.end(), '\n') == 3);
  for (std::size_t i = 0; i < a.best.tensors().size(); ++i) {
    CHECK(a.best.tensors()[i].data == b.best.tensors()[i].data);
  }
  double lowest = 1e300;
  for (const auto& e : a.history) lowest = std::min(lowest, e.val_loss);
  CHECK(a.best_val_loss == lowest);
  CHECK(a.history[std::size_t(a.best_epoch - 1)].val_loss == lowest);
}

TEST_CASE("a non-finite loss aborts training") {
  GoalNet net(ModelConfig{}, 3);
  auto& goal_b = net.params()[net.params().index("goal.b")];
  goal_b.data[0] = std::nan("");
  TrainConfig c;
  c.max_epochs = 1;
  CHECK_THROWS_AS(train(net, first(2), {}, lexicon(), c), NumericError);
}

TEST_CASE("settings precedence: flags over environment over file over defaults") {
  using nlohmann::json;
  auto d = resolve_config(json(), {}, {});
  CHECK(d["lr"] == 5e-4);
  CHECK(d["p_symsim"] == 0.2);
  CHECK(d["max_epochs"] == 100);

  json file = {{"lr", 1e-3}, {"seed", 4}, {"history", "union"}};
  auto f = resolve_config(file, {}, {});
  CHECK(f["lr"] == 1e-3);
  CHECK(f["seed"] == 4);
  auto e = resolve_config(file, {{"seed", "5"}}, {});
  CHECK(e["seed"] == 5);
  CHECK(e["lr"] == 1e-3);
  auto g = resolve_config(file, {{"seed", "5"}}, {{"seed", "6"}, {"lr", "2e-3"}});
  CHECK(g["seed"] == 6);
  CHECK(g["lr"] == 2e-3);
  CHECK(g["history"] == "union");

  CHECK_THROWS_AS(resolve_config(json{{"bogus", 1}}, {}, {}), InvalidInput);
  CHECK_THROWS_AS(resolve_config(json{{"seed", "x"}}, {}, {}), InvalidInput);
  CHECK_THROWS_AS(resolve_config(json(), {{"seed", "1.5"}}, {}), InvalidInput);
  CHECK(resolve_config(json{{"lr", 1}}, {}, {})["lr"] == 1.0);

  std::string a = "GOALNET_SEED=8", b = "GOALNET_UNRELATED=1", c = "PATH=/bin";
  char* envp[] = {a.data(), b.data(), c.data(), nullptr};
  auto env = config_from_environment(envp);
  CHECK(env.size() == 1);
  CHECK(env.at("seed") == "8");
}
