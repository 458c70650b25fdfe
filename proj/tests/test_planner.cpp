#include <doctest.h>

#include "generators.hpp"

using namespace goalnet;
using namespace fixtures;

namespace {

std::shared_ptr<const Universe> mug_scene() {
  return universe(kitchen(), {"robot", "counter_0", "sink_0", "tap_0", "mug_0", "plate_0"});
}

std::vector<std::string> names(const std::vector<GroundedAction>& as, const Universe& u) {
  std::vector<std::string> out;
  for (const auto& a : as) out.push_back(format_action(a, u));
  return out;
}

}  // namespace

TEST_CASE("symsim_step") {
  auto lu = universe(livingroom(), {"robot", "beer_0", "table_0"});
  auto s = state(lu, {"OnTop(beer_0,table_0)"});
  CHECK(symsim_step(s, {}) == s);
  auto g = GoalSpec::make({pred(*lu, "ConnectedTo(beer_0,robot)")}, {});
  CHECK(symsim_step(s, g).holds(pred(*lu, "ConnectedTo(beer_0,robot)")));

  auto u = mug_scene();
  auto t = symsim_step(state(u, {}), GoalSpec::make({pred(*u, "stateIsOn(tap_0)")}, {}));
  CHECK(t.state_vec(u->require("tap_0")).test(std::size_t(kitchen()->state_index("IsOn"))));
}

TEST_CASE("symsim_step reproduces any target state from its diff") {
  std::mt19937_64 rng(11);
  auto u = mug_scene();
  for (int i = 0; i < 200; ++i) {
    auto a = gen::random_relations(u, rng, 0.1);
    auto b = gen::random_relations(u, rng, 0.1);
    REQUIRE(symsim_step(a, relation_diff(a, b)) == b);
    auto g = relation_diff(a, b);
    REQUIRE(symsim_step(symsim_step(a, g), g) == symsim_step(a, g));
  }
}

TEST_CASE("plan: move to the sink") {
  auto u = mug_scene();
  auto s = state(u, {"Near(robot,counter_0)", "OnTop(mug_0,counter_0)"});
  auto r = plan(s, GoalSpec::make({pred(*u, "Near(robot,sink_0)")}, {}));
  REQUIRE(r.ok());
  CHECK(names(r.actions, *u) == std::vector<std::string>{"MoveTo(robot,sink_0)"});
}

TEST_CASE("plan: grasp the mug from afar") {
  auto u = mug_scene();
  auto s = state(u, {"Near(robot,sink_0)", "OnTop(mug_0,counter_0)"});
  auto r = plan(s, GoalSpec::make({pred(*u, "ConnectedTo(mug_0,robot)")}, {}));
  REQUIRE(r.ok());
  CHECK(names(r.actions, *u) ==
        std::vector<std::string>{"MoveTo(robot,mug_0)", "Grasp(robot,mug_0)"});
  CHECK(goal_check(r.final_state, GoalSpec::make({pred(*u, "ConnectedTo(mug_0,robot)")}, {})));
}

TEST_CASE("plan: empty goal and failures") {
  auto u = mug_scene();
  auto s = state(u, {"Near(robot,sink_0)"});
  auto r = plan(s, {});
  CHECK(r.ok());
  CHECK(r.actions.empty());

  // Tap cannot be on top of anything.
  auto bad = GoalSpec::make({pred(*u, "OnTop(tap_0,counter_0)")}, {});
  auto f = plan(s, bad, PlannerConfig{3, 200000});
  CHECK(f.status == PlanStatus::kDepthExhausted);
  auto e = plan(s, bad, PlannerConfig{8, 5});
  CHECK(e.status == PlanStatus::kExpansionsExhausted);
  CHECK(e.expanded_nodes == 5);
  CHECK_THROWS_AS(plan(s, bad, PlannerConfig{0, 10}), InvalidInput);
}

TEST_CASE("plan: fill water in mug") {
  auto u = mug_scene();
  auto s = state(u, {"Near(robot,counter_0)", "OnTop(mug_0,counter_0)"});
  auto g = GoalSpec::make({pred(*u, "OnTop(mug_0,sink_0)"), pred(*u, "stateIsOn(tap_0)")}, {});
  auto r = plan(s, g);
  REQUIRE(r.ok());
  CHECK(r.actions.size() == 5);
  CHECK(goal_check(r.final_state, g));
}

TEST_CASE("plan results replay and are deterministic") {
  std::mt19937_64 rng(5);
  auto u = universe(kitchen(), {"robot", "counter_0", "sink_0", "fridge_0", "tap_0", "mug_0",
                                "plate_0", "kettle_0"});
  for (int i = 0; i < 40; ++i) {
    auto s = gen::random_state(u, rng, 3);
    auto g = gen::random_reachable_goal(s, rng, 1 + int(gen::pick(rng, 4)));
    auto r = plan(s, g);
    REQUIRE(r.ok());
    WorldState t = s;
    for (const auto& a : r.actions) t = apply_action(a, t);
    REQUIRE(t == r.final_state);
    REQUIRE(goal_check(t, g));
    REQUIRE(plan(s, g).actions == r.actions);
  }
}

TEST_CASE("plan length matches brute-force optimum") {
  std::mt19937_64 rng(17);
  auto u = universe(kitchen(), {"robot", "counter_0", "sink_0", "fridge_0", "tap_0", "mug_0",
                                "plate_0"});
  auto groundings = enumerate_groundings(*u);
  for (int i = 0; i < 25; ++i) {
    auto s = gen::random_state(u, rng, 2);
    auto g = gen::random_reachable_goal(s, rng, 1 + int(gen::pick(rng, 3)));
    auto r = plan(s, g);
    REQUIRE(r.ok());
    REQUIRE(int(r.actions.size()) == gen::brute_force_optimum(s, g, groundings, 4));
  }
}

TEST_CASE("rollout_execute") {
  auto u = mug_scene();
  auto s0 = state(u, {"Near(robot,counter_0)", "OnTop(mug_0,counter_0)"});

  auto stop = rollout_execute(s0, [](const WorldState&, int) { return GoalSpec{}; });
  CHECK(stop.actions.empty());
  CHECK(stop.states.size() == 1);
  CHECK(stop.states[0] == s0);
  CHECK(stop.stopped);

  int calls = 0;
  auto never = rollout_execute(s0, [&](const WorldState& s, int t) {
    ++calls;
    ObjIndex target = ObjIndex(1 + t % (int(s.object_count()) - 1));
    if (target == s.universe().robot()) target = 1;
    return GoalSpec::make({Predicate{std::uint8_t(s.schema().relation_index("Near")),
                                     s.universe().robot(), target}}, {});
  });
  CHECK(calls == 30);
  CHECK(never.steps.size() == 30);
  CHECK_FALSE(never.stopped);

  // An unplannable step is skipped.
  auto skip = rollout_execute(s0, [&](const WorldState&, int t) {
    if (t == 0) return GoalSpec::make({pred(*u, "OnTop(tap_0,counter_0)")}, {});
    if (t == 1) return GoalSpec::make({pred(*u, "Near(robot,sink_0)")}, {});
    return GoalSpec{};
  }, PlannerConfig{3, 1000});
  CHECK(skip.failed);
  CHECK(skip.steps[0].plan_failed);
  CHECK(skip.actions.size() == 1);
  CHECK(skip.states.back().holds(pred(*u, "Near(robot,sink_0)")));
}

TEST_CASE("rollout replaying recorded diffs reconstructs the final state") {
  auto u = mug_scene();
  auto s0 = state(u, {"Near(robot,counter_0)", "OnTop(mug_0,counter_0)"});
  std::vector<std::string> demo = {"MoveTo(robot,mug_0)", "Grasp(robot,mug_0)",
                                   "MoveTo(robot,sink_0)", "PlaceOn(mug_0,sink_0)",
                                   "StateOn(tap_0)"};
  std::vector<WorldState> states{s0};
  for (const auto& a : demo) states.push_back(apply_action(act(*u, a), states.back()));
  std::vector<GoalSpec> diffs;
  for (std::size_t j = 0; j + 1 < states.size(); ++j) diffs.push_back(relation_diff(states[j], states[j + 1]));
  auto trace = rollout_execute(s0, [&](const WorldState&, int t) {
    return std::size_t(t) < diffs.size() ? diffs[std::size_t(t)] : GoalSpec{};
  });
  CHECK(trace.stopped);
  CHECK(trace.states.back() == states.back());
}
