#pragma once

#include <cstdint>
#include <functional>

#include "goalnet/domain.hpp"

namespace goalnet {

struct PlannerConfig {
  int max_depth = 8;
  std::int64_t max_expansions = 200000;
  void validate() const;
};

enum class PlanStatus { kSolved, kDepthExhausted, kExpansionsExhausted };
const char* to_string(PlanStatus s);

struct PlanResult {
  PlanStatus status = PlanStatus::kSolved;
  std::vector<GroundedAction> actions;
  WorldState final_state;
  std::int64_t expanded_nodes = 0;
  bool ok() const { return status == PlanStatus::kSolved; }
};

// s ∪ δ⁺ \ δ⁻ with no precondition checking.
WorldState symsim_step(const WorldState& s, const GoalSpec& g);

// Breadth-first search over legal groundings with duplicate-state pruning.
// Successors are generated in action_less order, so the first goal state found
// is a shortest plan with lexicographic tie-breaking.
PlanResult plan(const WorldState& s, const GoalSpec& g, const PlannerConfig& cfg = {});

// Same as plan() with groundings supplied by the caller (they must be sorted
// with action_less and belong to s's universe).
PlanResult plan(const WorldState& s, const GoalSpec& g, const PlannerConfig& cfg,
                const std::vector<GroundedAction>& groundings);

struct RolloutStep {
  GoalSpec prediction;
  std::vector<GroundedAction> actions;
  bool plan_failed = false;
  PlanStatus status = PlanStatus::kSolved;
};

struct RolloutTrace {
  std::vector<GroundedAction> actions;
  std::vector<WorldState> states;  // s₀ followed by the state after every action
  std::vector<RolloutStep> steps;  // one per predict-plan iteration
  bool failed = false;             // some step's goal could not be planned
  bool stopped = false;            // step_fn emitted (∅, ∅) before the cap
};

// Called once per iteration with the current state and iteration index.
using StepFn = std::function<GoalSpec(const WorldState&, int)>;

// predict → plan → execute until step_fn returns (∅, ∅) or max_steps
// iterations. A step whose goal cannot be planned is skipped.
RolloutTrace rollout_execute(const WorldState& s0, const StepFn& step_fn,
                             const PlannerConfig& cfg = {}, int max_steps = 30);

}  // namespace goalnet
