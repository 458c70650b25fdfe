#include "goalnet/planner.hpp"

#include <deque>
#include <unordered_map>

namespace goalnet {

void PlannerConfig::validate() const {
  if (max_depth <= 0) throw InvalidInput("planner max_depth must be positive");
  if (max_expansions <= 0) throw InvalidInput("planner max_expansions must be positive");
}

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::kSolved:
      return "solved";
    case PlanStatus::kDepthExhausted:
      return "depth-exhausted";
    case PlanStatus::kExpansionsExhausted:
      return "expansions-exhausted";
  }
  return "?";
}

WorldState symsim_step(const WorldState& s, const GoalSpec& g) {
  WorldState next = s;
  for (const auto& p : g.plus) next.insert(p);
  for (const auto& p : g.minus) next.erase(p);
  return next;
}

namespace {

struct Node {
  WorldState state;
  std::int64_t parent;
  int action;  // index into groundings, -1 for the root
  int depth;
};

std::vector<GroundedAction> backtrack(const std::vector<Node>& nodes, std::int64_t i,
                                      const std::vector<GroundedAction>& groundings) {
  std::vector<GroundedAction> out;
  for (; nodes[std::size_t(i)].parent >= 0; i = nodes[std::size_t(i)].parent) {
    out.push_back(groundings[std::size_t(nodes[std::size_t(i)].action)]);
  }
  return {out.rbegin(), out.rend()};
}

}  // namespace

PlanResult plan(const WorldState& s, const GoalSpec& g, const PlannerConfig& cfg) {
  return plan(s, g, cfg, enumerate_groundings(s.universe()));
}

PlanResult plan(const WorldState& s, const GoalSpec& g, const PlannerConfig& cfg,
                const std::vector<GroundedAction>& groundings) {
  cfg.validate();
  PlanResult res{PlanStatus::kSolved, {}, s, 0};
  if (goal_check(s, g)) return res;

  std::vector<Node> nodes;
  nodes.push_back({s, -1, -1, 0});
  // Hash buckets of node indices; equality is checked on collision.
  std::unordered_multimap<std::size_t, std::int64_t> seen;
  seen.emplace(s.hash(), 0);
  auto is_new = [&](const WorldState& t, std::size_t h) {
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (nodes[std::size_t(it->second)].state == t) return false;
    }
    return true;
  };

  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (nodes[head].depth >= cfg.max_depth) continue;
    if (res.expanded_nodes >= cfg.max_expansions) {
      res.status = PlanStatus::kExpansionsExhausted;
      return res;
    }
    ++res.expanded_nodes;
    for (std::size_t gi = 0; gi < groundings.size(); ++gi) {
      const WorldState& cur = nodes[head].state;
      if (!check_preconditions(groundings[gi], cur)) continue;
      WorldState next = apply_action(groundings[gi], cur);
      std::size_t h = next.hash();
      if (!is_new(next, h)) continue;
      bool done = goal_check(next, g);
      nodes.push_back({std::move(next), std::int64_t(head), int(gi), nodes[head].depth + 1});
      seen.emplace(h, std::int64_t(nodes.size() - 1));
      if (done) {
        res.actions = backtrack(nodes, std::int64_t(nodes.size() - 1), groundings);
        res.final_state = nodes.back().state;
        return res;
      }
    }
  }
  // Frontier exhausted (by depth or by running out of new states).
  res.status = PlanStatus::kDepthExhausted;
  return res;
}

RolloutTrace rollout_execute(const WorldState& s0, const StepFn& step_fn, const PlannerConfig& cfg,
                             int max_steps) {
  RolloutTrace trace;
  trace.states.push_back(s0);
  auto groundings = enumerate_groundings(s0.universe());
  WorldState cur = s0;
  for (int t = 0; t < max_steps; ++t) {
    GoalSpec g = step_fn(cur, t);
    RolloutStep step{g, {}, false, PlanStatus::kSolved};
    if (g.empty()) {
      trace.steps.push_back(std::move(step));
      trace.stopped = true;
      break;
    }
    PlanResult r = plan(cur, g, cfg, groundings);
    step.status = r.status;
    if (!r.ok()) {
      step.plan_failed = true;
      trace.failed = true;
    } else {
      WorldState s = cur;
      for (const auto& a : r.actions) {
        s = apply_action(a, s);
        trace.actions.push_back(a);
        trace.states.push_back(s);
      }
      step.actions = std::move(r.actions);
      cur = std::move(s);
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

}  // namespace goalnet
