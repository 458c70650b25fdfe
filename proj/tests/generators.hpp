#pragma once

// Hand-rolled random generators for property tests.

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "goalnet/planner.hpp"

namespace gen {

using namespace goalnet;

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Legal state reached by a random walk from a randomized start: graspables
// on random surfaces, random state bits, robot near a random object.
inline WorldState random_state(const std::shared_ptr<const Universe>& u, std::mt19937_64& rng,
                               int walk) {
  const DomainSchema& schema = u->schema();
  WorldState s(u);
  std::vector<ObjIndex> surfaces;
  int surface = schema.property_index("IsSurface");
  int graspable = schema.property_index("IsGraspable");
  for (std::size_t i = 0; i < u->size(); ++i) {
    if (u->object(ObjIndex(i)).properties.test(std::size_t(surface))) surfaces.push_back(ObjIndex(i));
  }
  for (std::size_t i = 0; i < u->size(); ++i) {
    const auto& o = u->object(ObjIndex(i));
    if (o.properties.test(std::size_t(graspable)) && !surfaces.empty()) {
      ObjIndex on = surfaces[pick(rng, surfaces.size())];
      if (on != ObjIndex(i) && rng() % 4 != 0) {
        s.insert(Predicate{std::uint8_t(schema.relation_index("OnTop")), ObjIndex(i), on});
      }
    }
    for (int c = 0; c < kStateChannels; ++c) {
      if (o.allowed_states.test(std::size_t(c)) && rng() % 2) {
        s.insert(Predicate{std::uint8_t(schema.unary_relation(c)), ObjIndex(i), kNoObject});
      }
    }
  }
  ObjIndex near = ObjIndex(pick(rng, u->size()));
  if (near != u->robot()) {
    s.insert(Predicate{std::uint8_t(schema.relation_index("Near")), u->robot(), near});
  }
  auto groundings = enumerate_groundings(*u);
  for (int k = 0; k < walk; ++k) {
    std::vector<std::size_t> legal;
    for (std::size_t i = 0; i < groundings.size(); ++i) {
      if (check_preconditions(groundings[i], s)) legal.push_back(i);
    }
    if (legal.empty()) break;
    s = apply_action(groundings[legal[pick(rng, legal.size())]], s);
  }
  return s;
}

// Any relation set over u that respects state-channel declarations, ignoring
// action reachability.
inline WorldState random_relations(const std::shared_ptr<const Universe>& u, std::mt19937_64& rng,
                                   double density) {
  const DomainSchema& schema = u->schema();
  WorldState s(u);
  std::bernoulli_distribution coin(density);
  for (int r = 0; r < schema.relation_count(); ++r) {
    for (std::size_t a = 0; a < u->size(); ++a) {
      if (schema.is_unary(r)) {
        if (u->object(ObjIndex(a)).allowed_states.test(std::size_t(schema.state_channel(r))) &&
            coin(rng)) {
          s.insert(Predicate{std::uint8_t(r), ObjIndex(a), kNoObject});
        }
        continue;
      }
      for (std::size_t b = 0; b < u->size(); ++b) {
        if (coin(rng)) s.insert(Predicate{std::uint8_t(r), ObjIndex(a), ObjIndex(b)});
      }
    }
  }
  return s;
}

// Shortest solution length up to max_depth by iterative-deepening enumeration
// of every action sequence (no state pruning); -1 when none exists.
inline int brute_force_optimum(const WorldState& s, const GoalSpec& g,
                               const std::vector<GroundedAction>& groundings, int max_depth) {
  std::function<bool(const WorldState&, int)> dfs = [&](const WorldState& cur, int left) {
    if (goal_check(cur, g)) return true;
    if (left == 0) return false;
    for (const auto& a : groundings) {
      if (check_preconditions(a, cur) && dfs(apply_action(a, cur), left - 1)) return true;
    }
    return false;
  };
  for (int d = 0; d <= max_depth; ++d) {
    if (dfs(s, d)) return d;
  }
  return -1;
}

// Goal whose satisfying state lies `steps` random actions away from s: a
// random non-empty subset of the walk's net effect.
inline GoalSpec random_reachable_goal(const WorldState& s, std::mt19937_64& rng, int steps) {
  auto groundings = enumerate_groundings(s.universe());
  for (int attempt = 0; attempt < 50; ++attempt) {
    WorldState t = s;
    for (int k = 0; k < steps; ++k) {
      std::vector<std::size_t> legal;
      for (std::size_t i = 0; i < groundings.size(); ++i) {
        if (check_preconditions(groundings[i], t)) legal.push_back(i);
      }
      t = apply_action(groundings[legal[pick(rng, legal.size())]], t);
    }
    GoalSpec d = relation_diff(s, t);
    if (d.empty()) continue;
    std::vector<Predicate> plus, minus;
    for (const auto& p : d.plus) {
      if (rng() % 2) plus.push_back(p);
    }
    for (const auto& p : d.minus) {
      if (rng() % 3 == 0) minus.push_back(p);
    }
    if (plus.empty() && minus.empty()) {
      if (!d.plus.empty()) plus.push_back(d.plus.front());
      else minus.push_back(d.minus.front());
    }
    return GoalSpec::make(plus, minus);
  }
  return {};
}

// Two constraint sets drawn from a small shared pool so they overlap often;
// empty sides are common.
inline std::pair<GoalSpec, GoalSpec> random_goal_pair(std::mt19937_64& rng) {
  std::vector<Predicate> pool;
  for (int r = 0; r < 6; ++r) {
    for (int a = 0; a < 3; ++a) pool.push_back(Predicate{std::uint8_t(r), ObjIndex(a), ObjIndex(r < 4 ? a + 1 : -1)});
  }
  auto draw = [&](int max) {
    std::vector<Predicate> out;
    int n = int(pick(rng, std::size_t(max) + 1));
    for (int k = 0; k < n; ++k) out.push_back(pool[pick(rng, pool.size())]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  auto spec = [&] {
    auto plus = draw(5);
    auto minus = draw(3);
    std::vector<Predicate> m;
    for (const auto& p : minus) {
      if (!std::binary_search(plus.begin(), plus.end(), p)) m.push_back(p);
    }
    return GoalSpec::make(plus, m);
  };
  return {spec(), spec()};
}

// Action sequences over a 3-symbol alphabet.
inline std::vector<GroundedAction> random_actions(std::mt19937_64& rng, int max_len) {
  std::vector<GroundedAction> out(pick(rng, std::size_t(max_len) + 1));
  for (auto& a : out) {
    a.action = int(pick(rng, 3));
    a.args = {ObjIndex(pick(rng, 2))};
  }
  return out;
}

}  // namespace gen
