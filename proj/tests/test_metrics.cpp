#include <doctest.h>

#include "generators.hpp"
#include "goalnet/metrics.hpp"
#include "oracles.hpp"

using namespace goalnet;
using namespace fixtures;

namespace {

Predicate A{0, 0, 1}, B{0, 1, 2}, C{4, 0, kNoObject};

const std::vector<Demonstration>& demos() {
  static auto d = synth_generate(both_domains(), 3, 16);
  return d;
}

std::vector<const Demonstration*> ptrs(const std::vector<Demonstration>& v) {
  std::vector<const Demonstration*> out;
  for (const auto& d : v) out.push_back(&d);
  return out;
}

Demonstration noop_demo(const Demonstration& like, const std::string& id) {
  Demonstration d = like;
  d.id = id;
  d.states.erase(d.states.begin() + 1, d.states.end());
  d.actions.clear();
  return d;
}

const PlannerConfig kPlanner{4, 20000};

}  // namespace

TEST_CASE("metric worked examples") {
  GoalSpec ab = GoalSpec::make({A, B}, {}), b = GoalSpec::make({B}, {});
  CHECK(sji(ab, ab) == 1.0);
  CHECK(sji(ab, b) == 0.5);
  CHECK(sji(GoalSpec::make({A}, {}), GoalSpec::make({B}, {})) == 0.0);
  CHECK(sji({}, {}) == 1.0);
  CHECK(f1(ab, b) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(f1(ab, ab) == 1.0);
  CHECK(f1(GoalSpec::make({A}, {C}), GoalSpec::make({B}, {A})) == 0.0);
  CHECK(grr(ab, GoalSpec::make({A, B, C}, {})) == 1);
  CHECK(grr(ab, b) == 0);
  CHECK(grr({}, ab) == 1);
  CHECK(grr(b, ab, true) == 0);  // pred ⊆ gt direction
  CHECK(grr(ab, b, true) == 1);

  GroundedAction x{0, {0}}, y{1, {0}}, z{2, {0}};
  CHECK(ied({x, y, z}, {x, y, z}) == 1.0);
  CHECK(ied({x, y, z}, {x, z}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ied({}, {x, y}) == 0.0);
  CHECK(ied({}, {}) == 1.0);
}

TEST_CASE("sji, f1 and grr equal the set-arithmetic oracle") {
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 1000; ++i) {
    auto [gt, pred] = gen::random_goal_pair(rng);
    REQUIRE(sji(gt, pred) == oracle::sji(gt, pred));
    REQUIRE(f1(gt, pred) == doctest::Approx(oracle::f1(gt, pred)).epsilon(1e-15));
    REQUIRE(grr(gt, pred) == oracle::grr(gt, pred));
    REQUIRE(grr(gt, pred, true) == oracle::grr(pred, gt));
  }
}

TEST_CASE("ied equals the Levenshtein oracle") {
  std::mt19937_64 rng(1002);
  for (int i = 0; i < 1000; ++i) {
    auto a = gen::random_actions(rng, 8), b = gen::random_actions(rng, 8);
    double expect = a.empty() && b.empty()
                        ? 1.0
                        : 1.0 - double(oracle::levenshtein(a, b)) / double(std::max(a.size(), b.size()));
    REQUIRE(ied(a, b) == expect);
  }
}

TEST_CASE("metric monotonicity and ranges") {
  std::mt19937_64 rng(1003);
  for (int i = 0; i < 500; ++i) {
    auto [gt, pred] = gen::random_goal_pair(rng);
    for (double v : {sji(gt, pred), f1(gt, pred)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(sji(gt, gt) == 1.0);
    CHECK(f1(gt, gt) == 1.0);
    CHECK(grr(gt, gt) == 1);
    // adding a correct predicate to pred does not lower the SJI numerator
    if (!gt.plus.empty()) {
      auto plus = pred.plus;
      plus.push_back(gt.plus.front());
      std::sort(plus.begin(), plus.end());
      plus.erase(std::unique(plus.begin(), plus.end()), plus.end());
      std::vector<Predicate> minus;
      for (const auto& p : pred.minus) {
        if (!std::binary_search(plus.begin(), plus.end(), p)) minus.push_back(p);
      }
      GoalSpec more = GoalSpec::make(plus, minus);
      auto c0 = oracle::count(gt.plus, pred.plus), c1 = oracle::count(gt.plus, more.plus);
      CHECK(c1.both >= c0.both);
    }
    // removing a ground-truth predicate from pred never raises GRR
    for (const auto& p : gt.plus) {
      std::vector<Predicate> plus;
      for (const auto& q : pred.plus) {
        if (!(q == p)) plus.push_back(q);
      }
      CHECK(grr(gt, GoalSpec::make(plus, pred.minus)) <= grr(gt, pred));
    }
  }
}

TEST_CASE("aggregate predicates") {
  const auto& d = demos()[0];
  CHECK(aggregate_predicates(d.initial(), d.initial()).empty());
  CHECK(aggregate_predicates(d.initial(), d.final_state()) == relation_diff(d.initial(), d.final_state()));
  CHECK_THROWS_AS(aggregate_predicates(d.initial(), demos()[1].initial()), DomainMismatch);

  auto u = universe(kitchen(), {"robot", "sink_0", "mug_0"});
  auto s0 = state(u, {"Near(robot,mug_0)"});
  auto s1 = apply_action(act(*u, "MoveTo(robot,sink_0)"), s0);
  auto agg = aggregate_predicates(s0, s1);
  CHECK(agg.plus == std::vector<Predicate>{pred(*u, "Near(robot,sink_0)")});
  CHECK(agg.minus == std::vector<Predicate>{pred(*u, "Near(robot,mug_0)")});
}

TEST_CASE("oracle replay scores perfectly") {
  auto rep = evaluate(ptrs(demos()), oracle_rollout(kPlanner));
  CHECK(rep.mean.count == 16);
  CHECK(rep.mean.sji == 1.0);
  CHECK(rep.mean.ied == 1.0);
  CHECK(rep.mean.f1 == 1.0);
  CHECK(rep.mean.grr == 1.0);
  CHECK(rep.to_json()["failures"].empty());
}

TEST_CASE("immediate stop scores GRR by the share of empty goals") {
  auto set = demos();
  set.push_back(noop_demo(set[0], "noop-a"));
  set.push_back(noop_demo(set[1], "noop-b"));
  auto stop = [](const Demonstration& d) {
    return rollout_execute(d.initial(), [](const WorldState&, int) { return GoalSpec{}; });
  };
  auto rep = evaluate(ptrs(set), stop);
  CHECK(rep.mean.grr == doctest::Approx(2.0 / 18.0).epsilon(1e-15));
  CHECK(rep.buckets.at(0).count == 2);
  CHECK(rep.buckets.at(0).grr == 1.0);
  CHECK(rep.to_json()["failures"].size() == 16);

  // means are plain averages of the per-datum scores, and buckets partition
  double sum = 0;
  int bucketed = 0;
  for (const auto& s : rep.per_datum) sum += s.sji;
  for (const auto& [k, m] : rep.buckets) bucketed += m.count;
  CHECK(rep.mean.sji == doctest::Approx(sum / 18).epsilon(1e-15));
  CHECK(bucketed == 18);
  for (const auto& s : rep.per_datum) {
    const auto& d = *std::find_if(set.begin(), set.end(), [&](const auto& x) { return x.id == s.id; });
    auto gt = relation_diff(d.initial(), d.final_state());
    CHECK(s.size == int(gt.plus.size() + gt.minus.size()));
  }
  CHECK(rep.table().find("GRR") != std::string::npos);
}

TEST_CASE("report does not depend on the worker count") {
  auto noisy = [](const Demonstration& d) {
    auto sup = extract_supervision(d);
    // drop every other constraint set: partial, deterministic traces
    return rollout_execute(d.initial(), [&](const WorldState&, int t) {
      if (std::size_t(t) >= sup.size()) return GoalSpec{};
      return t % 2 ? GoalSpec{} : sup[std::size_t(t)];
    }, kPlanner);
  };
  auto one = evaluate(ptrs(demos()), noisy, 1).to_json().dump();
  auto four = evaluate(ptrs(demos()), noisy, 4).to_json().dump();
  CHECK(one == four);
  CHECK_THROWS_AS(evaluate(ptrs(demos()), noisy, 0), InvalidInput);
}

TEST_CASE("verb and paraphrase generalization sets") {
  auto lex = RewriteLexicon::load_dir(GOALNET_DATA_DIR);
  REQUIRE(lex.verbs.size() == 12);
  Demonstration boil = demos()[0];
  boil.instruction = "boil milk";
  Demonstration put = demos()[1];
  put.instruction = "put the pillow in the cabinet";
  Demonstration none = demos()[2];
  none.instruction = "do something";

  auto g = make_generalization_set({&boil, &put, &none}, GeneralizationMode::kVerb, lex, ptrs(demos()));
  REQUIRE(g.demos.size() == 2);
  CHECK(g.skipped == 1);
  CHECK(g.demos[0].instruction == "heat milk");
  CHECK(g.demos[1].instruction == "set the pillow in the cabinet");
  CHECK(g.unseen_check_passed());
  // ground truth untouched
  CHECK(demo_to_json(g.demos[0])["states"] == demo_to_json(boil)["states"]);
  CHECK(demo_to_json(g.demos[0])["actions"] == demo_to_json(boil)["actions"]);

  Demonstration leak = demos()[3];
  leak.instruction = "heat the kettle";
  auto bad = make_generalization_set({&boil}, GeneralizationMode::kVerb, lex, {&leak});
  CHECK_FALSE(bad.unseen_check_passed());
  CHECK(bad.seen_in_train == std::vector<std::string>{"heat"});

  Demonstration sink = demos()[0];
  sink.instruction = "place into sink the mug";
  auto p = make_generalization_set({&put, &sink, &none}, GeneralizationMode::kParaphrase, lex, {});
  REQUIRE(p.demos.size() == 2);
  CHECK(p.demos[0].instruction == "set down the pillow inside the cabinet");
  CHECK(p.demos[1].instruction == "keep in wash basin the mug");
  CHECK_THROWS_AS(generalization_mode_from_string("both"), InvalidInput);

  // every generated instruction has a verb rewrite, and none leaks into training
  auto all = make_generalization_set(ptrs(demos()), GeneralizationMode::kVerb, lex, ptrs(demos()));
  CHECK(all.skipped == 0);
  CHECK(all.unseen_check_passed());
}
