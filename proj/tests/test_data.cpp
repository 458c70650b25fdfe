#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

#include "fixtures.hpp"
#include "goalnet/data.hpp"

using namespace goalnet;
using namespace fixtures;

namespace {

SchemaRegistry registry() {
  SchemaRegistry r;
  r.add(kitchen());
  r.add(livingroom());
  return r;
}

const std::vector<Demonstration>& corpus() {
  static auto demos = synth_generate(both_domains(), 7, 60);
  return demos;
}

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("goalnet_test_" + name);
}

std::string action_name(const Demonstration& d, const GroundedAction& a) {
  return d.universe()->schema().actions[std::size_t(a.action)].name;
}

}  // namespace

TEST_CASE("registry") {
  auto r = registry();
  CHECK(r.contains("kitchen"));
  CHECK_FALSE(r.contains("garage"));
  CHECK_THROWS_AS(r.get("garage"), ParseError);
  CHECK_THROWS_AS(r.add(kitchen()), InvalidInput);
}

TEST_CASE("generated demonstrations are valid and reproducible") {
  auto t0 = std::chrono::steady_clock::now();
  const auto& demos = corpus();
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("60 demos generated in " << secs << " s");
  REQUIRE(demos.size() == 60);
  std::set<std::string> ids, starts;
  auto reg = registry();
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const auto& d = demos[i];
    CHECK(d.domain == (i % 2 == 0 ? "kitchen" : "livingroom"));
    CHECK(d.id == d.domain + "-7-" + std::to_string(i));
    CHECK(ids.insert(d.id).second);
    CHECK(starts.insert(d.domain + state_to_json(d.initial()).dump()).second);
    CHECK_FALSE(d.actions.empty());
    CHECK_NOTHROW(validate_demo(d));
    CHECK_FALSE(d.grounding.empty());
    // Every instruction mentions its grounded nouns.
    auto objs = extract_goal_objects(d.instruction, d.universe()->schema(), lex().aliases,
                                     &d.grounding, d.universe().get());
    CHECK_FALSE(objs.ids.empty());
    // A JSON round trip re-validates and reproduces the demo.
    auto back = demo_from_json(demo_to_json(d), reg);
    CHECK(back.instruction == d.instruction);
    CHECK(back.actions == d.actions);
    REQUIRE(back.states.size() == d.states.size());
    for (std::size_t j = 0; j < d.states.size(); ++j) CHECK(back.states[j] == d.states[j]);
  }
  auto again = synth_generate(both_domains(), 7, 4);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(demo_to_json(again[i]) == demo_to_json(demos[i]));
  }
  CHECK(demo_to_json(synth_generate(both_domains(), 8, 1)[0]) != demo_to_json(demos[0]));
}

TEST_CASE("generator never uses held-out verbs") {
  std::ifstream in(std::string(GOALNET_DATA_DIR) + "/verb_synonyms.tsv");
  std::set<std::string> unseen;
  std::string seen, syn;
  while (in >> seen >> syn) unseen.insert(syn);
  REQUIRE(unseen.size() == 12);
  for (const auto& d : corpus()) {
    for (const auto& tok : tokenize(d.instruction)) CHECK_MESSAGE(!unseen.count(tok), d.instruction);
  }
}

TEST_CASE("every template occurs and gather alternates grasp and place") {
  std::set<std::string> verbs;
  int gathers = 0;
  for (const auto& d : corpus()) {
    verbs.insert(tokenize(d.instruction).front());
    if (d.instruction.rfind("gather", 0) != 0 && d.instruction.rfind("collect", 0) != 0) continue;
    ++gathers;
    std::vector<std::string> core;
    for (const auto& a : d.actions) {
      auto n = action_name(d, a);
      if (n == "Grasp" || n == "PlaceOn") core.push_back(n);
    }
    CHECK(core == std::vector<std::string>{"Grasp", "PlaceOn", "Grasp", "PlaceOn"});
  }
  CHECK(gathers > 0);
  CHECK((verbs.count("store") + verbs.count("put") + verbs.count("place")) > 0);
  CHECK((verbs.count("turn") + verbs.count("switch") + verbs.count("start") + verbs.count("boil")) > 0);
}

TEST_CASE("random initial states are legal") {
  std::mt19937_64 rng(3);
  for (const auto& schema : both_domains()) {
    auto u = scene_universe(schema);
    for (int i = 0; i < 50; ++i) {
      auto s = random_initial_state(u, rng);
      int near = 0;
      for (const auto& p : s.relations()) {
        CHECK(predicate_well_formed(p, *u));
        if (p.rel == schema->relation_index("Near")) ++near;
        CHECK(p.rel != schema->relation_index("ConnectedTo"));
      }
      CHECK(near == 1);
      // every graspable rests somewhere
      for (std::size_t o = 0; o < u->size(); ++o) {
        if (!u->object(ObjIndex(o)).properties.test(std::size_t(schema->property_index("IsGraspable")))) continue;
        int supports = 0;
        for (const auto& p : s.relations()) {
          if (p.subject == ObjIndex(o) && p.rel <= 1) ++supports;
        }
        CHECK(supports == 1);
      }
    }
  }
}

TEST_CASE("dataset file round trip and provenance") {
  auto path = tmp_file("roundtrip.json");
  std::vector<Demonstration> demos(corpus().begin(), corpus().begin() + 6);
  save_dataset(path, demos, {{"seed", 7}});
  auto ds = load_dataset(path, registry(), 1);
  CHECK(ds.provenance["seed"] == 7);
  REQUIRE(ds.demos.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(ds.demos[i].id == demos[i].id);
    CHECK(ds.demos[i].actions == demos[i].actions);
  }
  std::filesystem::remove(path);
}

TEST_CASE("an inconsistent recorded state is rejected naming its step") {
  auto reg = registry();
  const auto& d = corpus()[0];
  REQUIRE(d.actions.size() >= 2);
  auto j = demo_to_json(d);
  j["states"][2]["relations"].push_back({"OnTop", "plate_0", "stove_0"});
  // keep it well formed: drop any other support of plate_0
  auto& rels = j["states"][2]["relations"];
  for (std::size_t k = 0; k + 1 < rels.size(); ++k) {
    if (rels[k][1] == "plate_0" && (rels[k][0] == "OnTop" || rels[k][0] == "Inside")) {
      rels.erase(k);
      break;
    }
  }
  try {
    demo_from_json(j, reg);
    FAIL("accepted");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find(d.id) != std::string::npos);
    CHECK(msg.find("step 1") != std::string::npos);
  }

  auto bad = demo_to_json(d);
  bad["actions"].erase(0);
  CHECK_THROWS_AS(demo_from_json(bad, reg), ParseError);
  auto wrong_domain = demo_to_json(d);
  wrong_domain["domain"] = "garage";
  CHECK_THROWS_AS(demo_from_json(wrong_domain, reg), ParseError);
  auto bad_ground = demo_to_json(d);
  bad_ground["grounding"]["mug"] = {"mug_9"};
  CHECK_THROWS_AS(demo_from_json(bad_ground, reg), ParseError);
  auto path = tmp_file("notjson.json");
  std::ofstream(path) << "{\"format\": \"goalnet-dataset\", \"demos\": [";
  CHECK_THROWS_AS(load_dataset(path, reg, 1), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("splits are 70/15/15 and held-out starts are unseen") {
  auto path = tmp_file("split.json");
  auto demos = synth_generate(both_domains(), 21, 100);
  save_dataset(path, demos, {});
  auto ds = load_dataset(path, registry(), 5);
  CHECK(ds.moved_to_train == 0);
  CHECK(ds.train.size() == 70);
  CHECK(ds.validation.size() == 15);
  CHECK(ds.test.size() == 15);
  auto ds2 = load_dataset(path, registry(), 5);
  CHECK(ds2.test == ds.test);
  auto ds3 = load_dataset(path, registry(), 6);
  CHECK(ds3.test != ds.test);

  // Duplicate a test demo's start under a train id: it moves to train.
  Dataset clash = ds;
  Demonstration copy = ds.demos[ds.test[0]];
  copy.id = "copy";
  copy.split = Split::kTrain;
  clash.demos.push_back(copy);
  for (auto& d : clash.demos) {
    if (&d != &clash.demos.back()) d.split = Split::kUnassigned;
  }
  clash.demos.back().split = Split::kTrain;
  assign_splits(clash, 5);
  std::set<std::string> train_starts;
  for (auto* d : clash.select(Split::kTrain)) train_starts.insert(state_to_json(d->initial()).dump());
  for (auto* d : clash.select(Split::kTest)) {
    CHECK_FALSE(train_starts.count(state_to_json(d->initial()).dump()));
  }
  CHECK(clash.moved_to_train >= 1);
  std::filesystem::remove(path);
}

TEST_CASE("supervision targets are the per-step effects") {
  for (const auto& d : corpus()) {
    auto sup = extract_supervision(d);
    REQUIRE(sup.size() == d.actions.size() + 1);
    CHECK(sup.back().empty());
    for (std::size_t j = 0; j < d.actions.size(); ++j) {
      CHECK(sup[j] == expected_effects(d.actions[j], d.states[j]));
      CHECK(symsim_step(d.states[j], sup[j]) == d.states[j + 1]);
    }
  }
}

TEST_CASE("augmentation swaps in an unseen class of the same kind") {
  std::vector<const Demonstration*> ptrs;
  for (const auto& d : corpus()) ptrs.push_back(&d);
  auto reg = registry();
  auto res = augment(ptrs, lex().table, reg, 0.25, 9);
  CHECK(res.demos.size() <= 15);
  CHECK(res.demos.size() >= 5);
  std::set<std::string> seen_classes;
  for (const auto& d : corpus()) {
    for (const auto& o : d.universe()->objects()) seen_classes.insert(o.class_token);
  }
  for (const auto& a : res.demos) {
    CHECK_NOTHROW(validate_demo(a));
    std::string fresh;
    for (const auto& o : a.universe()->objects()) {
      if (!seen_classes.count(o.class_token)) fresh = o.class_token;
    }
    REQUIRE_FALSE(fresh.empty());
    CHECK(std::regex_search(a.instruction, std::regex("\\b" + fresh + "s?\\b")));
    CHECK(a.grounding.count(fresh) == 1);
    CHECK(a.id.find("-aug-" + fresh) != std::string::npos);
    auto objs = extract_goal_objects(a.instruction, a.universe()->schema(), lex().aliases,
                                     &a.grounding, a.universe().get());
    CHECK(std::find(objs.classes.begin(), objs.classes.end(), fresh) != objs.classes.end());
  }
  CHECK(augment(ptrs, lex().table, reg, 0.0, 9).demos.empty());
  CHECK_THROWS_AS(augment(ptrs, lex().table, reg, 1.5, 9), InvalidInput);
  auto again = augment(ptrs, lex().table, reg, 0.25, 9);
  REQUIRE(again.demos.size() == res.demos.size());
  for (std::size_t i = 0; i < res.demos.size(); ++i) CHECK(again.demos[i].id == res.demos[i].id);
}
