#pragma once

// Demonstrations: file format, validation, splits, supervision targets,
// semantic augmentation and the synthetic generator.

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "goalnet/domain.hpp"
#include "goalnet/language.hpp"
#include "goalnet/planner.hpp"

namespace goalnet {

// Domain tag → schema.
class SchemaRegistry {
 public:
  void add(std::shared_ptr<const DomainSchema> schema);
  const std::shared_ptr<const DomainSchema>& get(const std::string& domain) const;  // ParseError
  bool contains(const std::string& domain) const;
  std::vector<std::shared_ptr<const DomainSchema>> all() const;

  // kitchen.json and livingroom.json from `dir`.
  static SchemaRegistry load_dir(const std::filesystem::path& dir);

 private:
  std::vector<std::shared_ptr<const DomainSchema>> schemas_;
};

enum class Split { kUnassigned, kTrain, kValidation, kTest };
const char* to_string(Split s);

struct Demonstration {
  std::string id;
  std::string domain;
  std::string instruction;
  Groundings grounding;
  std::vector<WorldState> states;  // actions.size() + 1, sharing one universe
  std::vector<GroundedAction> actions;
  Split split = Split::kUnassigned;

  const WorldState& initial() const { return states.front(); }
  const WorldState& final_state() const { return states.back(); }
  const std::shared_ptr<const Universe>& universe() const { return states.front().universe_ptr(); }
};

// Every recorded state must equal apply_action of its predecessor. Throws
// ParseError naming the demonstration and step.
void validate_demo(const Demonstration& d);

nlohmann::json demo_to_json(const Demonstration& d);
Demonstration demo_from_json(const nlohmann::json& j, const SchemaRegistry& reg);  // validated

struct Dataset {
  std::vector<Demonstration> demos;
  nlohmann::json provenance;  // whatever the writer echoed
  std::vector<std::size_t> train, validation, test;
  int moved_to_train = 0;  // test demos whose initial state also starts a train demo

  std::vector<const Demonstration*> select(Split s) const;
};

// `{"format": "goalnet-dataset", "provenance": ..., "demos": [...]}`.
void save_dataset(const std::filesystem::path& path, const std::vector<Demonstration>& demos,
                  const nlohmann::json& provenance);
// Splits recorded in the file are kept; unassigned demos are split 70/15/15
// by a seeded shuffle. Test demos sharing an initial state with a train demo
// are moved to train.
Dataset load_dataset(const std::filesystem::path& path, const SchemaRegistry& reg,
                     std::uint64_t split_seed);
void assign_splits(Dataset& ds, std::uint64_t seed);

// One (δ̂⁺, δ̂⁻) per action, then (∅, ∅) as the stop target.
std::vector<GoalSpec> extract_supervision(const Demonstration& d);

struct AugmentResult {
  std::vector<Demonstration> demos;
  int skipped = 0;  // sampled demos with no admissible replacement
};

// Replaces one object class of a sampled demo by the nearest class (cosine
// over `table`) with identical property and state-channel sets that does not
// occur anywhere in `demos`. Ids are renamed `<class>_<k>`, the instruction
// and groundings follow. Adds at most budget × demos.size() demos.
AugmentResult augment(const std::vector<const Demonstration*>& demos, const EmbeddingTable& table,
                      const SchemaRegistry& reg, double budget, std::uint64_t seed);

// Templates: fetch X to Y, open-place-close, turn on an appliance (or boil
// X on the stove), gather two objects on a surface.
enum class Template { kFetch, kOpenPlaceClose, kTurnOn, kGather };
const char* to_string(Template t);

struct SynthConfig {
  int retry_cap = 50;
  PlannerConfig planner{4, 200000};
};

// Random legal initial state of the schema's scene: graspables on surfaces or
// in containers, random state bits, robot near something, hand empty.
WorldState random_initial_state(const std::shared_ptr<const Universe>& u, std::mt19937_64& rng);

// n demonstrations alternating over the given schemas, each planned as a
// sequence of optimal sub-plans. Ids are `<domain>-<seed>-<i>`.
std::vector<Demonstration> synth_generate(
    const std::vector<std::shared_ptr<const DomainSchema>>& schemas, std::uint64_t seed, int n,
    const SynthConfig& cfg = {});

}  // namespace goalnet
