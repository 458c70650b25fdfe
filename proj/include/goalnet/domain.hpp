#pragma once

// Symbolic environment model: schema, object universe, world state, grounded
// actions and the deterministic transition function.

#include <bitset>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "goalnet/error.hpp"

namespace goalnet {

inline constexpr int kStateChannels = 7;
inline constexpr int kPropertyCount = 12;
inline constexpr int kBinaryRelations = 4;
inline constexpr int kDefaultMaxObjects = 45;

using ObjIndex = std::int16_t;
inline constexpr ObjIndex kNoObject = -1;

using StateBits = std::bitset<kStateChannels>;
using PropertyBits = std::bitset<kPropertyCount>;

// R(o1, o2), or R(o1) when `object == kNoObject` (a unary state constraint).
// Object fields index into the owning Universe's sorted object list.
struct Predicate {
  std::uint8_t rel = 0;
  ObjIndex subject = kNoObject;
  ObjIndex object = kNoObject;

  bool unary() const { return object == kNoObject; }
  auto operator<=>(const Predicate&) const = default;
};

struct PredicateHash {
  std::size_t operator()(const Predicate& p) const noexcept {
    return (std::size_t(p.rel) << 32) ^ (std::size_t(std::uint16_t(p.subject)) << 16) ^
           std::size_t(std::uint16_t(p.object));
  }
};

// Argument of a literal template: an action parameter, a constant object id,
// or `*` (any object).
struct Term {
  enum class Kind { kParam, kConstant, kWildcard };
  Kind kind = Kind::kWildcard;
  int param = -1;
  std::string constant;
};

// One precondition or effect template, e.g. `!ConnectedTo(?o,robot)` or
// `stateIsOpen(?b) if IsOpenable(?b)`.
struct Literal {
  enum class Kind { kRelation, kProperty };
  Kind kind = Kind::kRelation;
  int id = 0;  // relation index or property index
  bool negated = false;
  std::vector<Term> args;
  int guard_property = -1;  // literal only applies when the guard holds
  Term guard_arg;
  std::string text;
};

struct ActionSchema {
  std::string name;
  // Each entry is either a variable (`?o`) or a constant object id.
  std::vector<std::string> params;
  std::vector<Literal> pre;
  std::vector<Literal> add;
  std::vector<Literal> del;

  int param_index(std::string_view var) const;
};

struct ObjectClass {
  std::string token;
  PropertyBits properties;
  StateBits states;  // channels this class may carry
};

// Which objects may fill one slot of a relation (the grammar mask source).
struct SlotRule {
  enum class Kind { kAny, kRobot, kProperty, kState, kNone };
  Kind kind = Kind::kAny;
  int index = -1;  // property or state channel for kProperty / kState
};

struct GrammarRule {
  SlotRule first;
  SlotRule second;
};

enum class Slot { kFirst, kSecond };

struct DomainSchema {
  std::string name;
  int max_objects = kDefaultMaxObjects;
  std::vector<std::string> states;      // kStateChannels channel names
  std::vector<std::string> properties;  // kPropertyCount names
  // Binary relations first, then one unary relation `state<Channel>` per
  // state channel.
  std::vector<std::string> relations;
  std::map<std::string, ObjectClass> classes;
  std::vector<GrammarRule> grammar;  // one per relation
  std::vector<ActionSchema> actions;
  // Default scene: (instance id, class token).
  std::vector<std::pair<std::string, std::string>> scene;
  std::string robot_id = "robot";

  int relation_count() const { return int(relations.size()); }
  bool is_unary(int rel) const { return rel >= kBinaryRelations; }
  int state_channel(int rel) const { return rel - kBinaryRelations; }
  int unary_relation(int channel) const { return kBinaryRelations + channel; }

  int relation_index(std::string_view name) const;  // -1 when absent
  int property_index(std::string_view name) const;
  int state_index(std::string_view name) const;
  const ObjectClass& object_class(const std::string& token) const;
  const ActionSchema* find_action(std::string_view name) const;
  int action_index(std::string_view name) const;
};

// Immutable part of an object instance; the mutable state bits live in the
// WorldState.
struct ObjectInstance {
  std::string id;
  std::string class_token;
  PropertyBits properties;
  StateBits allowed_states;
};

// Fixed, id-sorted object list shared by every state of one scene.
class Universe {
 public:
  Universe(std::shared_ptr<const DomainSchema> schema, std::vector<ObjectInstance> objects);

  // Instantiates objects from (id, class) pairs using the schema's classes.
  static std::shared_ptr<const Universe> make(
      std::shared_ptr<const DomainSchema> schema,
      const std::vector<std::pair<std::string, std::string>>& ids_and_classes);

  const DomainSchema& schema() const { return *schema_; }
  const std::shared_ptr<const DomainSchema>& schema_ptr() const { return schema_; }
  std::size_t size() const { return objects_.size(); }
  const ObjectInstance& object(ObjIndex i) const { return objects_.at(std::size_t(i)); }
  const std::vector<ObjectInstance>& objects() const { return objects_; }
  std::optional<ObjIndex> find(std::string_view id) const;
  ObjIndex require(std::string_view id) const;  // throws SchemaViolation
  ObjIndex robot() const { return robot_; }

  bool same_objects(const Universe& other) const;

 private:
  std::shared_ptr<const DomainSchema> schema_;
  std::vector<ObjectInstance> objects_;
  ObjIndex robot_ = kNoObject;
};

// Positive (Δ⁺) and negative (Δ⁻) constraint sets. Both sorted and unique.
struct GoalSpec {
  std::vector<Predicate> plus;
  std::vector<Predicate> minus;

  // Sorts, deduplicates and rejects overlapping sets.
  static GoalSpec make(std::vector<Predicate> plus, std::vector<Predicate> minus);
  bool empty() const { return plus.empty() && minus.empty(); }
  bool operator==(const GoalSpec&) const = default;
};

class WorldState {
 public:
  explicit WorldState(std::shared_ptr<const Universe> universe);

  // Builds a state from a relation list; unary predicates set state bits.
  static WorldState from_relations(std::shared_ptr<const Universe> universe,
                                   const std::vector<Predicate>& relations);

  const Universe& universe() const { return *universe_; }
  const std::shared_ptr<const Universe>& universe_ptr() const { return universe_; }
  const DomainSchema& schema() const { return universe_->schema(); }
  std::size_t object_count() const { return universe_->size(); }

  // All relations including the unary state constraints, sorted.
  const std::vector<Predicate>& relations() const { return relations_; }
  StateBits state_vec(ObjIndex o) const { return state_bits_.at(std::size_t(o)); }
  bool holds(const Predicate& p) const;

  // The single mutation path; keeps state bits and unary predicates in sync.
  void insert(const Predicate& p);
  void erase(const Predicate& p);

  std::size_t hash() const;
  bool operator==(const WorldState& other) const;

  std::string format(const Predicate& p) const;

 private:
  void validate(const Predicate& p) const;

  std::shared_ptr<const Universe> universe_;
  std::vector<StateBits> state_bits_;
  std::vector<Predicate> relations_;
};

struct WorldStateHash {
  std::size_t operator()(const WorldState& s) const noexcept { return s.hash(); }
};

struct GroundedAction {
  int action = -1;               // index into DomainSchema::actions
  std::vector<ObjIndex> args;    // one per schema parameter, constants included
  bool operator==(const GroundedAction&) const = default;
};

std::string format_action(const GroundedAction& a, const Universe& u);
std::string format_predicate(const Predicate& p, const Universe& u);

// Lexicographic (action name, argument ids) ordering used for tie-breaking.
bool action_less(const GroundedAction& a, const GroundedAction& b, const Universe& u);

// Parses `Name(arg1,arg2)`; whitespace around tokens is ignored.
Predicate parse_predicate(std::string_view text, const Universe& u);
GroundedAction parse_action(std::string_view text, const Universe& u);

// Index of the first violated precondition template, or nullopt when legal.
std::optional<std::size_t> first_violated_precondition(const GroundedAction& a,
                                                       const WorldState& s);
bool check_preconditions(const GroundedAction& a, const WorldState& s);

// T(a, s). Deletions (with wildcard expansion) are applied before additions.
WorldState apply_action(const GroundedAction& a, const WorldState& s);

// The effective (additions, removals) a legal action would make in s.
GoalSpec expected_effects(const GroundedAction& a, const WorldState& s);

// (R(s_b) \ R(s_a), R(s_a) \ R(s_b)).
GoalSpec relation_diff(const WorldState& s_a, const WorldState& s_b);

// Δ⁺ ⊆ R(s) and Δ⁻ ∩ R(s) = ∅.
bool goal_check(const WorldState& s, const GoalSpec& g);

// Outgoing edges of o over (binary relation × object slot); length
// kBinaryRelations * max_objects.
std::vector<double> adjacency_vector(ObjIndex o, const WorldState& s);

bool slot_accepts(const DomainSchema& schema, int rel, Slot slot, const ObjectInstance& obj,
                  bool is_robot);
std::vector<ObjIndex> feasible_fillers(int rel, Slot slot, const WorldState& s);
bool predicate_well_formed(const Predicate& p, const Universe& u);  // passes the grammar

// Every grounding that passes the static (property and state-channel) tests,
// sorted with action_less. Variable parameters bind distinct objects.
std::vector<GroundedAction> enumerate_groundings(const Universe& u);

}  // namespace goalnet
