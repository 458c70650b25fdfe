#include "goalnet/domain.hpp"

#include <algorithm>
#include <cctype>

namespace goalnet {

namespace {

constexpr ObjIndex kWildcard = -2;

template <typename Vec, typename Name>
int index_of(const Vec& v, Name name) {
  auto it = std::find(v.begin(), v.end(), name);
  return it == v.end() ? -1 : int(it - v.begin());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits `Name(a, b)` into name and trimmed argument tokens.
std::pair<std::string, std::vector<std::string>> split_call(std::string_view text) {
  text = trim(text);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw ParseError("malformed term '" + std::string(text) + "': expected Name(args)");
  }
  std::string name(trim(text.substr(0, open)));
  if (name.empty()) throw ParseError("malformed term '" + std::string(text) + "': empty name");
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  std::vector<std::string> args;
  while (!trim(inner).empty()) {
    auto comma = inner.find(',');
    auto tok = trim(inner.substr(0, comma));
    if (tok.empty()) throw ParseError("malformed term '" + std::string(text) + "': empty argument");
    args.emplace_back(tok);
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
    if (trim(inner).empty()) {
      throw ParseError("malformed term '" + std::string(text) + "': trailing comma");
    }
  }
  return {std::move(name), std::move(args)};
}

ObjIndex resolve(const Term& t, const GroundedAction& a, const Universe& u) {
  switch (t.kind) {
    case Term::Kind::kParam:
      return a.args.at(std::size_t(t.param));
    case Term::Kind::kConstant:
      return u.require(t.constant);
    case Term::Kind::kWildcard:
      return kWildcard;
  }
  return kWildcard;
}

bool matches(const Predicate& p, int rel, ObjIndex a, ObjIndex b) {
  return p.rel == rel && (a == kWildcard || p.subject == a) &&
         (b == kWildcard || p.object == b);
}

bool guard_passes(const Literal& lit, const GroundedAction& a, const Universe& u) {
  if (lit.guard_property < 0) return true;
  ObjIndex o = resolve(lit.guard_arg, a, u);
  return u.object(o).properties.test(std::size_t(lit.guard_property));
}

bool literal_holds(const Literal& lit, const GroundedAction& a, const WorldState& s) {
  const Universe& u = s.universe();
  if (!guard_passes(lit, a, u)) return true;
  bool value = false;
  if (lit.kind == Literal::Kind::kProperty) {
    ObjIndex o = resolve(lit.args.at(0), a, u);
    value = u.object(o).properties.test(std::size_t(lit.id));
  } else {
    ObjIndex x = resolve(lit.args.at(0), a, u);
    ObjIndex y = lit.args.size() > 1 ? resolve(lit.args[1], a, u) : kNoObject;
    if (x != kWildcard && y != kWildcard) {
      value = s.holds(Predicate{std::uint8_t(lit.id), x, y});
    } else {
      for (const auto& p : s.relations()) {
        if (matches(p, lit.id, x, y)) {
          value = true;
          break;
        }
      }
    }
  }
  return value != lit.negated;
}

Predicate ground_effect(const Literal& lit, const GroundedAction& a, const Universe& u) {
  ObjIndex x = resolve(lit.args.at(0), a, u);
  ObjIndex y = lit.args.size() > 1 ? resolve(lit.args[1], a, u) : kNoObject;
  return Predicate{std::uint8_t(lit.id), x, y};
}

// Static part of the legality test: property literals, and unary state
// literals that can never hold for the bound class.
bool statically_possible(const ActionSchema& act, const GroundedAction& a, const Universe& u) {
  const DomainSchema& schema = u.schema();
  for (const auto& lit : act.pre) {
    if (!guard_passes(lit, a, u)) continue;
    if (lit.kind == Literal::Kind::kProperty) {
      ObjIndex o = resolve(lit.args.at(0), a, u);
      if (u.object(o).properties.test(std::size_t(lit.id)) == lit.negated) return false;
    } else if (schema.is_unary(lit.id) && !lit.negated) {
      ObjIndex o = resolve(lit.args.at(0), a, u);
      if (o != kWildcard &&
          !u.object(o).allowed_states.test(std::size_t(schema.state_channel(lit.id)))) {
        return false;
      }
    }
  }
  for (const auto& lit : act.add) {
    if (lit.kind != Literal::Kind::kRelation || !schema.is_unary(lit.id)) continue;
    ObjIndex o = resolve(lit.args.at(0), a, u);
    if (!u.object(o).allowed_states.test(std::size_t(schema.state_channel(lit.id)))) return false;
  }
  return true;
}

}  // namespace

int ActionSchema::param_index(std::string_view var) const { return index_of(params, var); }

int DomainSchema::relation_index(std::string_view name) const { return index_of(relations, name); }
int DomainSchema::property_index(std::string_view name) const {
  return index_of(properties, name);
}
int DomainSchema::state_index(std::string_view name) const { return index_of(states, name); }

const ObjectClass& DomainSchema::object_class(const std::string& token) const {
  auto it = classes.find(token);
  if (it == classes.end()) {
    throw SchemaViolation("class '" + token + "' is not declared by schema '" + name + "'");
  }
  return it->second;
}

const ActionSchema* DomainSchema::find_action(std::string_view n) const {
  int i = action_index(n);
  return i < 0 ? nullptr : &actions[std::size_t(i)];
}

int DomainSchema::action_index(std::string_view n) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].name == n) return int(i);
  }
  return -1;
}

Universe::Universe(std::shared_ptr<const DomainSchema> schema, std::vector<ObjectInstance> objects)
    : schema_(std::move(schema)), objects_(std::move(objects)) {
  std::sort(objects_.begin(), objects_.end(),
            [](const ObjectInstance& a, const ObjectInstance& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < objects_.size(); ++i) {
    if (objects_[i].id == objects_[i - 1].id) {
      throw SchemaViolation("duplicate object id '" + objects_[i].id + "'");
    }
  }
  if (int(objects_.size()) > schema_->max_objects) {
    throw SchemaViolation("scene has " + std::to_string(objects_.size()) +
                          " objects; schema '" + schema_->name + "' allows at most " +
                          std::to_string(schema_->max_objects));
  }
  if (auto r = find(schema_->robot_id)) robot_ = *r;
}

std::shared_ptr<const Universe> Universe::make(
    std::shared_ptr<const DomainSchema> schema,
    const std::vector<std::pair<std::string, std::string>>& ids_and_classes) {
  std::vector<ObjectInstance> objs;
  objs.reserve(ids_and_classes.size());
  for (const auto& [id, cls] : ids_and_classes) {
    const ObjectClass& c = schema->object_class(cls);
    objs.push_back(ObjectInstance{id, cls, c.properties, c.states});
  }
  return std::make_shared<const Universe>(std::move(schema), std::move(objs));
}

std::optional<ObjIndex> Universe::find(std::string_view id) const {
  auto it = std::lower_bound(objects_.begin(), objects_.end(), id,
                             [](const ObjectInstance& o, std::string_view v) { return o.id < v; });
  if (it == objects_.end() || it->id != id) return std::nullopt;
  return ObjIndex(it - objects_.begin());
}

ObjIndex Universe::require(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw SchemaViolation("unknown object id '" + std::string(id) + "'");
}

bool Universe::same_objects(const Universe& other) const {
  if (this == &other) return true;
  if (objects_.size() != other.objects_.size()) return false;
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (objects_[i].id != other.objects_[i].id) return false;
  }
  return true;
}

GoalSpec GoalSpec::make(std::vector<Predicate> plus, std::vector<Predicate> minus) {
  auto norm = [](std::vector<Predicate>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  norm(plus);
  norm(minus);
  std::vector<Predicate> both;
  std::set_intersection(plus.begin(), plus.end(), minus.begin(), minus.end(),
                        std::back_inserter(both));
  if (!both.empty()) throw InvalidInput("goal lists a predicate as both positive and negative");
  return GoalSpec{std::move(plus), std::move(minus)};
}

WorldState::WorldState(std::shared_ptr<const Universe> universe)
    : universe_(std::move(universe)), state_bits_(universe_->size()) {}

WorldState WorldState::from_relations(std::shared_ptr<const Universe> universe,
                                      const std::vector<Predicate>& relations) {
  WorldState s(std::move(universe));
  for (const auto& p : relations) s.insert(p);
  return s;
}

void WorldState::validate(const Predicate& p) const {
  const DomainSchema& schema = universe_->schema();
  if (p.rel >= schema.relations.size()) throw SchemaViolation("relation index out of range");
  auto in_range = [&](ObjIndex o) { return o >= 0 && std::size_t(o) < universe_->size(); };
  if (!in_range(p.subject)) throw SchemaViolation("predicate subject does not resolve");
  if (schema.is_unary(p.rel)) {
    if (p.object != kNoObject) {
      throw SchemaViolation("state constraint " + schema.relations[p.rel] + " takes one argument");
    }
    const auto& obj = universe_->object(p.subject);
    if (!obj.allowed_states.test(std::size_t(schema.state_channel(p.rel)))) {
      throw SchemaViolation("class '" + obj.class_token + "' does not declare state " +
                            schema.states[std::size_t(schema.state_channel(p.rel))]);
    }
  } else if (!in_range(p.object)) {
    throw SchemaViolation("relation " + schema.relations[p.rel] + " takes two arguments");
  }
}

bool WorldState::holds(const Predicate& p) const {
  return std::binary_search(relations_.begin(), relations_.end(), p);
}

void WorldState::insert(const Predicate& p) {
  validate(p);
  auto it = std::lower_bound(relations_.begin(), relations_.end(), p);
  if (it != relations_.end() && *it == p) return;
  relations_.insert(it, p);
  if (p.unary()) {
    state_bits_[std::size_t(p.subject)].set(std::size_t(schema().state_channel(p.rel)));
  }
}

void WorldState::erase(const Predicate& p) {
  auto it = std::lower_bound(relations_.begin(), relations_.end(), p);
  if (it == relations_.end() || *it != p) return;
  relations_.erase(it);
  if (p.unary()) {
    state_bits_[std::size_t(p.subject)].reset(std::size_t(schema().state_channel(p.rel)));
  }
}

std::size_t WorldState::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : relations_) {
    std::uint64_t v = (std::uint64_t(p.rel) << 32) | (std::uint64_t(std::uint16_t(p.subject)) << 16) |
                      std::uint64_t(std::uint16_t(p.object));
    h ^= v;
    h *= 1099511628211ULL;
  }
  return std::size_t(h);
}

bool WorldState::operator==(const WorldState& other) const {
  return universe_->same_objects(*other.universe_) && relations_ == other.relations_ &&
         state_bits_ == other.state_bits_;
}

std::string WorldState::format(const Predicate& p) const { return format_predicate(p, *universe_); }

std::string format_predicate(const Predicate& p, const Universe& u) {
  std::string out = u.schema().relations.at(p.rel) + "(" + u.object(p.subject).id;
  if (!p.unary()) out += "," + u.object(p.object).id;
  return out + ")";
}

std::string format_action(const GroundedAction& a, const Universe& u) {
  std::string out = u.schema().actions.at(std::size_t(a.action)).name + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += u.object(a.args[i]).id;
  }
  return out + ")";
}

bool action_less(const GroundedAction& a, const GroundedAction& b, const Universe& u) {
  const auto& an = u.schema().actions[std::size_t(a.action)].name;
  const auto& bn = u.schema().actions[std::size_t(b.action)].name;
  if (an != bn) return an < bn;
  // Object indices follow id order, so index comparison is id comparison.
  return a.args < b.args;
}

Predicate parse_predicate(std::string_view text, const Universe& u) {
  auto [name, args] = split_call(text);
  const DomainSchema& schema = u.schema();
  int rel = schema.relation_index(name);
  if (rel < 0) throw ParseError("unknown relation '" + name + "'");
  std::size_t arity = schema.is_unary(rel) ? 1 : 2;
  if (args.size() != arity) {
    throw ParseError("relation '" + name + "' takes " + std::to_string(arity) + " argument(s)");
  }
  Predicate p{std::uint8_t(rel), kNoObject, kNoObject};
  auto lookup = [&](const std::string& id) {
    auto o = u.find(id);
    if (!o) throw ParseError("unknown object id '" + id + "' in '" + std::string(text) + "'");
    return *o;
  };
  p.subject = lookup(args[0]);
  if (arity == 2) p.object = lookup(args[1]);
  return p;
}

GroundedAction parse_action(std::string_view text, const Universe& u) {
  auto [name, args] = split_call(text);
  const DomainSchema& schema = u.schema();
  int ai = schema.action_index(name);
  if (ai < 0) throw ParseError("unknown action '" + name + "'");
  const auto& act = schema.actions[std::size_t(ai)];
  if (args.size() != act.params.size()) {
    throw ParseError("action '" + name + "' takes " + std::to_string(act.params.size()) +
                     " argument(s)");
  }
  GroundedAction g{ai, {}};
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto o = u.find(args[i]);
    if (!o) throw ParseError("unknown object id '" + args[i] + "' in '" + std::string(text) + "'");
    if (act.params[i].front() != '?' && act.params[i] != args[i]) {
      throw ParseError("action '" + name + "' requires '" + act.params[i] + "' at position " +
                       std::to_string(i));
    }
    g.args.push_back(*o);
  }
  return g;
}

std::optional<std::size_t> first_violated_precondition(const GroundedAction& a,
                                                       const WorldState& s) {
  const DomainSchema& schema = s.schema();
  if (a.action < 0 || std::size_t(a.action) >= schema.actions.size()) {
    throw SchemaViolation("action index out of range");
  }
  const auto& act = schema.actions[std::size_t(a.action)];
  if (a.args.size() != act.params.size()) throw SchemaViolation("wrong argument count for " + act.name);
  for (ObjIndex o : a.args) {
    if (o < 0 || std::size_t(o) >= s.object_count()) {
      throw SchemaViolation("action argument of " + act.name + " does not resolve");
    }
  }
  for (std::size_t i = 0; i < act.pre.size(); ++i) {
    if (!literal_holds(act.pre[i], a, s)) return i;
  }
  return std::nullopt;
}

bool check_preconditions(const GroundedAction& a, const WorldState& s) {
  return !first_violated_precondition(a, s).has_value();
}

GoalSpec expected_effects(const GroundedAction& a, const WorldState& s) {
  const Universe& u = s.universe();
  const auto& act = s.schema().actions.at(std::size_t(a.action));
  std::vector<Predicate> adds;
  for (const auto& lit : act.add) adds.push_back(ground_effect(lit, a, u));
  std::sort(adds.begin(), adds.end());
  std::vector<Predicate> removed;
  for (const auto& lit : act.del) {
    ObjIndex x = resolve(lit.args.at(0), a, u);
    ObjIndex y = lit.args.size() > 1 ? resolve(lit.args[1], a, u) : kNoObject;
    for (const auto& p : s.relations()) {
      if (matches(p, lit.id, x, y) && !std::binary_search(adds.begin(), adds.end(), p)) {
        removed.push_back(p);
      }
    }
  }
  std::vector<Predicate> added;
  for (const auto& p : adds) {
    if (!s.holds(p)) added.push_back(p);
  }
  return GoalSpec::make(std::move(added), std::move(removed));
}

WorldState apply_action(const GroundedAction& a, const WorldState& s) {
  if (auto bad = first_violated_precondition(a, s)) {
    const auto& act = s.schema().actions[std::size_t(a.action)];
    throw IllegalAction(format_action(a, s.universe()), act.pre[*bad].text);
  }
  GoalSpec eff = expected_effects(a, s);
  WorldState next = s;
  for (const auto& p : eff.minus) next.erase(p);
  for (const auto& p : eff.plus) next.insert(p);
  return next;
}

GoalSpec relation_diff(const WorldState& s_a, const WorldState& s_b) {
  if (!s_a.universe().same_objects(s_b.universe())) {
    throw DomainMismatch("relation_diff over states with different object universes");
  }
  std::vector<Predicate> plus;
  std::vector<Predicate> minus;
  const auto& ra = s_a.relations();
  const auto& rb = s_b.relations();
  std::set_difference(rb.begin(), rb.end(), ra.begin(), ra.end(), std::back_inserter(plus));
  std::set_difference(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(minus));
  return GoalSpec{std::move(plus), std::move(minus)};
}

bool goal_check(const WorldState& s, const GoalSpec& g) {
  for (const auto& p : g.plus) {
    if (!s.holds(p)) return false;
  }
  for (const auto& p : g.minus) {
    if (s.holds(p)) return false;
  }
  return true;
}

std::vector<double> adjacency_vector(ObjIndex o, const WorldState& s) {
  if (o < 0 || std::size_t(o) >= s.object_count()) {
    throw SchemaViolation("adjacency_vector: unknown object index");
  }
  const int width = s.schema().max_objects;
  std::vector<double> v(std::size_t(kBinaryRelations * width), 0.0);
  for (const auto& p : s.relations()) {
    if (p.subject == o && !p.unary()) v[std::size_t(p.rel * width + p.object)] = 1.0;
  }
  return v;
}

bool slot_accepts(const DomainSchema& schema, int rel, Slot slot, const ObjectInstance& obj,
                  bool is_robot) {
  const GrammarRule& g = schema.grammar.at(std::size_t(rel));
  const SlotRule& r = slot == Slot::kFirst ? g.first : g.second;
  switch (r.kind) {
    case SlotRule::Kind::kAny:
      return true;
    case SlotRule::Kind::kRobot:
      return is_robot;
    case SlotRule::Kind::kProperty:
      return obj.properties.test(std::size_t(r.index));
    case SlotRule::Kind::kState:
      return obj.allowed_states.test(std::size_t(r.index));
    case SlotRule::Kind::kNone:
      return false;
  }
  return false;
}

std::vector<ObjIndex> feasible_fillers(int rel, Slot slot, const WorldState& s) {
  const Universe& u = s.universe();
  std::vector<ObjIndex> out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (slot_accepts(u.schema(), rel, slot, u.object(ObjIndex(i)), ObjIndex(i) == u.robot())) {
      out.push_back(ObjIndex(i));
    }
  }
  return out;
}

bool predicate_well_formed(const Predicate& p, const Universe& u) {
  const DomainSchema& schema = u.schema();
  if (p.rel >= schema.relations.size()) return false;
  if (p.subject < 0 || std::size_t(p.subject) >= u.size()) return false;
  if (!slot_accepts(schema, p.rel, Slot::kFirst, u.object(p.subject), p.subject == u.robot())) {
    return false;
  }
  if (schema.is_unary(p.rel)) return p.object == kNoObject;
  if (p.object < 0 || std::size_t(p.object) >= u.size()) return false;
  return slot_accepts(schema, p.rel, Slot::kSecond, u.object(p.object), p.object == u.robot());
}

std::vector<GroundedAction> enumerate_groundings(const Universe& u) {
  const DomainSchema& schema = u.schema();
  std::vector<GroundedAction> out;
  const auto n = ObjIndex(u.size());
  for (std::size_t ai = 0; ai < schema.actions.size(); ++ai) {
    const auto& act = schema.actions[ai];
    GroundedAction g{int(ai), std::vector<ObjIndex>(act.params.size(), kNoObject)};
    std::vector<std::size_t> vars;
    bool constants_ok = true;
    for (std::size_t i = 0; i < act.params.size(); ++i) {
      if (act.params[i].front() == '?') {
        vars.push_back(i);
      } else if (auto c = u.find(act.params[i])) {
        g.args[i] = *c;
      } else {
        constants_ok = false;
      }
    }
    if (!constants_ok) continue;
    // Odometer over the variable parameters.
    std::vector<ObjIndex> pick(vars.size(), 0);
    while (true) {
      for (std::size_t k = 0; k < vars.size(); ++k) g.args[vars[k]] = pick[k];
      std::vector<ObjIndex> sorted = g.args;
      std::sort(sorted.begin(), sorted.end());
      bool distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
      if (n > 0 && distinct && statically_possible(act, g, u)) out.push_back(g);
      std::size_t k = 0;
      while (k < vars.size() && ++pick[k] == n) pick[k++] = 0;
      if (k == vars.size() || n == 0) break;
    }
  }
  std::sort(out.begin(), out.end(),
            [&](const GroundedAction& a, const GroundedAction& b) { return action_less(a, b, u); });
  return out;
}

}  // namespace goalnet
