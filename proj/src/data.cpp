#include "goalnet/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <set>

#include "goalnet/domain_io.hpp"

namespace goalnet {

using nlohmann::json;

// ---------------------------------------------------------------------------
// registry

void SchemaRegistry::add(std::shared_ptr<const DomainSchema> schema) {
  if (contains(schema->name)) throw InvalidInput("schema '" + schema->name + "' registered twice");
  schemas_.push_back(std::move(schema));
}

bool SchemaRegistry::contains(const std::string& domain) const {
  return std::any_of(schemas_.begin(), schemas_.end(), [&](const auto& s) { return s->name == domain; });
}

const std::shared_ptr<const DomainSchema>& SchemaRegistry::get(const std::string& domain) const {
  for (const auto& s : schemas_) {
    if (s->name == domain) return s;
  }
  throw ParseError("unknown domain '" + domain + "'");
}

std::vector<std::shared_ptr<const DomainSchema>> SchemaRegistry::all() const { return schemas_; }

SchemaRegistry SchemaRegistry::load_dir(const std::filesystem::path& dir) {
  SchemaRegistry r;
  r.add(load_schema(dir / "kitchen.json"));
  r.add(load_schema(dir / "livingroom.json"));
  return r;
}

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
    case Split::kUnassigned:
      break;
  }
  return "unassigned";
}

namespace {

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw ParseError("unknown split '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// demonstrations

void validate_demo(const Demonstration& d) {
  if (d.states.size() != d.actions.size() + 1) {
    throw ParseError("demo " + d.id + ": " + std::to_string(d.states.size()) + " states for " +
                     std::to_string(d.actions.size()) + " actions");
  }
  for (std::size_t j = 0; j < d.actions.size(); ++j) {
    const auto& a = d.actions[j];
    const auto& u = d.states[j].universe();
    auto bad = first_violated_precondition(a, d.states[j]);
    if (bad) {
      throw ParseError("demo " + d.id + " step " + std::to_string(j) + ": " + format_action(a, u) +
                       " violates " + u.schema().actions[std::size_t(a.action)].pre[*bad].text);
    }
    WorldState next = apply_action(a, d.states[j]);
    if (!(next == d.states[j + 1])) {
      auto diff = relation_diff(next, d.states[j + 1]);
      std::string what;
      for (const auto& p : diff.plus) what += " +" + format_predicate(p, u);
      for (const auto& p : diff.minus) what += " -" + format_predicate(p, u);
      throw ParseError("demo " + d.id + " step " + std::to_string(j) + ": recorded state after " +
                       format_action(a, u) + " differs from its effects:" + what);
    }
  }
}

json demo_to_json(const Demonstration& d) {
  json states = json::array();
  for (const auto& s : d.states) states.push_back(state_to_json(s));
  json actions = json::array();
  for (const auto& a : d.actions) {
    json args = json::array();
    for (auto o : a.args) args.push_back(d.universe()->object(o).id);
    actions.push_back({{"name", d.universe()->schema().actions[std::size_t(a.action)].name},
                       {"args", args}});
  }
  json j = {{"id", d.id},         {"domain", d.domain},   {"instruction", d.instruction},
            {"states", states},   {"actions", actions}};
  if (!d.grounding.empty()) j["grounding"] = d.grounding;
  if (d.split != Split::kUnassigned) j["split"] = to_string(d.split);
  return j;
}

Demonstration demo_from_json(const json& j, const SchemaRegistry& reg) {
  Demonstration d;
  try {
    d.id = j.at("id").get<std::string>();
    d.domain = j.at("domain").get<std::string>();
    d.instruction = j.at("instruction").get<std::string>();
    if (j.contains("grounding")) d.grounding = j.at("grounding").get<Groundings>();
    if (j.contains("split")) d.split = split_from_string(j.at("split").get<std::string>());
    const auto& schema = reg.get(d.domain);
    const json& states = j.at("states");
    if (states.empty()) throw ParseError("demo " + d.id + ": no states");
    d.states.push_back(state_from_json(states.at(0), schema));
    for (std::size_t i = 1; i < states.size(); ++i) {
      d.states.push_back(state_from_json(states.at(i), schema, d.universe()));
    }
    for (const auto& a : j.at("actions")) {
      std::string text = a.at("name").get<std::string>() + "(";
      bool first = true;
      for (const auto& arg : a.at("args")) {
        text += (first ? "" : ",") + arg.get<std::string>();
        first = false;
      }
      d.actions.push_back(parse_action(text + ")", *d.universe()));
    }
  } catch (const json::exception& e) {
    throw ParseError("demo " + (d.id.empty() ? std::string("?") : d.id) + ": " + e.what());
  } catch (const DomainMismatch& e) {
    throw ParseError("demo " + d.id + ": " + e.what());
  } catch (const SchemaViolation& e) {
    throw ParseError("demo " + d.id + ": " + e.what());
  }
  for (const auto& [tok, ids] : d.grounding) {
    for (const auto& id : ids) {
      if (!d.universe()->find(id)) {
        throw ParseError("demo " + d.id + ": grounding '" + tok + "' names unknown object " + id);
      }
    }
  }
  validate_demo(d);
  return d;
}

std::vector<const Demonstration*> Dataset::select(Split s) const {
  const auto& idx = s == Split::kTrain ? train : s == Split::kValidation ? validation : test;
  std::vector<const Demonstration*> out;
  for (auto i : idx) out.push_back(&demos[i]);
  return out;
}

void save_dataset(const std::filesystem::path& path, const std::vector<Demonstration>& demos,
                  const json& provenance) {
  json j = {{"format", "goalnet-dataset"}, {"provenance", provenance}, {"demos", json::array()}};
  for (const auto& d : demos) j["demos"].push_back(demo_to_json(d));
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << j.dump(1) << "\n";
  if (!out) throw InvalidInput("failed writing " + path.string());
}

void assign_splits(Dataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < ds.demos.size(); ++i) {
    if (ds.demos[i].split == Split::kUnassigned) open.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(open.begin(), open.end(), rng);
  std::size_t n = open.size();
  std::size_t n_train = n * 70 / 100;
  std::size_t n_val = n * 15 / 100;
  for (std::size_t k = 0; k < n; ++k) {
    ds.demos[open[k]].split = k < n_train ? Split::kTrain
                              : k < n_train + n_val ? Split::kValidation
                                                    : Split::kTest;
  }

  // Held-out demos must start from states never seen in training.
  std::set<std::pair<std::string, std::string>> train_starts;
  auto key = [](const Demonstration& d) {
    return std::make_pair(d.domain, state_to_json(d.initial()).dump());
  };
  for (const auto& d : ds.demos) {
    if (d.split == Split::kTrain) train_starts.insert(key(d));
  }
  ds.moved_to_train = 0;
  for (auto& d : ds.demos) {
    if (d.split == Split::kTest && train_starts.count(key(d))) {
      d.split = Split::kTrain;
      ++ds.moved_to_train;
    }
  }

  ds.train.clear();
  ds.validation.clear();
  ds.test.clear();
  for (std::size_t i = 0; i < ds.demos.size(); ++i) {
    switch (ds.demos[i].split) {
      case Split::kTrain:
        ds.train.push_back(i);
        break;
      case Split::kValidation:
        ds.validation.push_back(i);
        break;
      default:
        ds.test.push_back(i);
    }
  }
}

Dataset load_dataset(const std::filesystem::path& path, const SchemaRegistry& reg,
                     std::uint64_t split_seed) {
  json j = read_json_file(path);
  Dataset ds;
  try {
    if (j.value("format", std::string()) != "goalnet-dataset") {
      throw ParseError(path.string() + ": not a goalnet dataset");
    }
    ds.provenance = j.value("provenance", json::object());
    std::set<std::string> ids;
    for (const auto& dj : j.at("demos")) {
      ds.demos.push_back(demo_from_json(dj, reg));
      if (!ids.insert(ds.demos.back().id).second) {
        throw ParseError(path.string() + ": duplicate demo id " + ds.demos.back().id);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  assign_splits(ds, split_seed);
  return ds;
}

std::vector<GoalSpec> extract_supervision(const Demonstration& d) {
  std::vector<GoalSpec> out;
  for (std::size_t j = 0; j + 1 < d.states.size(); ++j) {
    out.push_back(relation_diff(d.states[j], d.states[j + 1]));
  }
  out.emplace_back();
  return out;
}

// ---------------------------------------------------------------------------
// augmentation

namespace {

std::string class_of(const json& obj) { return obj.at("class").get<std::string>(); }

// Whole-word replacement of `from` (and its plural) in lowercase text.
std::string replace_word(const std::string& text, const std::string& from, const std::string& to) {
  std::regex re("\\b" + from + "(s?)\\b", std::regex::icase);
  return std::regex_replace(text, re, to + "$1");
}

}  // namespace

AugmentResult augment(const std::vector<const Demonstration*>& demos, const EmbeddingTable& table,
                      const SchemaRegistry& reg, double budget, std::uint64_t seed) {
  if (budget < 0 || budget > 1) throw InvalidInput("augmentation budget must be in [0,1]");
  AugmentResult res;
  const std::size_t cap = std::size_t(budget * double(demos.size()));
  if (cap == 0) return res;

  std::map<std::string, std::set<std::string>> used;  // domain → classes present
  for (const auto* d : demos) {
    for (const auto& o : d->universe()->objects()) used[d->domain].insert(o.class_token);
  }

  std::vector<std::size_t> order(demos.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  AliasTable no_aliases;
  for (std::size_t idx : order) {
    if (res.demos.size() >= cap) break;
    const Demonstration& d = *demos[idx];
    const auto& schema = d.universe()->schema();
    auto mentioned = extract_goal_objects(d.instruction, schema, no_aliases).classes;

    std::string from, to;
    for (const auto& c : mentioned) {
      const auto& cls = schema.object_class(c);
      double best = -2;
      for (const auto& [tok, cand] : schema.classes) {
        if (tok == c || tok == schema.robot_id || used[d.domain].count(tok)) continue;
        if (cand.properties != cls.properties || cand.states != cls.states) continue;
        double sim = cosine(table.embed(c), table.embed(tok));
        if (sim > best) {
          best = sim;
          to = tok;
        }
      }
      if (!to.empty()) {
        from = c;
        break;
      }
    }
    if (to.empty()) {
      ++res.skipped;
      continue;
    }

    // Rename every instance of `from` through the serialized form.
    json j = demo_to_json(d);
    std::map<std::string, std::string> rename;
    int k = 0;
    for (const auto& o : d.universe()->objects()) {
      if (o.class_token == from) rename[o.id] = to + "_" + std::to_string(k++);
    }
    auto map_id = [&](json& v) {
      auto it = rename.find(v.get<std::string>());
      if (it != rename.end()) v = it->second;
    };
    for (auto& s : j["states"]) {
      for (auto& o : s["objects"]) {
        if (class_of(o) == from) o["class"] = to;
        map_id(o["id"]);
      }
      for (auto& r : s["relations"]) {
        for (std::size_t a = 1; a < r.size(); ++a) map_id(r[a]);
      }
    }
    for (auto& a : j["actions"]) {
      for (auto& arg : a["args"]) map_id(arg);
    }
    if (j.contains("grounding")) {
      json g = json::object();
      for (auto& [tok, ids] : j["grounding"].items()) {
        json mapped = ids;
        for (auto& id : mapped) map_id(id);
        g[tok == from ? to : tok] = mapped;
      }
      j["grounding"] = g;
    }
    j["instruction"] = replace_word(d.instruction, from, to);
    j["id"] = d.id + "-aug-" + to;
    try {
      res.demos.push_back(demo_from_json(j, reg));
    } catch (const ParseError&) {
      ++res.skipped;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// synthetic generator

const char* to_string(Template t) {
  switch (t) {
    case Template::kFetch:
      return "fetch";
    case Template::kOpenPlaceClose:
      return "open-place-close";
    case Template::kTurnOn:
      return "turn-on";
    case Template::kGather:
      return "gather";
  }
  return "?";
}

namespace {

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

struct SceneIndex {
  const Universe* u;
  int prop(const char* name) const { return u->schema().property_index(name); }
  bool has(ObjIndex o, const char* p) const {
    return u->object(o).properties.test(std::size_t(prop(p)));
  }
  std::vector<ObjIndex> where(const std::function<bool(ObjIndex)>& f) const {
    std::vector<ObjIndex> out;
    for (std::size_t i = 0; i < u->size(); ++i) {
      auto o = ObjIndex(i);
      if (o != u->robot() && f(o)) out.push_back(o);
    }
    return out;
  }
  // Fixed furniture: surfaces and containers that cannot be picked up.
  std::vector<ObjIndex> fixed_surfaces() const {
    return where([&](ObjIndex o) { return has(o, "IsSurface") && !has(o, "IsGraspable"); });
  }
  std::vector<ObjIndex> fixed_containers() const {
    return where([&](ObjIndex o) { return has(o, "IsContainer") && !has(o, "IsGraspable"); });
  }
  std::vector<ObjIndex> graspables() const {
    return where([&](ObjIndex o) { return has(o, "IsGraspable"); });
  }
};

Predicate P(const Universe& u, const std::string& rel, ObjIndex a, ObjIndex b = kNoObject) {
  return Predicate{std::uint8_t(u.schema().relation_index(rel)), a, b};
}

ObjIndex support_of(const WorldState& s, ObjIndex o) {
  for (const auto& p : s.relations()) {
    if (p.subject == o && !p.unary() && p.rel <= 1) return p.object;  // OnTop / Inside
  }
  return kNoObject;
}

struct Task {
  Template kind;
  std::string instruction;
  Groundings grounding;
  std::vector<GoalSpec> subgoals;
};

const std::string& cls(const Universe& u, ObjIndex o) { return u.object(o).class_token; }

void ground(Task& t, const Universe& u, ObjIndex o) {
  auto& ids = t.grounding[cls(u, o)];
  if (std::find(ids.begin(), ids.end(), u.object(o).id) == ids.end()) ids.push_back(u.object(o).id);
}

// Phrase banks only use the seen verbs; the unseen synonyms are reserved for
// the generalization transform.
std::optional<Task> make_task(Template kind, const WorldState& s, std::mt19937_64& rng) {
  const Universe& u = s.universe();
  SceneIndex ix{&u};
  const int on = u.schema().state_index("IsOn");
  const int open = u.schema().state_index("IsOpen");
  auto holds_state = [&](ObjIndex o, int ch) { return s.state_vec(o).test(std::size_t(ch)); };
  auto can_state = [&](ObjIndex o, int ch) { return u.object(o).allowed_states.test(std::size_t(ch)); };
  Task t{kind, {}, {}, {}};
  const ObjIndex robot = u.robot();

  switch (kind) {
    case Template::kFetch: {
      auto x = pick(ix.graspables(), rng);
      std::vector<ObjIndex> targets;
      for (auto y : ix.fixed_surfaces()) targets.push_back(y);
      for (auto y : ix.fixed_containers()) {
        if (!ix.has(y, "IsOpenable")) targets.push_back(y);
      }
      auto y = pick(targets, rng);
      if (support_of(s, x) == y) return std::nullopt;
      bool inside = !ix.has(y, "IsSurface");
      static const std::vector<std::string> verbs{"put", "place", "move", "bring", "get"};
      std::string prep = inside ? (coin(rng, 0.5) ? "in" : "into") : "on";
      t.instruction = pick(verbs, rng) + " the " + cls(u, x) + " " + prep + " the " + cls(u, y);
      ground(t, u, x);
      ground(t, u, y);
      t.subgoals.push_back(GoalSpec::make({P(u, "ConnectedTo", x, robot)}, {}));
      t.subgoals.push_back(GoalSpec::make({P(u, inside ? "Inside" : "OnTop", x, y)}, {}));
      return t;
    }
    case Template::kOpenPlaceClose: {
      auto boxes = ix.where([&](ObjIndex o) {
        return ix.has(o, "IsContainer") && ix.has(o, "IsOpenable") && !holds_state(o, open);
      });
      if (boxes.empty()) return std::nullopt;
      auto y = pick(boxes, rng);
      auto x = pick(ix.graspables(), rng);
      if (support_of(s, x) == y) return std::nullopt;
      std::string X = cls(u, x), Y = cls(u, y);
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0:
          t.instruction = "store the " + X + " in the " + Y;
          break;
        case 1:
          t.instruction = "put the " + X + " in the " + Y + " and close it";
          break;
        default:
          t.instruction = "place the " + X + " inside the " + Y + " and close the " + Y;
      }
      ground(t, u, x);
      ground(t, u, y);
      t.subgoals.push_back(GoalSpec::make({P(u, "ConnectedTo", x, robot)}, {}));
      t.subgoals.push_back(GoalSpec::make({P(u, "Inside", x, y)}, {}));
      t.subgoals.push_back(GoalSpec::make({}, {P(u, "stateIsOpen", y)}));
      return t;
    }
    case Template::kTurnOn: {
      auto stoves = ix.where([&](ObjIndex o) {
        return cls(u, o) == "stove" && !holds_state(o, on);
      });
      auto pots = ix.where([&](ObjIndex o) { return ix.has(o, "IsPourable") && ix.has(o, "IsGraspable"); });
      if (!stoves.empty() && !pots.empty() && coin(rng, 0.5)) {
        auto st = stoves.front();
        auto x = pick(pots, rng);
        if (support_of(s, x) == st) return std::nullopt;
        t.instruction = "boil the " + cls(u, x) + " on the stove";
        ground(t, u, x);
        ground(t, u, st);
        t.subgoals.push_back(GoalSpec::make({P(u, "ConnectedTo", x, robot)}, {}));
        t.subgoals.push_back(GoalSpec::make({P(u, "OnTop", x, st)}, {}));
        t.subgoals.push_back(GoalSpec::make({P(u, "stateIsOn", st)}, {}));
        return t;
      }
      auto devices = ix.where([&](ObjIndex o) {
        return ix.has(o, "IsTurnable") && can_state(o, on) && !holds_state(o, on);
      });
      if (devices.empty()) return std::nullopt;
      auto y = pick(devices, rng);
      static const std::vector<std::string> verbs{"turn on the ", "switch on the ", "start the "};
      t.instruction = pick(verbs, rng) + cls(u, y);
      ground(t, u, y);
      t.subgoals.push_back(GoalSpec::make({P(u, "stateIsOn", y)}, {}));
      return t;
    }
    case Template::kGather: {
      auto y = pick(ix.fixed_surfaces(), rng);
      auto items = ix.graspables();
      std::shuffle(items.begin(), items.end(), rng);
      // Prefer two instances of one class ("the pillows") half of the time.
      std::optional<std::pair<ObjIndex, ObjIndex>> pair;
      if (coin(rng, 0.5)) {
        for (std::size_t a = 0; a < items.size() && !pair; ++a) {
          for (std::size_t b = a + 1; b < items.size(); ++b) {
            if (cls(u, items[a]) == cls(u, items[b])) {
              pair = std::make_pair(std::min(items[a], items[b]), std::max(items[a], items[b]));
              break;
            }
          }
        }
      }
      if (!pair) {
        for (std::size_t b = 1; b < items.size(); ++b) {
          if (cls(u, items[b]) != cls(u, items[0])) {
            pair = std::make_pair(items[0], items[b]);
            break;
          }
        }
      }
      if (!pair) return std::nullopt;
      auto [a, b] = *pair;
      if (support_of(s, a) == y || support_of(s, b) == y) return std::nullopt;
      std::string verb = coin(rng, 0.5) ? "gather" : "collect";
      if (cls(u, a) == cls(u, b)) {
        t.instruction = verb + " the " + cls(u, a) + "s on the " + cls(u, y);
      } else {
        t.instruction = verb + " the " + cls(u, a) + " and the " + cls(u, b) + " on the " + cls(u, y);
      }
      ground(t, u, a);
      ground(t, u, b);
      ground(t, u, y);
      for (auto o : {a, b}) {
        t.subgoals.push_back(GoalSpec::make({P(u, "ConnectedTo", o, robot)}, {}));
        t.subgoals.push_back(GoalSpec::make({P(u, "OnTop", o, y)}, {}));
      }
      return t;
    }
  }
  return std::nullopt;
}

}  // namespace

WorldState random_initial_state(const std::shared_ptr<const Universe>& u, std::mt19937_64& rng) {
  WorldState s(u);
  SceneIndex ix{u.get()};
  const auto& schema = u->schema();
  auto surfaces = ix.fixed_surfaces();
  auto containers = ix.fixed_containers();
  for (std::size_t i = 0; i < u->size(); ++i) {
    auto o = ObjIndex(i);
    for (int ch = 0; ch < kStateChannels; ++ch) {
      if (u->object(o).allowed_states.test(std::size_t(ch)) && coin(rng, 0.25)) {
        s.insert(Predicate{std::uint8_t(schema.unary_relation(ch)), o, kNoObject});
      }
    }
  }
  for (auto o : ix.graspables()) {
    bool in_box = !containers.empty() && coin(rng, 0.25);
    if (in_box) {
      s.insert(P(*u, "Inside", o, pick(containers, rng)));
    } else {
      s.insert(P(*u, "OnTop", o, pick(surfaces, rng)));
    }
  }
  auto others = ix.where([](ObjIndex) { return true; });
  s.insert(P(*u, "Near", u->robot(), pick(others, rng)));
  return s;
}

std::vector<Demonstration> synth_generate(
    const std::vector<std::shared_ptr<const DomainSchema>>& schemas, std::uint64_t seed, int n,
    const SynthConfig& cfg) {
  if (n < 0) throw InvalidInput("demo count must be non-negative");
  if (n > 0 && schemas.empty()) throw InvalidInput("no schema to generate from");
  std::vector<Demonstration> out;
  std::mt19937_64 rng(seed);
  std::vector<std::shared_ptr<const Universe>> universes;
  std::vector<std::vector<GroundedAction>> groundings;
  for (const auto& s : schemas) {
    universes.push_back(Universe::make(s, s->scene));
    groundings.push_back(enumerate_groundings(*universes.back()));
  }
  std::set<std::string> starts;  // keep initial states unique
  for (int i = 0; i < n; ++i) {
    std::size_t k = std::size_t(i) % schemas.size();
    const auto& u = universes[k];
    // templates rotate per schema so every one gets an equal share
    auto kind = Template((std::size_t(i) / schemas.size()) % 4);
    bool done = false;
    for (int attempt = 0; attempt < cfg.retry_cap && !done; ++attempt) {
      WorldState s0 = random_initial_state(u, rng);
      auto task = make_task(kind, s0, rng);
      if (!task) continue;
      auto key = state_to_json(s0).dump();
      if (starts.count(key)) continue;

      Demonstration d;
      d.id = schemas[k]->name + "-" + std::to_string(seed) + "-" + std::to_string(i);
      d.domain = schemas[k]->name;
      d.instruction = task->instruction;
      d.grounding = task->grounding;
      d.states.push_back(s0);
      bool ok = true;
      for (const auto& g : task->subgoals) {
        auto r = plan(d.states.back(), g, cfg.planner, groundings[k]);
        if (!r.ok()) {
          ok = false;
          break;
        }
        for (const auto& a : r.actions) {
          d.states.push_back(apply_action(a, d.states.back()));
          d.actions.push_back(a);
        }
      }
      if (!ok || d.actions.empty()) continue;
      validate_demo(d);
      starts.insert(key);
      out.push_back(std::move(d));
      done = true;
    }
    if (!done) {
      throw PlanningError("could not generate demo " + std::to_string(i) + " within " +
                          std::to_string(cfg.retry_cap) + " attempts");
    }
  }
  return out;
}

}  // namespace goalnet
