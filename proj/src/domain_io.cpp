#include "goalnet/domain_io.hpp"

#include <fstream>
#include <sstream>

namespace goalnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

SlotRule parse_slot(const DomainSchema& schema, const std::string& text) {
  if (text == "any") return {SlotRule::Kind::kAny, -1};
  if (text == "robot") return {SlotRule::Kind::kRobot, -1};
  if (text == "none") return {SlotRule::Kind::kNone, -1};
  if (text.rfind("state:", 0) == 0) {
    int s = schema.state_index(text.substr(6));
    if (s < 0) throw ParseError("grammar: unknown state '" + text + "'");
    return {SlotRule::Kind::kState, s};
  }
  int p = schema.property_index(text);
  if (p < 0) throw ParseError("grammar: unknown slot rule '" + text + "'");
  return {SlotRule::Kind::kProperty, p};
}

Term parse_term(const ActionSchema& act, std::string_view tok) {
  Term t;
  if (tok == "*") {
    t.kind = Term::Kind::kWildcard;
  } else if (tok.front() == '?') {
    t.kind = Term::Kind::kParam;
    t.param = act.param_index(tok);
    if (t.param < 0) {
      throw ParseError("action " + act.name + ": unbound variable '" + std::string(tok) + "'");
    }
  } else {
    t.kind = Term::Kind::kConstant;
    t.constant = std::string(tok);
  }
  return t;
}

// `[!]Name(args) [if Property(arg)]`
Literal parse_literal(const DomainSchema& schema, const ActionSchema& act, const std::string& text) {
  Literal lit;
  lit.text = text;
  std::string_view body = trim(text);
  if (auto guard = body.find(" if "); guard != std::string_view::npos) {
    Literal g = parse_literal(schema, act, std::string(body.substr(guard + 4)));
    if (g.kind != Literal::Kind::kProperty || g.negated || g.args.size() != 1) {
      throw ParseError("action " + act.name + ": guard must be a positive property test");
    }
    lit.guard_property = g.id;
    lit.guard_arg = g.args[0];
    body = trim(body.substr(0, guard));
  }
  if (!body.empty() && body.front() == '!') {
    lit.negated = true;
    body.remove_prefix(1);
  }
  auto open = body.find('(');
  if (open == std::string_view::npos || body.back() != ')') {
    throw ParseError("action " + act.name + ": malformed literal '" + text + "'");
  }
  std::string name(trim(body.substr(0, open)));
  std::string_view inner = body.substr(open + 1, body.size() - open - 2);
  while (true) {
    auto comma = inner.find(',');
    lit.args.push_back(parse_term(act, trim(inner.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  if (int r = schema.relation_index(name); r >= 0) {
    lit.kind = Literal::Kind::kRelation;
    lit.id = r;
    std::size_t arity = schema.is_unary(r) ? 1 : 2;
    if (lit.args.size() != arity) {
      throw ParseError("action " + act.name + ": wrong arity in '" + text + "'");
    }
  } else if (int p = schema.property_index(name); p >= 0) {
    lit.kind = Literal::Kind::kProperty;
    lit.id = p;
    if (lit.args.size() != 1 || lit.args[0].kind == Term::Kind::kWildcard) {
      throw ParseError("action " + act.name + ": property test needs one object in '" + text + "'");
    }
  } else {
    throw ParseError("action " + act.name + ": unknown relation or property '" + name + "'");
  }
  return lit;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

std::shared_ptr<const DomainSchema> parse_schema(const json& j) {
  try {
    auto schema = std::make_shared<DomainSchema>();
    schema->name = j.at("name").get<std::string>();
    schema->max_objects = j.value("max_objects", kDefaultMaxObjects);
    schema->robot_id = j.value("robot", std::string("robot"));
    schema->states = string_list(j, "states");
    schema->properties = string_list(j, "properties");
    if (schema->states.size() != kStateChannels) {
      throw ParseError("schema must declare exactly " + std::to_string(kStateChannels) +
                       " state channels");
    }
    if (schema->properties.size() != kPropertyCount) {
      throw ParseError("schema must declare exactly " + std::to_string(kPropertyCount) +
                       " properties");
    }
    schema->relations = string_list(j, "relations");
    if (schema->relations.size() != kBinaryRelations) {
      throw ParseError("schema must declare exactly " + std::to_string(kBinaryRelations) +
                       " binary relations");
    }
    for (const auto& s : schema->states) schema->relations.push_back("state" + s);

    for (const auto& [token, body] : j.at("classes").items()) {
      ObjectClass c;
      c.token = token;
      for (const auto& p : string_list(body, "properties")) {
        int i = schema->property_index(p);
        if (i < 0) throw ParseError("class " + token + ": unknown property '" + p + "'");
        c.properties.set(std::size_t(i));
      }
      for (const auto& s : string_list(body, "states")) {
        int i = schema->state_index(s);
        if (i < 0) throw ParseError("class " + token + ": unknown state '" + s + "'");
        c.states.set(std::size_t(i));
      }
      schema->classes.emplace(token, c);
    }

    schema->grammar.resize(schema->relations.size());
    const json& grammar = j.at("grammar");
    for (int r = 0; r < kBinaryRelations; ++r) {
      const auto& rule = grammar.at(schema->relations[std::size_t(r)]);
      schema->grammar[std::size_t(r)] = GrammarRule{parse_slot(*schema, rule.at(0)),
                                                    parse_slot(*schema, rule.at(1))};
    }
    for (int c = 0; c < kStateChannels; ++c) {
      schema->grammar[std::size_t(schema->unary_relation(c))] =
          GrammarRule{{SlotRule::Kind::kState, c}, {SlotRule::Kind::kNone, -1}};
    }

    for (const auto& a : j.at("actions")) {
      ActionSchema act;
      act.name = a.at("name").get<std::string>();
      act.params = string_list(a, "params");
      for (const auto& t : string_list(a, "pre")) act.pre.push_back(parse_literal(*schema, act, t));
      for (const auto& t : string_list(a, "add")) act.add.push_back(parse_literal(*schema, act, t));
      for (const auto& t : string_list(a, "del")) act.del.push_back(parse_literal(*schema, act, t));
      for (const auto& lit : act.add) {
        if (lit.kind != Literal::Kind::kRelation || lit.negated) {
          throw ParseError("action " + act.name + ": additions must be positive relations");
        }
        for (const auto& t : lit.args) {
          if (t.kind == Term::Kind::kWildcard) {
            throw ParseError("action " + act.name + ": wildcard in addition '" + lit.text + "'");
          }
        }
        for (const auto& d : act.del) {
          if (d.text == lit.text) {
            throw ParseError("action " + act.name + " both adds and removes " + lit.text);
          }
        }
      }
      for (const auto& lit : act.del) {
        if (lit.kind != Literal::Kind::kRelation || lit.negated) {
          throw ParseError("action " + act.name + ": removals must be positive relations");
        }
      }
      schema->actions.push_back(std::move(act));
    }

    if (j.contains("scene")) {
      for (const auto& o : j.at("scene")) {
        auto id = o.at(0).get<std::string>();
        auto cls = o.at(1).get<std::string>();
        if (!schema->classes.count(cls)) {
          throw ParseError("scene object " + id + ": unknown class '" + cls + "'");
        }
        schema->scene.emplace_back(std::move(id), std::move(cls));
      }
    }
    return schema;
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::shared_ptr<const DomainSchema> load_schema(const std::filesystem::path& path) {
  return parse_schema(read_json_file(path));
}

std::shared_ptr<const Universe> scene_universe(const std::shared_ptr<const DomainSchema>& schema) {
  return Universe::make(schema, schema->scene);
}

WorldState state_from_json(const json& j, const std::shared_ptr<const DomainSchema>& schema,
                           const std::shared_ptr<const Universe>& universe) {
  try {
    std::vector<std::pair<std::string, std::string>> objs;
    for (const auto& o : j.at("objects")) {
      objs.emplace_back(o.at("id").get<std::string>(), o.at("class").get<std::string>());
    }
    std::shared_ptr<const Universe> u = universe;
    if (u) {
      auto fresh = Universe::make(schema, objs);
      if (!fresh->same_objects(*u)) {
        throw DomainMismatch("state object list differs from the demonstration's universe");
      }
    } else {
      u = Universe::make(schema, objs);
    }
    WorldState s(u);
    for (const auto& o : j.at("objects")) {
      ObjIndex idx = u->require(o.at("id").get<std::string>());
      for (const auto& st : string_list(o, "states")) {
        int c = schema->state_index(st);
        if (c < 0) throw ParseError("unknown state '" + st + "'");
        s.insert(Predicate{std::uint8_t(schema->unary_relation(c)), idx, kNoObject});
      }
    }
    if (j.contains("relations")) {
      for (const auto& r : j.at("relations")) {
        auto name = r.at(0).get<std::string>();
        int rel = schema->relation_index(name);
        if (rel < 0) throw ParseError("unknown relation '" + name + "'");
        std::size_t arity = schema->is_unary(rel) ? 1 : 2;
        if (r.size() != arity + 1) throw ParseError("relation '" + name + "' has wrong arity");
        Predicate p{std::uint8_t(rel), u->require(r.at(1).get<std::string>()), kNoObject};
        if (arity == 2) p.object = u->require(r.at(2).get<std::string>());
        s.insert(p);
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("world state: ") + e.what());
  }
}

json state_to_json(const WorldState& s) {
  const Universe& u = s.universe();
  const DomainSchema& schema = s.schema();
  json objects = json::array();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& o = u.object(ObjIndex(i));
    json states = json::array();
    auto bits = s.state_vec(ObjIndex(i));
    for (int c = 0; c < kStateChannels; ++c) {
      if (bits.test(std::size_t(c))) states.push_back(schema.states[std::size_t(c)]);
    }
    objects.push_back({{"id", o.id}, {"class", o.class_token}, {"states", states}});
  }
  json relations = json::array();
  for (const auto& p : s.relations()) {
    if (p.unary()) continue;
    relations.push_back({schema.relations[p.rel], u.object(p.subject).id, u.object(p.object).id});
  }
  return {{"objects", objects}, {"relations", relations}};
}

WorldState load_state(const std::filesystem::path& path,
                      const std::shared_ptr<const DomainSchema>& schema) {
  return state_from_json(read_json_file(path), schema);
}

}  // namespace goalnet
