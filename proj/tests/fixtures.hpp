#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "goalnet/domain.hpp"
#include "goalnet/domain_io.hpp"
#include "goalnet/language.hpp"

namespace fixtures {

using namespace goalnet;

inline std::shared_ptr<const DomainSchema> kitchen() {
  static auto s = load_schema(std::string(GOALNET_DATA_DIR) + "/kitchen.json");
  return s;
}

inline std::shared_ptr<const DomainSchema> livingroom() {
  static auto s = load_schema(std::string(GOALNET_DATA_DIR) + "/livingroom.json");
  return s;
}

inline std::vector<std::shared_ptr<const DomainSchema>> both_domains() {
  return {kitchen(), livingroom()};
}

// Class token is the id up to the trailing `_N`.
inline std::shared_ptr<const Universe> universe(const std::shared_ptr<const DomainSchema>& schema,
                                                std::initializer_list<std::string> ids) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& id : ids) {
    auto us = id.rfind('_');
    pairs.emplace_back(id, us == std::string::npos ? id : id.substr(0, us));
  }
  return Universe::make(schema, pairs);
}

inline WorldState state(const std::shared_ptr<const Universe>& u,
                        std::initializer_list<std::string> preds) {
  WorldState s(u);
  for (const auto& p : preds) s.insert(parse_predicate(p, *u));
  return s;
}

inline GroundedAction act(const Universe& u, const std::string& text) { return parse_action(text, u); }

inline Predicate pred(const Universe& u, const std::string& text) { return parse_predicate(text, u); }

// Ten kitchen objects covering every action schema.
inline std::shared_ptr<const Universe> ten_objects() {
  return universe(kitchen(), {"robot", "counter_0", "sink_0", "tap_0", "fridge_0", "microwave_0",
                              "mug_0", "kettle_0", "plate_0", "syrup_0"});
}

// Shared word table, mean-projection sentence encoder and alias list.
struct Lex {
  EmbeddingTable table = EmbeddingTable::load(std::string(GOALNET_DATA_DIR) + "/embeddings.txt");
  AliasTable aliases = AliasTable::load(std::string(GOALNET_DATA_DIR) + "/aliases.tsv");
  SentenceEncoder encoder{&table};
};

inline const Lex& lex() {
  static Lex l;
  return l;
}

}  // namespace fixtures
