#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "goalnet/domain.hpp"

namespace goalnet {

using json = nlohmann::json;

// Schema file sections: name, max_objects, states, properties, relations,
// classes, grammar, actions, scene. Action entries carry name, params, pre[],
// add[], del[] written as literal templates.
std::shared_ptr<const DomainSchema> parse_schema(const json& j);
std::shared_ptr<const DomainSchema> load_schema(const std::filesystem::path& path);

// Universe of the schema's default scene.
std::shared_ptr<const Universe> scene_universe(const std::shared_ptr<const DomainSchema>& schema);

// World-state file: {"objects": [{"id", "class", "states": [...]}],
//                    "relations": [["OnTop", "mug_0", "counter_0"], ...]}.
// When `universe` is given, the object list must match it and the pointer is
// reused so states of one demonstration share their universe.
WorldState state_from_json(const json& j, const std::shared_ptr<const DomainSchema>& schema,
                           const std::shared_ptr<const Universe>& universe = nullptr);
json state_to_json(const WorldState& s);

WorldState load_state(const std::filesystem::path& path,
                      const std::shared_ptr<const DomainSchema>& schema);

json read_json_file(const std::filesystem::path& path);

}  // namespace goalnet
