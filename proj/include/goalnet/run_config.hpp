#pragma once

// Settings shared by the command-line subcommands, merged from defaults, a
// JSON config file, GOALNET_* environment variables and flags (in rising
// precedence).

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace goalnet {

struct ConfigKey {
  std::string name;            // flag --name (underscores become dashes), env GOALNET_NAME
  nlohmann::json default_value;  // also fixes the type
  std::string help;
};

const std::vector<ConfigKey>& config_keys();
const ConfigKey& config_key(const std::string& name);  // InvalidInput

// Text → value typed like the key's default. Throws InvalidInput.
nlohmann::json parse_config_value(const ConfigKey& key, const std::string& text);

// GOALNET_* entries of an environment block, keyed by config name. Variables
// that name no key are ignored.
std::map<std::string, std::string> config_from_environment(char** envp);

// Unknown keys in the file or flags, or values of the wrong type, throw
// InvalidInput.
nlohmann::json resolve_config(const nlohmann::json& file,
                              const std::map<std::string, std::string>& env,
                              const std::map<std::string, std::string>& flags);

}  // namespace goalnet
