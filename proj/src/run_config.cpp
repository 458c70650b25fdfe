#include "goalnet/run_config.hpp"

#include <algorithm>
#include <cctype>

#include "goalnet/error.hpp"

namespace goalnet {

using nlohmann::json;

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", 0, "master seed (generation, initialization, training)"},
      {"data_dir", GOALNET_DATA_DIR, "directory with schemas, embeddings and lexicons"},
      {"domain", "kitchen", "schema used by plan"},
      {"domains", "kitchen,livingroom", "schemas used by gen-data"},
      {"n", 200, "number of generated demonstrations"},
      {"split_seed", 0, "shuffle seed for demos without a recorded split"},
      {"max_epochs", 100, "training epochs"},
      {"lr", 5e-4, "Adam learning rate"},
      {"decay_every", 50, "epochs between learning-rate decays"},
      {"decay_factor", 0.2, "learning-rate multiplier at each decay"},
      {"p_symsim", 0.2, "probability of feeding the SymSim state of the prediction"},
      {"patience", 15, "early-stopping patience in epochs"},
      {"augment", 0.0, "semantic augmentation budget as a fraction of train"},
      {"snapshot_every", 10, "epochs between train/validation GRR snapshots in the log, 0 = never"},
      {"history", "positive", "history encoding: positive or union"},
      {"tau", 0.1, "Gumbel-softmax temperature"},
      {"ablate", "", "comma-separated ablation flags"},
      {"planner_depth", 8, "plan: BFS depth limit"},
      {"planner_expansions", 200000, "plan: node expansion limit"},
      {"rollout_depth", 4, "per-step BFS depth limit during rollouts"},
      {"rollout_expansions", 20000, "per-step node expansion limit during rollouts"},
      {"max_steps", 30, "predict-plan iterations per rollout"},
      {"workers", 1, "evaluation threads"},
      {"split", "test", "evaluated split: train, validation, test or all"},
      {"generalization", "", "verb or paraphrase transform before scoring"},
      {"grr_direction", "prose", "prose (gt within prediction) or formula"},
      {"sentence_vectors", "", "precomputed sentence embeddings file"},
      {"gradcheck_samples", 48, "coordinates checked per tensor"},
  };
  return keys;
}

const ConfigKey& config_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return k;
  }
  throw InvalidInput("unknown setting '" + name + "'");
}

json parse_config_value(const ConfigKey& key, const std::string& text) {
  const json& d = key.default_value;
  try {
    std::size_t used = 0;
    if (d.is_number_integer()) {
      long long v = std::stoll(text, &used);
      if (used == text.size()) return v;
    } else if (d.is_number_float()) {
      double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } else if (d.is_boolean()) {
      if (text == "1" || text == "true") return true;
      if (text == "0" || text == "false") return false;
    } else {
      return text;
    }
  } catch (const std::exception&) {
  }
  throw InvalidInput("bad value '" + text + "' for setting '" + key.name + "'");
}

std::map<std::string, std::string> config_from_environment(char** envp) {
  std::map<std::string, std::string> out;
  const std::string prefix = "GOALNET_";
  for (char** e = envp; e && *e; ++e) {
    std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    bool known = std::any_of(config_keys().begin(), config_keys().end(),
                             [&](const ConfigKey& k) { return k.name == name; });
    if (known) out[name] = entry.substr(eq + 1);
  }
  return out;
}

json resolve_config(const json& file, const std::map<std::string, std::string>& env,
                    const std::map<std::string, std::string>& flags) {
  json out = json::object();
  for (const auto& k : config_keys()) out[k.name] = k.default_value;
  if (!file.is_null()) {
    if (!file.is_object()) throw InvalidInput("config file must hold a JSON object");
    for (const auto& [name, v] : file.items()) {
      const auto& key = config_key(name);
      const json& d = key.default_value;
      bool ok = (d.is_number_integer() && v.is_number_integer()) ||
                (d.is_number_float() && v.is_number()) || (d.is_boolean() && v.is_boolean()) ||
                (d.is_string() && v.is_string());
      if (!ok) throw InvalidInput("config file: wrong type for '" + name + "'");
      out[name] = d.is_number_float() ? json(v.get<double>()) : v;
    }
  }
  for (const auto& [name, text] : env) out[name] = parse_config_value(config_key(name), text);
  for (const auto& [name, text] : flags) out[name] = parse_config_value(config_key(name), text);
  return out;
}

}  // namespace goalnet
