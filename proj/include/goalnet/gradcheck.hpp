#pragma once

// Finite-difference check of the whole network on a fixed three-object
// kitchen datum: three steps covering binary, unary, negative and empty
// constraint sets, so every head and the LSTM recurrence carry gradient.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace goalnet {

struct FixtureGradcheckOptions {
  std::filesystem::path data_dir;    // kitchen.json, embeddings.txt, aliases.tsv
  std::vector<std::string> ablate;   // ablation flag names
  bool union_history = false;
  std::uint64_t init_seed = 17;
  std::uint64_t sample_seed = 5;
  double eps = 1e-4;
  int samples_per_tensor = 48;
  bool gumbel_noise = false;         // re-seeded per evaluation when on
  bool corrupt_backward = false;     // test hook: perturbs one analytic gradient
};

struct FixtureGradcheckResult {
  std::string precision;  // "binary64" or "extended"
  double loss = 0;
  double max_rel_error = 0;
  std::map<std::string, double> per_tensor;
  std::size_t checked = 0;
};

// Same sources and initial weights, evaluated in double and in long double.
FixtureGradcheckResult fixture_gradcheck_binary64(const FixtureGradcheckOptions& opt);
FixtureGradcheckResult fixture_gradcheck_extended(const FixtureGradcheckOptions& opt);

}  // namespace goalnet
