#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "goalnet/domain.hpp"

namespace goalnet {

inline constexpr int kWordDim = 300;
inline constexpr int kSentenceDim = 384;

using Vec = std::vector<double>;

// Lowercased tokens; separators are anything but letters, digits, '-' and '_'.
std::vector<std::string> tokenize(std::string_view text);

double cosine(const Vec& a, const Vec& b);

// token → 300-d vector. Unknown tokens map to a unit vector drawn from a
// normal distribution seeded by the token's FNV-1a hash.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // `token<TAB>v1 v2 ... v300` per line.
  static EmbeddingTable load(const std::filesystem::path& path);

  void set(const std::string& token, Vec v);
  bool contains(const std::string& token) const { return table_.count(token) > 0; }
  Vec embed(const std::string& token) const;
  const std::unordered_map<std::string, Vec>& entries() const { return table_; }

 private:
  std::unordered_map<std::string, Vec> table_;
};

Vec fallback_embedding(const std::string& token);

class SentenceEncoder {
 public:
  enum class Backend { kMeanProjection, kPrecomputed };

  // Mean of token embeddings times a fixed seeded 384×300 Gaussian map.
  explicit SentenceEncoder(const EmbeddingTable* table, std::uint64_t seed = 384300);

  // `instruction_id<TAB>384 floats` per line; switches to the precomputed
  // backend.
  void load_precomputed(const std::filesystem::path& path);
  Backend backend() const { return backend_; }

  // `id` selects the precomputed vector; the mean backend ignores it.
  Vec encode(const std::string& text, const std::string& id = {}) const;

 private:
  const EmbeddingTable* table_;
  std::vector<double> proj_;  // row-major kSentenceDim × kWordDim
  Backend backend_ = Backend::kMeanProjection;
  std::unordered_map<std::string, Vec> precomputed_;
};

// surface form (possibly multi-word) → class token.
class AliasTable {
 public:
  static AliasTable load(const std::filesystem::path& path);
  void add(const std::string& surface, const std::string& class_token);
  const std::map<std::string, std::string>& entries() const { return map_; }
  std::optional<std::string> target(const std::string& surface) const;

  // Aliases whose target is not a class of any of the given schemas.
  std::vector<std::string> dangling(const std::vector<const DomainSchema*>& schemas) const;

 private:
  std::map<std::string, std::string> map_;
};

// Instruction noun → instance ids, e.g. "coffee-table" → [table_0].
using Groundings = std::map<std::string, std::vector<std::string>>;

struct InstructionObjects {
  std::vector<std::string> tokens;   // surface forms in order of appearance
  std::vector<std::string> classes;  // resolved class token per surface form
  std::vector<std::string> ids;      // grounded instance ids, if any

  // What the goal-object attention embeds: tokens followed by ids.
  std::vector<std::string> all() const;
};

// Greedy longest match (up to three words) against class tokens and aliases
// whose target exists in the schema; a trailing plural 's' is tolerated.
// Groundings are looked up by surface form, then by resolved class; grounded
// ids must exist in `universe` when one is given.
InstructionObjects extract_goal_objects(std::string_view text, const DomainSchema& schema,
                                        const AliasTable& aliases,
                                        const Groundings* groundings = nullptr,
                                        const Universe* universe = nullptr);

}  // namespace goalnet
