#include "goalnet/language.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace goalnet {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '_') {
      cur.push_back(char(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double cosine(const Vec& a, const Vec& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

Vec parse_floats(std::istream& in, std::size_t expect, const std::string& where) {
  Vec v;
  v.reserve(expect);
  double x;
  while (in >> x) {
    if (!std::isfinite(x)) throw ParseError(where + ": non-finite value");
    v.push_back(x);
  }
  if (v.size() != expect) {
    throw ParseError(where + ": expected " + std::to_string(expect) + " values, got " +
                     std::to_string(v.size()));
  }
  return v;
}

}  // namespace

Vec fallback_embedding(const std::string& token) {
  std::mt19937_64 rng(fnv1a(token));
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(kWordDim);
  double norm = 0;
  for (auto& x : v) {
    x = n(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file " + path.string());
  EmbeddingTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing tab");
    }
    std::istringstream rest(line.substr(tab + 1));
    t.table_[line.substr(0, tab)] =
        parse_floats(rest, kWordDim, path.string() + ":" + std::to_string(lineno));
  }
  return t;
}

void EmbeddingTable::set(const std::string& token, Vec v) {
  if (v.size() != std::size_t(kWordDim)) throw InvalidInput("embedding must have 300 entries");
  table_[token] = std::move(v);
}

Vec EmbeddingTable::embed(const std::string& token) const {
  auto it = table_.find(token);
  if (it != table_.end()) return it->second;
  return fallback_embedding(token);
}

SentenceEncoder::SentenceEncoder(const EmbeddingTable* table, std::uint64_t seed)
    : table_(table), proj_(std::size_t(kSentenceDim) * kWordDim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(double(kWordDim)));
  for (auto& x : proj_) x = n(rng);
}

void SentenceEncoder::load_precomputed(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sentence-vector file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing tab");
    }
    std::istringstream rest(line.substr(tab + 1));
    precomputed_[line.substr(0, tab)] =
        parse_floats(rest, kSentenceDim, path.string() + ":" + std::to_string(lineno));
  }
  backend_ = Backend::kPrecomputed;
}

Vec SentenceEncoder::encode(const std::string& text, const std::string& id) const {
  auto tokens = tokenize(text);
  if (tokens.empty()) throw InvalidInput("cannot embed an empty instruction");
  if (backend_ == Backend::kPrecomputed) {
    auto it = precomputed_.find(id);
    if (it == precomputed_.end()) throw InvalidInput("no precomputed vector for '" + id + "'");
    return it->second;
  }
  Vec mean(kWordDim, 0.0);
  for (const auto& t : tokens) {
    Vec e = table_ ? table_->embed(t) : fallback_embedding(t);
    for (int i = 0; i < kWordDim; ++i) mean[std::size_t(i)] += e[std::size_t(i)];
  }
  for (auto& x : mean) x /= double(tokens.size());
  Vec out(kSentenceDim, 0.0);
  for (int r = 0; r < kSentenceDim; ++r) {
    const double* row = proj_.data() + std::size_t(r) * kWordDim;
    double acc = 0;
    for (int c = 0; c < kWordDim; ++c) acc += row[c] * mean[std::size_t(c)];
    out[std::size_t(r)] = acc;
  }
  return out;
}

AliasTable AliasTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open alias file " + path.string());
  AliasTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing tab");
    }
    t.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return t;
}

void AliasTable::add(const std::string& surface, const std::string& class_token) {
  std::string key;
  for (const auto& tok : tokenize(surface)) key += (key.empty() ? "" : " ") + tok;
  map_[key] = class_token;
}

std::optional<std::string> AliasTable::target(const std::string& surface) const {
  auto it = map_.find(surface);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> AliasTable::dangling(const std::vector<const DomainSchema*>& schemas) const {
  std::vector<std::string> out;
  for (const auto& [surface, target] : map_) {
    bool found = false;
    for (const auto* s : schemas) found = found || s->classes.count(target) > 0;
    if (!found) out.push_back(surface);
  }
  return out;
}

std::vector<std::string> InstructionObjects::all() const {
  std::vector<std::string> out = tokens;
  out.insert(out.end(), ids.begin(), ids.end());
  return out;
}

InstructionObjects extract_goal_objects(std::string_view text, const DomainSchema& schema,
                                        const AliasTable& aliases, const Groundings* groundings,
                                        const Universe* universe) {
  auto words = tokenize(text);
  auto resolve = [&](const std::string& phrase) -> std::optional<std::string> {
    if (schema.classes.count(phrase) && phrase != schema.robot_id) return phrase;
    if (auto t = aliases.target(phrase); t && schema.classes.count(*t)) return t;
    return std::nullopt;
  };
  InstructionObjects out;
  for (std::size_t i = 0; i < words.size();) {
    std::size_t matched = 0;
    for (std::size_t n = std::min<std::size_t>(3, words.size() - i); n >= 1 && !matched; --n) {
      std::string phrase;
      for (std::size_t k = 0; k < n; ++k) phrase += (k ? " " : "") + words[i + k];
      auto cls = resolve(phrase);
      if (!cls && phrase.size() > 2 && phrase.back() == 's') cls = resolve(phrase.substr(0, phrase.size() - 1));
      if (cls) {
        out.tokens.push_back(phrase);
        out.classes.push_back(*cls);
        matched = n;
      }
    }
    i += matched ? matched : 1;
  }
  if (groundings) {
    for (std::size_t k = 0; k < out.tokens.size(); ++k) {
      const auto& tok = out.tokens[k];
      // surface form first, then the class it resolved to (paraphrases)
      auto it = groundings->find(tok);
      if (it == groundings->end()) it = groundings->find(out.classes[k]);
      if (it == groundings->end()) continue;
      for (const auto& id : it->second) {
        if (universe && !universe->find(id)) {
          throw InvalidInput("grounding for '" + tok + "' names unknown object '" + id + "'");
        }
        out.ids.push_back(id);
      }
    }
  }
  return out;
}

}  // namespace goalnet
