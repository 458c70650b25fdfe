#include "goalnet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <omp.h>

#include "goalnet/domain_io.hpp"

namespace goalnet {

using nlohmann::json;

GoalSpec aggregate_predicates(const WorldState& s0, const WorldState& sT) {
  if (!s0.universe().same_objects(sT.universe())) {
    throw DomainMismatch("aggregate over states of different universes");
  }
  return relation_diff(s0, sT);
}

namespace {

// Both inputs sorted and unique (GoalSpec guarantees it).
std::size_t intersection_size(const std::vector<Predicate>& a, const std::vector<Predicate>& b) {
  std::size_t n = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return n;
}

double side_f1(const std::vector<Predicate>& gt, const std::vector<Predicate>& pred) {
  if (gt.empty() && pred.empty()) return 1;
  if (gt.empty() || pred.empty()) return 0;
  double tp = double(intersection_size(gt, pred));
  if (tp == 0) return 0;
  double p = tp / double(pred.size()), r = tp / double(gt.size());
  return 2 * p * r / (p + r);
}

}  // namespace

double sji(const GoalSpec& gt, const GoalSpec& pred) {
  std::size_t ip = intersection_size(gt.plus, pred.plus);
  std::size_t im = intersection_size(gt.minus, pred.minus);
  std::size_t up = gt.plus.size() + pred.plus.size() - ip;
  std::size_t um = gt.minus.size() + pred.minus.size() - im;
  if (up + um == 0) return 1;
  return double(ip + im) / double(up + um);
}

double ied(const std::vector<GroundedAction>& gt, const std::vector<GroundedAction>& pred) {
  const std::size_t n = gt.size(), m = pred.size();
  if (n == 0 && m == 0) return 1;
  std::vector<std::size_t> row(m + 1), next(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    next[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      next[j] = std::min({row[j] + 1, next[j - 1] + 1, row[j - 1] + (gt[i - 1] == pred[j - 1] ? 0 : 1)});
    }
    std::swap(row, next);
  }
  return 1.0 - double(row[m]) / double(std::max(n, m));
}

int grr(const GoalSpec& gt, const GoalSpec& pred, bool formula_direction) {
  const GoalSpec& sub = formula_direction ? pred : gt;
  const GoalSpec& sup = formula_direction ? gt : pred;
  bool ok = std::includes(sup.plus.begin(), sup.plus.end(), sub.plus.begin(), sub.plus.end()) &&
            std::includes(sup.minus.begin(), sup.minus.end(), sub.minus.begin(), sub.minus.end());
  return ok ? 1 : 0;
}

double f1(const GoalSpec& gt, const GoalSpec& pred) {
  return (side_f1(gt.plus, pred.plus) + side_f1(gt.minus, pred.minus)) / 2;
}

// ---------------------------------------------------------------------------

namespace {

json spec_json(const GoalSpec& g, const Universe& u) {
  json plus = json::array(), minus = json::array();
  for (const auto& p : g.plus) plus.push_back(format_predicate(p, u));
  for (const auto& p : g.minus) minus.push_back(format_predicate(p, u));
  return {{"plus", plus}, {"minus", minus}};
}

json means_json(const MeanScores& m) {
  return {{"count", m.count}, {"sji", m.sji}, {"ied", m.ied}, {"f1", m.f1}, {"grr", m.grr}};
}

void add_to(MeanScores& m, const DatumScore& s) {
  ++m.count;
  m.sji += s.sji;
  m.ied += s.ied;
  m.f1 += s.f1;
  m.grr += s.grr;
}

void finish(MeanScores& m) {
  if (m.count == 0) return;
  m.sji /= m.count;
  m.ied /= m.count;
  m.f1 /= m.count;
  m.grr /= m.count;
}

}  // namespace

json trace_to_json(const Demonstration& d, const RolloutTrace& t) {
  const Universe& u = *d.universe();
  json steps = json::array();
  for (const auto& s : t.steps) {
    json actions = json::array();
    for (const auto& a : s.actions) actions.push_back(format_action(a, u));
    json step = spec_json(s.prediction, u);
    step["actions"] = actions;
    if (s.plan_failed) step["planner"] = to_string(s.status);
    steps.push_back(step);
  }
  json final_rel = json::array();
  for (const auto& p : t.states.back().relations()) final_rel.push_back(format_predicate(p, u));
  return {{"id", d.id},          {"instruction", d.instruction}, {"steps", steps},
          {"stopped", t.stopped}, {"failed", t.failed},          {"final_state", final_rel}};
}

json EvalReport::to_json() const {
  json per = json::array();
  json failures = json::array();
  for (const auto& s : per_datum) {
    per.push_back({{"id", s.id},
                   {"sji", s.sji},
                   {"ied", s.ied},
                   {"f1", s.f1},
                   {"grr", s.grr},
                   {"size", s.size},
                   {"steps", s.steps},
                   {"planner_failed", s.failed}});
    if (!s.trace.is_null()) failures.push_back(s.trace);
  }
  json b = json::array();
  for (const auto& [size, m] : buckets) {
    json e = means_json(m);
    e["size"] = size;
    b.push_back(e);
  }
  return {{"mean", means_json(mean)}, {"buckets", b}, {"per_datum", per}, {"failures", failures}};
}

std::string EvalReport::table(const std::string& label) const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %6s %6s %6s %6s %6s\n", "", "n", "SJI", "IED", "F1", "GRR");
  out << buf;
  auto row = [&](const std::string& name, const MeanScores& m) {
    std::snprintf(buf, sizeof buf, "%-16s %6d %6.3f %6.3f %6.3f %6.3f\n", name.c_str(), m.count,
                  m.sji, m.ied, m.f1, m.grr);
    out << buf;
  };
  row(label, mean);
  for (const auto& [size, m] : buckets) row("  |gt| = " + std::to_string(size), m);
  return out.str();
}

RolloutFn model_rollout(const GoalNet& net, const Lexicon& lex, const PlannerConfig& planner,
                        int max_steps) {
  return [&net, lex, planner, max_steps](const Demonstration& d) {
    auto in = prepare_inputs(d.universe(), d.instruction, d.grounding.empty() ? nullptr : &d.grounding,
                             lex, net.config(), d.id);
    return net.infer_rollout(d.initial(), in, planner, max_steps).trace;
  };
}

RolloutFn oracle_rollout(const PlannerConfig& planner, int max_steps) {
  return [planner, max_steps](const Demonstration& d) {
    auto sup = extract_supervision(d);
    return rollout_execute(
        d.initial(),
        [&](const WorldState&, int t) { return std::size_t(t) < sup.size() ? sup[std::size_t(t)] : GoalSpec{}; },
        planner, max_steps);
  };
}

EvalReport evaluate(const std::vector<const Demonstration*>& demos, const RolloutFn& rollout,
                    int workers, bool grr_formula_direction) {
  if (workers < 1) throw InvalidInput("worker count must be at least 1");
  EvalReport rep;
  rep.per_datum.resize(demos.size());
  std::vector<std::string> errors(demos.size());
  const long n = long(demos.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < n; ++i) {
    const Demonstration& d = *demos[std::size_t(i)];
    try {
      RolloutTrace t = rollout(d);
      GoalSpec gt = aggregate_predicates(d.initial(), d.final_state());
      GoalSpec pred = aggregate_predicates(d.initial(), t.states.back());
      DatumScore& s = rep.per_datum[std::size_t(i)];
      s.id = d.id;
      s.sji = sji(gt, pred);
      s.ied = ied(d.actions, t.actions);
      s.f1 = f1(gt, pred);
      s.grr = grr(gt, pred, grr_formula_direction);
      s.size = int(gt.plus.size() + gt.minus.size());
      s.failed = t.failed;
      s.steps = int(t.steps.size());
      if (s.grr == 0) s.trace = trace_to_json(d, t);
    } catch (const std::exception& e) {
      errors[std::size_t(i)] = d.id + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw InvalidInput("evaluation failed on " + e);
  }

  for (const auto& s : rep.per_datum) {
    add_to(rep.mean, s);
    add_to(rep.buckets[s.size], s);
  }
  finish(rep.mean);
  for (auto& [size, m] : rep.buckets) finish(m);
  return rep;
}

// ---------------------------------------------------------------------------
// generalization sets

namespace {

std::vector<std::pair<std::string, std::string>> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(no) + ": expected two tab-separated fields");
    }
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::string replace_first_word(const std::string& text, const std::string& from, const std::string& to) {
  std::regex re("\\b" + from + "\\b");
  return std::regex_replace(text, re, to, std::regex_constants::format_first_only);
}

}  // namespace

RewriteLexicon RewriteLexicon::load_dir(const std::filesystem::path& dir) {
  RewriteLexicon lex;
  lex.verbs = read_pairs(dir / "verb_synonyms.tsv");
  lex.paraphrases = read_pairs(dir / "paraphrases.tsv");
  return lex;
}

GeneralizationMode generalization_mode_from_string(const std::string& s) {
  if (s == "verb") return GeneralizationMode::kVerb;
  if (s == "paraphrase") return GeneralizationMode::kParaphrase;
  throw InvalidInput("generalization mode must be verb or paraphrase, got '" + s + "'");
}

GeneralizationSet make_generalization_set(const std::vector<const Demonstration*>& demos,
                                          GeneralizationMode mode, const RewriteLexicon& lexicon,
                                          const std::vector<const Demonstration*>& train) {
  GeneralizationSet out;
  std::set<std::string> introduced;
  for (const auto* src : demos) {
    std::string text = src->instruction;
    bool changed = false;
    if (mode == GeneralizationMode::kVerb) {
      // the verb is the first token that has a synonym
      for (const auto& tok : tokenize(text)) {
        auto it = std::find_if(lexicon.verbs.begin(), lexicon.verbs.end(),
                               [&](const auto& p) { return p.first == tok; });
        if (it == lexicon.verbs.end()) continue;
        text = replace_first_word(text, it->first, it->second);
        introduced.insert(it->second);
        changed = true;
        break;
      }
    } else {
      std::string padded = " " + text + " ";
      for (const auto& [from, to] : lexicon.paraphrases) {
        auto pos = padded.find(from);
        if (pos == std::string::npos) continue;
        padded.replace(pos, from.size(), to);
        changed = true;
      }
      text = padded.substr(1, padded.size() - 2);
    }
    if (!changed) {
      ++out.skipped;
      continue;
    }
    Demonstration d = *src;
    d.instruction = text;
    d.id = src->id + (mode == GeneralizationMode::kVerb ? "-verb" : "-para");
    out.demos.push_back(std::move(d));
  }
  out.introduced_verbs.assign(introduced.begin(), introduced.end());

  std::set<std::string> train_tokens;
  for (const auto* d : train) {
    for (const auto& t : tokenize(d->instruction)) train_tokens.insert(t);
  }
  for (const auto& v : out.introduced_verbs) {
    if (train_tokens.count(v)) out.seen_in_train.push_back(v);
  }
  return out;
}

}  // namespace goalnet
