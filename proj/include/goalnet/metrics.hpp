#pragma once

// Scores for predicted rollouts against demonstrations, the evaluation
// driver and the generalization test-set transforms.

#include <functional>
#include <string>

#include "goalnet/data.hpp"
#include "goalnet/model.hpp"
#include "goalnet/planner.hpp"

namespace goalnet {

// (R(s_T) \ R(s₀), R(s₀) \ R(s_T)). Throws DomainMismatch across universes.
GoalSpec aggregate_predicates(const WorldState& s0, const WorldState& sT);

// Jaccard over both signs; 1 when all four sets are empty.
double sji(const GoalSpec& gt, const GoalSpec& pred);
// 1 − Levenshtein / max length; 1 when both are empty.
double ied(const std::vector<GroundedAction>& gt, const std::vector<GroundedAction>& pred);
// 1 iff gt ⊆ pred on both signs. `formula_direction` checks pred ⊆ gt instead.
int grr(const GoalSpec& gt, const GoalSpec& pred, bool formula_direction = false);
// Mean of the per-sign F1 (1 when both sides of a sign are empty).
double f1(const GoalSpec& gt, const GoalSpec& pred);

struct DatumScore {
  std::string id;
  double sji = 0, ied = 0, f1 = 0;
  int grr = 0;
  int size = 0;         // |Δ̂⁺| + |Δ̂⁻|
  bool failed = false;  // some step could not be planned
  int steps = 0;
  nlohmann::json trace; // kept for GRR = 0 data
};

struct MeanScores {
  int count = 0;
  double sji = 0, ied = 0, f1 = 0, grr = 0;
};

struct EvalReport {
  std::vector<DatumScore> per_datum;  // dataset order
  MeanScores mean;
  std::map<int, MeanScores> buckets;  // by ground-truth aggregate size

  nlohmann::json to_json() const;
  std::string table(const std::string& label = "model") const;
};

using RolloutFn = std::function<RolloutTrace(const Demonstration&)>;

// Rolls out the trained network through the planner.
RolloutFn model_rollout(const GoalNet& net, const Lexicon& lex, const PlannerConfig& planner,
                        int max_steps = 30);
// Replays the demonstration's own per-step constraints.
RolloutFn oracle_rollout(const PlannerConfig& planner, int max_steps = 30);

// `workers` OpenMP threads over data; means are reduced in dataset order so
// the report does not depend on the worker count.
EvalReport evaluate(const std::vector<const Demonstration*>& demos, const RolloutFn& rollout,
                    int workers = 1, bool grr_formula_direction = false);

nlohmann::json trace_to_json(const Demonstration& d, const RolloutTrace& t);

struct RewriteLexicon {
  std::vector<std::pair<std::string, std::string>> verbs;        // seen → unseen
  std::vector<std::pair<std::string, std::string>> paraphrases;  // phrase → phrase
  // verb_synonyms.tsv and paraphrases.tsv, tab separated.
  static RewriteLexicon load_dir(const std::filesystem::path& dir);
};

enum class GeneralizationMode { kVerb, kParaphrase };
GeneralizationMode generalization_mode_from_string(const std::string& s);  // InvalidInput

struct GeneralizationSet {
  std::vector<Demonstration> demos;
  int skipped = 0;  // no applicable rewrite
  std::vector<std::string> introduced_verbs;
  // Introduced verbs that occur in some training instruction (must be empty).
  std::vector<std::string> seen_in_train;
  bool unseen_check_passed() const { return seen_in_train.empty(); }
};

// Verb mode swaps the first known verb for its unseen synonym; paraphrase
// mode applies every matching phrase rewrite. States and actions are copied
// unchanged. `train` is scanned for the unseen-verb check.
GeneralizationSet make_generalization_set(const std::vector<const Demonstration*>& demos,
                                          GeneralizationMode mode, const RewriteLexicon& lexicon,
                                          const std::vector<const Demonstration*>& train);

}  // namespace goalnet
