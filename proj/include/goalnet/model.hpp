#pragma once

// The constraint predictor: state encoder, instruction and goal-object
// attention, LSTM history, shared goal layer and six decoder heads.

#include <optional>
#include <random>

#include "goalnet/domain.hpp"
#include "goalnet/language.hpp"
#include "goalnet/nn.hpp"
#include "goalnet/planner.hpp"

namespace goalnet::inline GOALNET_NUMERIC_NS {

struct ModelDims {
  int max_objects = kDefaultMaxObjects;
  int relations = kBinaryRelations + kStateChannels;  // |S|, without NULL
  int properties = kPropertyCount;
  int states = kStateChannels;
  int word = kWordDim;
  int sentence = kSentenceDim;
  int hidden = 128;

  int rel_out() const { return relations + 1; }  // + NULL
  int null_rel() const { return relations; }
  int adjacency() const { return kBinaryRelations * max_objects; }
  int object_feature() const { return properties + states + word + 1; }
  int history_in() const { return relations + 2 * word; }
  int goal_in() const { return 3 * hidden + word; }
};

struct Ablations {
  bool relational = false;            // r_o forced to 0
  bool grounding = false;             // instance ids dropped from O_l
  bool negative = false;              // δ⁻ head always NULL
  bool positive = false;              // δ⁺ head always NULL
  bool temporal = false;              // history context forced to 0
  bool goal_object_attention = false; // l̃_obj forced to 0
  bool instruction_attention = false; // uniform α
  bool grammar_mask = false;          // decode without Ω

  // Flag names: relational-info, instance-grounding, negative-head,
  // positive-head, temporal-context, goal-object-attention,
  // instruction-attention, grammar-mask.
  void set(const std::string& flag);  // throws InvalidInput
  std::vector<std::string> names() const;
};

enum class HistoryMode { kPositive, kUnion };

struct ModelConfig {
  ModelDims dims;
  double tau = 0.1;
  HistoryMode history = HistoryMode::kPositive;
  Ablations ablate;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Everything about one datum that does not change across its steps.
struct DatumInputs {
  std::shared_ptr<const Universe> universe;
  nn::Vec instruction;               // sentence embedding
  std::vector<nn::Vec> goal_objects; // 𝒞(o) for every entry of O_l
  std::vector<nn::Vec> object_embeddings;  // 𝒞(class token) per object
};

struct Lexicon {
  const EmbeddingTable* table = nullptr;
  const SentenceEncoder* encoder = nullptr;
  const AliasTable* aliases = nullptr;
};

DatumInputs prepare_inputs(std::shared_ptr<const Universe> universe, const std::string& instruction,
                           const Groundings* groundings, const Lexicon& lex,
                           const ModelConfig& cfg, const std::string& instruction_id = {});

// Six likelihood vectors (before masking) and the decoded singleton sets.
struct ConstraintPrediction {
  nn::Vec r_plus, o1, o2, r_minus, o3, o4;
  std::optional<Predicate> plus;
  std::optional<Predicate> minus;
  GoalSpec goal() const;
  bool stop() const { return !plus && !minus; }
};

// Likelihoods restricted to `allowed` and renormalized; all zero when nothing
// survives.
nn::Vec masked_distribution(const nn::Vec& p, const std::vector<bool>& allowed);

struct TemporalContext {
  nn::Vec h, c;
};

class GoalNet;

// One datum's unrolled computation. With `record` set, caches are kept and
// backward() accumulates parameter gradients over all steps.
class Episode {
 public:
  Episode(const GoalNet& net, const DatumInputs& in, bool record);
  ~Episode();
  Episode(Episode&&) noexcept;

  // `prev` is the constraint set fed to the history encoder (null or empty at
  // the first step). `target` adds this step's loss. `noise` enables Gumbel
  // noise.
  ConstraintPrediction step(const WorldState& s, const GoalSpec* prev, const GoalSpec* target,
                            std::mt19937_64* noise);
  Real loss() const { return loss_; }
  const TemporalContext& context() const { return ctx_; }
  void backward(GoalNet& net);

 private:
  struct StepCache;
  const GoalNet& net_;
  const DatumInputs& in_;
  bool record_;
  nn::Vec l_pre_, l_;  // instruction projection pre-activation and output
  TemporalContext ctx_;
  std::vector<std::unique_ptr<StepCache>> steps_;
  Real loss_ = 0;
};

class GoalNet {
 public:
  GoalNet(ModelConfig cfg, std::uint64_t seed);
  // Adopts checkpoint parameters; names and shapes must match cfg.
  GoalNet(ModelConfig cfg, nn::ParamSet params);

  const ModelConfig& config() const { return cfg_; }
  const ModelDims& dims() const { return cfg_.dims; }
  nn::ParamSet& params() { return ps_; }
  const nn::ParamSet& params() const { return ps_; }

  // Per-object [p_o, q_o, e_o, r_o].
  std::vector<nn::Vec> encode_state(const DatumInputs& in, const WorldState& s) const;
  nn::Vec project_instruction(const nn::Vec& sentence) const;  // l̃
  // Returns s̃_t and writes the attention weights.
  nn::Vec attend_instruction(const std::vector<nn::Vec>& enc, const nn::Vec& l,
                             std::vector<Real>* alpha = nullptr) const;
  nn::Vec attend_goal_objects(const std::vector<nn::Vec>& objs, const nn::Vec& st,
                              std::vector<Real>* eps = nullptr) const;
  nn::Vec history_input(const GoalSpec* prev, const DatumInputs& in) const;
  TemporalContext encode_history(const nn::Vec& x, const TemporalContext& ctx) const;
  TemporalContext zero_context() const;

  // First- and second-slot masks (Ω plus padding) for relation `rel`.
  std::vector<bool> slot_mask(int rel, Slot slot, const Universe& u) const;

  // Infer-mode decode of a whole instruction through the planner.
  struct RolloutResult {
    RolloutTrace trace;
    std::vector<ConstraintPrediction> predictions;
  };
  RolloutResult infer_rollout(const WorldState& s0, const DatumInputs& in,
                              const PlannerConfig& planner, int max_steps = 30) const;

 private:
  friend class Episode;
  void build();

  ModelConfig cfg_;
  nn::ParamSet ps_;
  nn::Dense rel_, instr_, attn_, task_, obj_attn_, goal_;
  nn::LstmCell hist_;
  nn::Dense heads_[6];  // R⁺, o¹, o², R⁻, o³, o⁴
};

}  // namespace goalnet::inline GOALNET_NUMERIC_NS
