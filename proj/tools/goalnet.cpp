// goalnet: plan, gen-data, train, eval, gradcheck, inspect.
//
// Exit codes: 0 ok, 2 usage, 3 input parse, 4 planner failure, 5 numeric.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "goalnet/data.hpp"
#include "goalnet/domain_io.hpp"
#include "goalnet/gradcheck.hpp"
#include "goalnet/metrics.hpp"
#include "goalnet/run_config.hpp"
#include "goalnet/train.hpp"

extern char** environ;

namespace fs = std::filesystem;
using nlohmann::json;
using namespace goalnet;

namespace {

enum Exit { kOk = 0, kUsage = 2, kParse = 3, kPlanner = 4, kNumeric = 5 };

// Flags a subcommand accepts for config keys, remembered so that only the
// ones actually given override the file and environment.
struct KeyFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* sub, std::initializer_list<const char*> names) {
    for (const char* n : names) {
      const auto& key = config_key(n);
      std::string flag = "--" + key.name;
      std::replace(flag.begin(), flag.end(), '_', '-');
      options[key.name] = sub->add_option(flag, values[key.name], key.help);
    }
  }
  std::map<std::string, std::string> given() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, opt] : options) {
      if (opt->count() > 0) out[name] = values.at(name);
    }
    return out;
  }
};

struct Context {
  std::string config_file;
  KeyFlags flags;
  json cfg;

  void resolve() {
    json file;
    if (!config_file.empty()) file = read_json_file(config_file);
    cfg = resolve_config(file, config_from_environment(environ), flags.given());
  }
  fs::path data_dir() const { return cfg["data_dir"].get<std::string>(); }
  std::uint64_t seed() const { return cfg["seed"].get<std::uint64_t>(); }
  PlannerConfig rollout_planner() const {
    PlannerConfig p{cfg["rollout_depth"].get<int>(), cfg["rollout_expansions"].get<std::int64_t>()};
    p.validate();
    return p;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

struct Lex {
  EmbeddingTable table;
  AliasTable aliases;
  std::unique_ptr<SentenceEncoder> encoder;
  Lexicon view() const { return {&table, encoder.get(), &aliases}; }
};

std::unique_ptr<Lex> load_lexicon(const Context& ctx) {
  auto lex = std::make_unique<Lex>();
  lex->table = EmbeddingTable::load(ctx.data_dir() / "embeddings.txt");
  lex->aliases = AliasTable::load(ctx.data_dir() / "aliases.tsv");
  lex->encoder = std::make_unique<SentenceEncoder>(&lex->table);
  auto pre = ctx.cfg["sentence_vectors"].get<std::string>();
  if (!pre.empty()) lex->encoder->load_precomputed(pre);
  return lex;
}

ModelConfig model_config(const Context& ctx) {
  ModelConfig mc;
  mc.tau = ctx.cfg["tau"].get<double>();
  auto h = ctx.cfg["history"].get<std::string>();
  if (h != "positive" && h != "union") throw InvalidInput("history must be positive or union");
  mc.history = h == "union" ? HistoryMode::kUnion : HistoryMode::kPositive;
  for (const auto& a : split_list(ctx.cfg["ablate"].get<std::string>())) mc.ablate.set(a);
  return mc;
}

TrainConfig train_config(const Context& ctx) {
  TrainConfig tc;
  tc.lr = ctx.cfg["lr"].get<double>();
  tc.decay_factor = ctx.cfg["decay_factor"].get<double>();
  tc.decay_every = ctx.cfg["decay_every"].get<int>();
  tc.max_epochs = ctx.cfg["max_epochs"].get<int>();
  tc.p_symsim = ctx.cfg["p_symsim"].get<double>();
  tc.seed = ctx.seed();
  tc.patience = ctx.cfg["patience"].get<int>();
  tc.augment = ctx.cfg["augment"].get<double>();
  tc.snapshot_every = ctx.cfg["snapshot_every"].get<int>();
  tc.validate();
  return tc;
}

// ---------------------------------------------------------------------------

int cmd_plan(Context& ctx, const std::string& state_file, const std::vector<std::string>& goals,
             const std::string& output) {
  auto schema = load_schema(ctx.data_dir() / (ctx.cfg["domain"].get<std::string>() + ".json"));
  WorldState s = load_state(state_file, schema);
  std::vector<Predicate> plus, minus;
  for (const auto& g : goals) {
    std::string text = g;
    bool neg = !text.empty() && text[0] == '!';
    if (neg) text = text.substr(1);
    (neg ? minus : plus).push_back(parse_predicate(text, s.universe()));
  }
  GoalSpec goal = GoalSpec::make(plus, minus);
  PlannerConfig pc{ctx.cfg["planner_depth"].get<int>(), ctx.cfg["planner_expansions"].get<std::int64_t>()};
  pc.validate();
  PlanResult r = plan(s, goal, pc);

  json actions = json::array();
  for (const auto& a : r.actions) {
    actions.push_back(format_action(a, s.universe()));
    std::cout << format_action(a, s.universe()) << "\n";
  }
  json out = {{"config", ctx.cfg},
              {"status", to_string(r.status)},
              {"actions", actions},
              {"expanded_nodes", r.expanded_nodes}};
  if (r.ok()) out["final_state"] = state_to_json(r.final_state);
  if (!output.empty()) write_json(output, out);
  std::cerr << to_string(r.status) << ": " << r.actions.size() << " action(s), " << r.expanded_nodes
            << " node(s) expanded\n";
  return r.ok() ? kOk : kPlanner;
}

int cmd_gen_data(Context& ctx, const std::string& output) {
  std::vector<std::shared_ptr<const DomainSchema>> schemas;
  for (const auto& d : split_list(ctx.cfg["domains"].get<std::string>())) {
    schemas.push_back(load_schema(ctx.data_dir() / (d + ".json")));
  }
  int n = ctx.cfg["n"].get<int>();
  Dataset ds;
  ds.demos = synth_generate(schemas, ctx.seed(), n);
  assign_splits(ds, ctx.cfg["split_seed"].get<std::uint64_t>());
  save_dataset(output, ds.demos, {{"generator", "synth_generate"}, {"config", ctx.cfg}});
  std::cerr << "wrote " << ds.demos.size() << " demonstrations (" << ds.train.size() << " train, "
            << ds.validation.size() << " validation, " << ds.test.size() << " test) to " << output
            << "\n";
  return kOk;
}

int cmd_train(Context& ctx, const std::string& dataset, const std::string& out_dir, bool dry_run) {
  auto reg = SchemaRegistry::load_dir(ctx.data_dir());
  Dataset ds = load_dataset(dataset, reg, ctx.cfg["split_seed"].get<std::uint64_t>());
  ModelConfig mc = model_config(ctx);
  TrainConfig tc = train_config(ctx);
  auto lex = load_lexicon(ctx);
  auto train_set = ds.select(Split::kTrain);
  auto val_set = ds.select(Split::kValidation);
  if (train_set.empty()) throw InvalidInput("dataset has no training demonstrations");
  // Inputs are built once up front, which also checks them against the model.
  for (const auto* d : ds.select(Split::kTrain)) {
    prepare_inputs(d->universe(), d->instruction, d->grounding.empty() ? nullptr : &d->grounding,
                   lex->view(), mc, d->id);
  }
  std::cerr << "dataset ok: " << train_set.size() << " train, " << val_set.size() << " validation, "
            << ds.test.size() << " test";
  if (ds.moved_to_train) std::cerr << " (" << ds.moved_to_train << " moved to train)";
  std::cerr << "\n";
  if (dry_run) return kOk;

  AugmentResult aug;
  if (tc.augment > 0) {
    aug = augment(train_set, lex->table, reg, tc.augment, tc.seed);
    for (const auto& d : aug.demos) train_set.push_back(&d);
    std::cerr << "augmentation added " << aug.demos.size() << " demonstrations\n";
  }

  fs::create_directories(out_dir);
  std::ofstream log(fs::path(out_dir) / "train_log.jsonl");
  if (!log) throw InvalidInput("cannot write the training log in " + out_dir);
  GoalNet net(mc, tc.seed);
  const PlannerConfig rp = ctx.rollout_planner();
  const int workers = ctx.cfg["workers"].get<int>();
  const int max_steps = ctx.cfg["max_steps"].get<int>();
  auto original_train = ds.select(Split::kTrain);
  TrainHooks hooks;
  hooks.log = &log;
  hooks.snapshot = [&](const GoalNet& n, int) {
    auto roll = model_rollout(n, lex->view(), rp, max_steps);
    json snap = {{"train_grr", evaluate(original_train, roll, workers).mean.grr}};
    if (!val_set.empty()) snap["val_grr"] = evaluate(val_set, roll, workers).mean.grr;
    return snap;
  };
  TrainResult r = train(net, train_set, val_set, lex->view(), tc, hooks);

  json meta = {{"model", mc.to_json()},
               {"train", tc.to_json()},
               {"config", ctx.cfg},
               {"dataset", dataset},
               {"dataset_provenance", ds.provenance},
               {"augmented", aug.demos.size()},
               {"best_epoch", r.best_epoch},
               {"best_val_loss", r.best_val_loss},
               {"epochs_run", r.epochs_run},
               {"early_stopped", r.early_stopped}};
  nn::save_checkpoint(fs::path(out_dir) / "model.ckpt", r.best, r.best_epoch, meta);
  write_json(fs::path(out_dir) / "config.json", meta);
  std::cerr << "trained " << r.epochs_run << " epoch(s); best validation loss " << r.best_val_loss
            << " at epoch " << r.best_epoch << "; checkpoint " << (fs::path(out_dir) / "model.ckpt").string()
            << "\n";
  return kOk;
}

int cmd_eval(Context& ctx, const std::string& dataset, const std::string& checkpoint,
             const std::string& report_path, bool oracle) {
  auto reg = SchemaRegistry::load_dir(ctx.data_dir());
  Dataset ds = load_dataset(dataset, reg, ctx.cfg["split_seed"].get<std::uint64_t>());
  auto split = ctx.cfg["split"].get<std::string>();
  std::vector<const Demonstration*> demos;
  if (split == "all") {
    for (const auto& d : ds.demos) demos.push_back(&d);
  } else if (split == "train") {
    demos = ds.select(Split::kTrain);
  } else if (split == "validation") {
    demos = ds.select(Split::kValidation);
  } else if (split == "test") {
    demos = ds.select(Split::kTest);
  } else {
    throw InvalidInput("split must be train, validation, test or all");
  }

  json gen_info;
  GeneralizationSet gset;
  auto gmode = ctx.cfg["generalization"].get<std::string>();
  if (!gmode.empty()) {
    auto rewrite = RewriteLexicon::load_dir(ctx.data_dir());
    gset = make_generalization_set(demos, generalization_mode_from_string(gmode), rewrite,
                                   ds.select(Split::kTrain));
    demos.clear();
    for (const auto& d : gset.demos) demos.push_back(&d);
    gen_info = {{"mode", gmode},
                {"transformed", gset.demos.size()},
                {"skipped", gset.skipped},
                {"introduced_verbs", gset.introduced_verbs},
                {"seen_in_train", gset.seen_in_train},
                {"unseen_check_passed", gset.unseen_check_passed()}};
    if (!gset.unseen_check_passed()) {
      std::cerr << "unseen-verb check failed: training instructions already use";
      for (const auto& v : gset.seen_in_train) std::cerr << " " << v;
      std::cerr << "\n";
    }
  }

  const PlannerConfig rp = ctx.rollout_planner();
  const int max_steps = ctx.cfg["max_steps"].get<int>();
  const bool formula = [&] {
    auto dir = ctx.cfg["grr_direction"].get<std::string>();
    if (dir != "prose" && dir != "formula") throw InvalidInput("grr direction must be prose or formula");
    return dir == "formula";
  }();

  std::unique_ptr<Lex> lex;
  std::unique_ptr<GoalNet> net;
  json ckpt_meta;
  RolloutFn roll;
  if (oracle) {
    roll = oracle_rollout(rp, max_steps);
  } else {
    if (checkpoint.empty()) throw InvalidInput("eval needs --checkpoint (or --oracle)");
    auto ck = nn::load_checkpoint(checkpoint);
    if (!ck.metadata.contains("model")) throw ParseError(checkpoint + ": no model configuration");
    net = std::make_unique<GoalNet>(ModelConfig::from_json(ck.metadata["model"]), std::move(ck.params));
    ckpt_meta = {{"epoch", ck.epoch}, {"model", ck.metadata["model"]}, {"train", ck.metadata.value("train", json())}};
    lex = load_lexicon(ctx);
    roll = model_rollout(*net, lex->view(), rp, max_steps);
  }

  EvalReport rep = evaluate(demos, roll, ctx.cfg["workers"].get<int>(), formula);
  json out = rep.to_json();
  out["config"] = ctx.cfg;
  out["split"] = split;
  out["model"] = oracle ? json("oracle") : ckpt_meta;
  if (!gen_info.is_null()) out["generalization"] = gen_info;
  out["dataset_provenance"] = ds.provenance;
  std::string label = oracle ? "oracle" : "GoalNet";
  if (!gmode.empty()) label += " (" + gmode + ")";
  out["table"] = rep.table(label);
  if (!report_path.empty()) write_json(report_path, out);
  std::cout << rep.table(label);
  if (!gen_info.is_null() && !gset.unseen_check_passed()) return kParse;
  return kOk;
}

int cmd_gradcheck(Context& ctx) {
  FixtureGradcheckOptions opt;
  opt.data_dir = ctx.data_dir();
  opt.ablate = split_list(ctx.cfg["ablate"].get<std::string>());
  opt.union_history = ctx.cfg["history"].get<std::string>() == "union";
  opt.samples_per_tensor = ctx.cfg["gradcheck_samples"].get<int>();
  auto ext = fixture_gradcheck_extended(opt);
  auto dbl = fixture_gradcheck_binary64(opt);
  std::printf("%-12s %14s %14s\n", "tensor", ext.precision.c_str(), dbl.precision.c_str());
  for (const auto& [name, err] : ext.per_tensor) {
    std::printf("%-12s %14.3e %14.3e\n", name.c_str(), err, dbl.per_tensor.at(name));
  }
  std::printf("loss %.12g, %zu coordinates, max relative error %.3e (%s; %s %.3e)\n", ext.loss,
              ext.checked, ext.max_rel_error, ext.precision.c_str(), dbl.precision.c_str(),
              dbl.max_rel_error);
  bool pass = ext.max_rel_error < 1e-4;
  std::printf("%s: threshold 1e-4\n", pass ? "PASS" : "FAIL");
  return pass ? kOk : kNumeric;
}

int cmd_inspect(Context& ctx, const std::string& dataset, const std::string& checkpoint,
                const std::string& state_file) {
  json out;
  if (!dataset.empty()) {
    auto reg = SchemaRegistry::load_dir(ctx.data_dir());
    Dataset ds = load_dataset(dataset, reg, ctx.cfg["split_seed"].get<std::uint64_t>());
    std::map<std::string, int> domains, verbs, lengths;
    for (const auto& d : ds.demos) {
      ++domains[d.domain];
      auto toks = tokenize(d.instruction);
      if (!toks.empty()) ++verbs[toks.front()];
      ++lengths[std::to_string(d.actions.size())];
    }
    out["dataset"] = {{"demos", ds.demos.size()},
                      {"train", ds.train.size()},
                      {"validation", ds.validation.size()},
                      {"test", ds.test.size()},
                      {"moved_to_train", ds.moved_to_train},
                      {"domains", domains},
                      {"first_words", verbs},
                      {"action_counts", lengths},
                      {"provenance", ds.provenance}};
  }
  if (!checkpoint.empty()) {
    auto ck = nn::load_checkpoint(checkpoint);
    json tensors = json::array();
    for (const auto& t : ck.params.tensors()) tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
    out["checkpoint"] = {{"epoch", ck.epoch},
                         {"parameters", ck.params.count()},
                         {"tensors", tensors},
                         {"metadata", ck.metadata}};
  }
  if (!state_file.empty()) {
    auto schema = load_schema(ctx.data_dir() / (ctx.cfg["domain"].get<std::string>() + ".json"));
    WorldState s = load_state(state_file, schema);
    json rel = json::array();
    for (const auto& p : s.relations()) rel.push_back(format_predicate(p, s.universe()));
    out["state"] = {{"objects", s.object_count()}, {"relations", rel}};
  }
  if (out.is_null()) throw InvalidInput("inspect needs --dataset, --checkpoint or --state");
  std::cout << out.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GoalNet: goal-constraint prediction for instruction following"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  app.add_option("--config", ctx.config_file, "JSON file of settings (flags > GOALNET_* env > file > defaults)");

  auto common = {"seed", "data_dir"};

  auto* plan_cmd = app.add_subcommand("plan", "plan from a state file to a goal");
  std::string state_file, output;
  std::vector<std::string> goals;
  plan_cmd->add_option("--state", state_file, "world-state JSON")->required();
  plan_cmd->add_option("--goal", goals, "goal predicate, prefix ! for a negative constraint");
  plan_cmd->add_option("--output", output, "write the plan trace as JSON");
  ctx.flags.add(plan_cmd, common);
  ctx.flags.add(plan_cmd, {"domain", "planner_depth", "planner_expansions"});

  auto* gen_cmd = app.add_subcommand("gen-data", "generate synthetic demonstrations");
  std::string gen_out;
  gen_cmd->add_option("--output", gen_out, "dataset file")->required();
  ctx.flags.add(gen_cmd, common);
  ctx.flags.add(gen_cmd, {"domains", "n", "split_seed"});

  auto* train_cmd = app.add_subcommand("train", "train on a dataset");
  std::string dataset, out_dir;
  bool dry_run = false;
  train_cmd->add_option("--dataset", dataset, "dataset file")->required();
  train_cmd->add_option("--out-dir", out_dir, "checkpoint, log and config directory");
  train_cmd->add_flag("--dry-run", dry_run, "validate the dataset and settings only");
  ctx.flags.add(train_cmd, common);
  ctx.flags.add(train_cmd, {"split_seed", "max_epochs", "lr", "decay_every", "decay_factor", "p_symsim",
                            "patience", "augment", "snapshot_every", "history", "tau", "ablate",
                            "rollout_depth", "rollout_expansions", "max_steps", "workers",
                            "sentence_vectors"});

  auto* eval_cmd = app.add_subcommand("eval", "score rollouts against demonstrations");
  std::string eval_dataset, checkpoint, report;
  bool oracle = false;
  eval_cmd->add_option("--dataset", eval_dataset, "dataset file")->required();
  eval_cmd->add_option("--checkpoint", checkpoint, "trained model");
  eval_cmd->add_option("--report", report, "write the JSON report here");
  eval_cmd->add_flag("--oracle", oracle, "replay the demonstrations' own constraints");
  ctx.flags.add(eval_cmd, common);
  ctx.flags.add(eval_cmd, {"split_seed", "split", "generalization", "grr_direction", "workers",
                           "rollout_depth", "rollout_expansions", "max_steps", "sentence_vectors"});

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
  ctx.flags.add(grad_cmd, common);
  ctx.flags.add(grad_cmd, {"ablate", "history", "gradcheck_samples"});

  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a dataset, checkpoint or state");
  std::string ins_dataset, ins_ckpt, ins_state;
  inspect_cmd->add_option("--dataset", ins_dataset, "dataset file");
  inspect_cmd->add_option("--checkpoint", ins_ckpt, "checkpoint file");
  inspect_cmd->add_option("--state", ins_state, "world-state file");
  ctx.flags.add(inspect_cmd, common);
  ctx.flags.add(inspect_cmd, {"domain", "split_seed"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    ctx.resolve();
    if (*plan_cmd) return cmd_plan(ctx, state_file, goals, output);
    if (*gen_cmd) return cmd_gen_data(ctx, gen_out);
    if (*train_cmd) {
      if (out_dir.empty() && !dry_run) throw InvalidInput("train needs --out-dir");
      return cmd_train(ctx, dataset, out_dir, dry_run);
    }
    if (*eval_cmd) return cmd_eval(ctx, eval_dataset, checkpoint, report, oracle);
    if (*grad_cmd) return cmd_gradcheck(ctx);
    if (*inspect_cmd) return cmd_inspect(ctx, ins_dataset, ins_ckpt, ins_state);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const SchemaViolation& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const DomainMismatch& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const PlanningError& e) {
    std::cerr << "planner error: " << e.what() << "\n";
    return kPlanner;
  } catch (const IllegalAction& e) {
    std::cerr << "planner error: " << e.what() << "\n";
    return kPlanner;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
