#include "goalnet/gradcheck.hpp"

#include "goalnet/domain_io.hpp"
#include "goalnet/model.hpp"

#ifdef GOALNET_EXTENDED
#define GOALNET_FIXTURE_FN fixture_gradcheck_extended
#else
#define GOALNET_FIXTURE_FN fixture_gradcheck_binary64
#endif

namespace goalnet {

FixtureGradcheckResult GOALNET_FIXTURE_FN(const FixtureGradcheckOptions& opt) {
  auto schema = load_schema(opt.data_dir / "kitchen.json");
  auto table = EmbeddingTable::load(opt.data_dir / "embeddings.txt");
  auto aliases = AliasTable::load(opt.data_dir / "aliases.tsv");
  SentenceEncoder encoder(&table);

  auto u = Universe::make(schema, {{"robot", "robot"}, {"sink_0", "sink"}, {"mug_0", "mug"}});
  auto P = [&](const char* text) { return parse_predicate(text, *u); };
  auto S = [&](std::initializer_list<const char*> preds) {
    WorldState s(u);
    for (const char* p : preds) s.insert(P(p));
    return s;
  };
  std::vector<WorldState> states{S({"Near(robot,mug_0)"}),
                                 S({"Near(robot,mug_0)", "ConnectedTo(mug_0,robot)"}),
                                 S({"Near(robot,sink_0)", "Inside(mug_0,sink_0)"})};
  std::vector<GoalSpec> targets{
      GoalSpec::make({P("ConnectedTo(mug_0,robot)")}, {}),
      GoalSpec::make({P("Inside(mug_0,sink_0)"), P("stateHasWater(mug_0)")},
                     {P("ConnectedTo(mug_0,robot)")}),
      GoalSpec{}};

  ModelConfig cfg;
  for (const auto& a : opt.ablate) cfg.ablate.set(a);
  if (opt.union_history) cfg.history = HistoryMode::kUnion;
  GoalNet net(cfg, opt.init_seed);
  Groundings g{{"mug", {"mug_0"}}};
  auto in = prepare_inputs(u, "put the mug in the sink and fill it", &g,
                           Lexicon{&table, &encoder, &aliases}, cfg);

  auto run = [&](bool record) {
    Episode ep(net, in, record);
    std::mt19937_64 noise(99);
    const GoalSpec* prev = nullptr;
    for (std::size_t t = 0; t < states.size(); ++t) {
      ep.step(states[t], prev, &targets[t], opt.gumbel_noise ? &noise : nullptr);
      prev = &targets[t];
    }
    if (record) {
      ep.backward(net);
      if (opt.corrupt_backward) {
        for (auto& x : net.params()[net.params().index("goal.W")].grad) x *= 1.01;
      }
    }
    return ep.loss();
  };

  FixtureGradcheckResult res;
  res.precision = GOALNET_PREC_NAME;
  res.loss = double(run(false));
  auto rep = nn::grad_check(
      net.params(), [&] { return run(false); }, [&] { run(true); }, Real(opt.eps),
      opt.samples_per_tensor, opt.sample_seed);
  res.max_rel_error = rep.max_rel_error;
  res.per_tensor = rep.per_tensor;
  res.checked = rep.checked;
  return res;
}

}  // namespace goalnet
