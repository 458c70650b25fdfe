#include "goalnet/model.hpp"

#include <algorithm>
#include <cmath>

namespace goalnet::inline GOALNET_NUMERIC_NS {

using nn::Vec;

namespace {

const char* const kAblationNames[] = {"relational-info",       "instance-grounding",
                                      "negative-head",         "positive-head",
                                      "temporal-context",      "goal-object-attention",
                                      "instruction-attention", "grammar-mask"};

bool* ablation_field(Ablations& a, int i) {
  bool* fields[] = {&a.relational, &a.grounding, &a.negative, &a.positive,
                    &a.temporal,   &a.goal_object_attention, &a.instruction_attention,
                    &a.grammar_mask};
  return fields[i];
}

Vec to_real(const std::vector<double>& v) { return Vec(v.begin(), v.end()); }

Vec concat(std::initializer_list<const Vec*> parts) {
  std::size_t n = 0;
  for (const auto* p : parts) n += p->size();
  Vec out;
  out.reserve(n);
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

void add_into(Vec& acc, const Vec& src, std::size_t offset, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += src[offset + i];
}

std::size_t argmax(const Vec& v, const std::vector<bool>* allowed = nullptr) {
  std::size_t best = v.size();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (allowed && !(*allowed)[i]) continue;
    if (best == v.size() || v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

void Ablations::set(const std::string& flag) {
  for (int i = 0; i < 8; ++i) {
    if (flag == kAblationNames[i]) {
      *ablation_field(*this, i) = true;
      return;
    }
  }
  throw InvalidInput("unknown ablation '" + flag + "'");
}

std::vector<std::string> Ablations::names() const {
  std::vector<std::string> out;
  Ablations copy = *this;
  for (int i = 0; i < 8; ++i) {
    if (*ablation_field(copy, i)) out.emplace_back(kAblationNames[i]);
  }
  return out;
}

nlohmann::json ModelConfig::to_json() const {
  return {{"max_objects", dims.max_objects},
          {"relations", dims.relations},
          {"properties", dims.properties},
          {"states", dims.states},
          {"word", dims.word},
          {"sentence", dims.sentence},
          {"hidden", dims.hidden},
          {"tau", tau},
          {"history", history == HistoryMode::kPositive ? "positive" : "union"},
          {"ablate", ablate.names()}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.dims.max_objects = j.at("max_objects").get<int>();
  c.dims.relations = j.at("relations").get<int>();
  c.dims.properties = j.at("properties").get<int>();
  c.dims.states = j.at("states").get<int>();
  c.dims.word = j.at("word").get<int>();
  c.dims.sentence = j.at("sentence").get<int>();
  c.dims.hidden = j.at("hidden").get<int>();
  c.tau = j.at("tau").get<double>();
  auto h = j.at("history").get<std::string>();
  if (h != "positive" && h != "union") throw ParseError("unknown history mode '" + h + "'");
  c.history = h == "positive" ? HistoryMode::kPositive : HistoryMode::kUnion;
  for (const auto& a : j.at("ablate")) c.ablate.set(a.get<std::string>());
  return c;
}

DatumInputs prepare_inputs(std::shared_ptr<const Universe> universe, const std::string& instruction,
                           const Groundings* groundings, const Lexicon& lex,
                           const ModelConfig& cfg, const std::string& instruction_id) {
  const DomainSchema& schema = universe->schema();
  if (schema.max_objects != cfg.dims.max_objects) {
    throw DomainMismatch("schema '" + schema.name + "' has max_objects " +
                         std::to_string(schema.max_objects) + " but the model expects " +
                         std::to_string(cfg.dims.max_objects));
  }
  if (schema.relation_count() != cfg.dims.relations) {
    throw DomainMismatch("schema relation vocabulary does not match the model");
  }
  DatumInputs in;
  in.instruction = to_real(lex.encoder->encode(instruction, instruction_id));
  AliasTable none;
  auto objs = extract_goal_objects(instruction, schema, lex.aliases ? *lex.aliases : none,
                                   cfg.ablate.grounding ? nullptr : groundings, universe.get());
  for (const auto& tok : objs.all()) in.goal_objects.push_back(to_real(lex.table->embed(tok)));
  for (const auto& o : universe->objects()) in.object_embeddings.push_back(to_real(lex.table->embed(o.class_token)));
  in.universe = std::move(universe);
  return in;
}

GoalSpec ConstraintPrediction::goal() const {
  std::vector<Predicate> p, m;
  if (plus) p.push_back(*plus);
  if (minus && !(plus && *plus == *minus)) m.push_back(*minus);
  return GoalSpec::make(p, m);
}

Vec masked_distribution(const Vec& p, const std::vector<bool>& allowed) {
  Vec out(p.size(), 0.0);
  Real sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (allowed[i]) sum += p[i];
  }
  if (sum <= 0) return out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (allowed[i]) out[i] = p[i] / sum;
  }
  return out;
}

// ---------------------------------------------------------------------------

void GoalNet::build() {
  const auto& d = cfg_.dims;
  rel_ = nn::Dense::make(ps_, "rel", d.adjacency(), 1);
  instr_ = nn::Dense::make(ps_, "instr", d.sentence, d.hidden);
  attn_ = nn::Dense::make(ps_, "attn", d.object_feature() + d.hidden, 1);
  task_ = nn::Dense::make(ps_, "task", d.object_feature(), d.hidden);
  obj_attn_ = nn::Dense::make(ps_, "obj_attn", d.word + d.hidden, 1);
  hist_ = nn::LstmCell::make(ps_, "hist", d.history_in(), d.hidden);
  goal_ = nn::Dense::make(ps_, "goal", d.goal_in(), d.hidden);
  const char* sign[] = {"pos", "neg"};
  for (int k = 0; k < 2; ++k) {
    std::string s = sign[k];
    heads_[3 * k] = nn::Dense::make(ps_, s + "_rel", d.hidden, d.rel_out());
    heads_[3 * k + 1] = nn::Dense::make(ps_, s + "_obj1", d.hidden + d.rel_out(), d.max_objects);
    heads_[3 * k + 2] =
        nn::Dense::make(ps_, s + "_obj2", d.hidden + d.rel_out() + d.max_objects, d.max_objects);
  }
}

GoalNet::GoalNet(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  if (!(cfg_.tau > 0)) throw InvalidInput("tau must be positive");
  build();
  std::mt19937_64 rng(seed);
  for (auto* layer : {&rel_, &instr_, &attn_, &task_, &obj_attn_, &goal_}) layer->init(ps_, rng);
  hist_.init(ps_, rng);
  for (auto& h : heads_) h.init(ps_, rng);
}

GoalNet::GoalNet(ModelConfig cfg, nn::ParamSet params) : cfg_(std::move(cfg)) {
  build();
  auto& mine = ps_.tensors();
  const auto& theirs = params.tensors();
  if (mine.size() != theirs.size()) throw ParseError("checkpoint has the wrong number of tensors");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].name != theirs[i].name || mine[i].rows != theirs[i].rows ||
        mine[i].cols != theirs[i].cols) {
      throw ParseError("checkpoint tensor '" + theirs[i].name + "' does not match the model");
    }
    mine[i].data = theirs[i].data;
  }
}

TemporalContext GoalNet::zero_context() const {
  return {Vec(std::size_t(cfg_.dims.hidden), 0.0), Vec(std::size_t(cfg_.dims.hidden), 0.0)};
}

std::vector<bool> GoalNet::slot_mask(int rel, Slot slot, const Universe& u) const {
  std::vector<bool> m(std::size_t(cfg_.dims.max_objects), false);
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto o = ObjIndex(i);
    m[i] = cfg_.ablate.grammar_mask || slot_accepts(u.schema(), rel, slot, u.object(o), o == u.robot());
  }
  if (slot == Slot::kSecond && u.schema().is_unary(rel)) std::fill(m.begin(), m.end(), false);
  return m;
}

struct Episode::StepCache {
  std::size_t n = 0;
  std::vector<Vec> adj;
  std::vector<Real> r;
  std::vector<Vec> enc;
  std::vector<Real> alpha;
  Vec sum, zt, st;
  std::vector<Real> eps;
  Vec lobj;
  bool has_lstm = false;
  nn::LstmCell::Cache lstm;
  Vec h;
  Vec gin, zg, gv;
  struct Head {
    bool active = false;
    Vec zR, pR, phiR, in1, z1, p1, phi1, in2, z2, p2;
    Vec dpR, dp1, dp2;  // loss gradients w.r.t. the likelihoods (empty = no term)
  } head[2];
};

namespace {

// [p_o, q_o, e_o, r_o] for every object, keeping what backward needs.
void encode_objects(const GoalNet& net, const nn::ParamSet& ps, const nn::Dense& rel,
                    const DatumInputs& in, const WorldState& s, std::vector<Vec>& enc_out, std::vector<Real>& r_out,
                    std::vector<Vec>* adj_out) {
  const auto& d = net.dims();
  const Universe& u = s.universe();
  if (int(u.size()) > d.max_objects) {
    throw SchemaViolation("state has " + std::to_string(u.size()) + " objects; model capacity is " +
                          std::to_string(d.max_objects));
  }
  enc_out.clear();
  r_out.clear();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& obj = u.object(ObjIndex(i));
    Vec f(std::size_t(d.object_feature()), 0.0);
    for (int p = 0; p < d.properties; ++p) f[std::size_t(p)] = obj.properties.test(std::size_t(p));
    auto bits = s.state_vec(ObjIndex(i));
    for (int q = 0; q < d.states; ++q) f[std::size_t(d.properties + q)] = bits.test(std::size_t(q));
    const Vec& e = in.object_embeddings.at(i);
    std::copy(e.begin(), e.end(), f.begin() + d.properties + d.states);
    Real r = 0;
    if (!net.config().ablate.relational) {
      Vec a = to_real(adjacency_vector(ObjIndex(i), s));
      r = nn::sigmoid(rel.forward(ps, a)[0]);
      if (adj_out) adj_out->push_back(std::move(a));
    }
    f.back() = r;
    r_out.push_back(r);
    enc_out.push_back(std::move(f));
  }
}

}  // namespace

std::vector<Vec> GoalNet::encode_state(const DatumInputs& in, const WorldState& s) const {
  std::vector<Vec> enc;
  std::vector<Real> r;
  encode_objects(*this, ps_, rel_, in, s, enc, r, nullptr);
  return enc;
}

Vec GoalNet::project_instruction(const Vec& sentence) const {
  return nn::prelu(instr_.forward(ps_, sentence));
}

Vec GoalNet::attend_instruction(const std::vector<Vec>& enc, const Vec& l,
                                std::vector<Real>* alpha) const {
  Vec sum(std::size_t(cfg_.dims.object_feature()), 0.0);
  if (alpha) alpha->clear();
  for (const auto& e : enc) {
    Real a = cfg_.ablate.instruction_attention
                   ? 1.0 / Real(enc.size())
                   : nn::sigmoid(attn_.forward(ps_, concat({&e, &l}))[0]);
    if (alpha) alpha->push_back(a);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += a * e[k];
  }
  return nn::prelu(task_.forward(ps_, sum));
}

Vec GoalNet::attend_goal_objects(const std::vector<Vec>& objs, const Vec& st,
                                 std::vector<Real>* eps) const {
  Vec out(std::size_t(cfg_.dims.word), 0.0);
  if (eps) eps->clear();
  if (cfg_.ablate.goal_object_attention) return out;
  for (const auto& o : objs) {
    Real e = nn::sigmoid(obj_attn_.forward(ps_, concat({&o, &st}))[0]);
    if (eps) eps->push_back(e);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += e * o[k];
  }
  return out;
}

Vec GoalNet::history_input(const GoalSpec* prev, const DatumInputs& in) const {
  const auto& d = cfg_.dims;
  Vec x(std::size_t(d.history_in()), 0.0);
  if (!prev) return x;
  auto put = [&](const Predicate& p) {
    x[p.rel] += 1.0;
    const Vec& a = in.object_embeddings.at(std::size_t(p.subject));
    for (int k = 0; k < d.word; ++k) x[std::size_t(d.relations + k)] += a[std::size_t(k)];
    if (!p.unary()) {
      const Vec& b = in.object_embeddings.at(std::size_t(p.object));
      for (int k = 0; k < d.word; ++k) x[std::size_t(d.relations + d.word + k)] += b[std::size_t(k)];
    }
  };
  if (!prev->plus.empty()) put(prev->plus.front());
  if (cfg_.history == HistoryMode::kUnion && !prev->minus.empty()) put(prev->minus.front());
  return x;
}

TemporalContext GoalNet::encode_history(const Vec& x, const TemporalContext& ctx) const {
  if (cfg_.ablate.temporal) return zero_context();
  auto [h, c] = hist_.forward(ps_, x, ctx.h, ctx.c, nullptr);
  return {h, c};
}

// ---------------------------------------------------------------------------

Episode::Episode(const GoalNet& net, const DatumInputs& in, bool record)
    : net_(net), in_(in), record_(record), ctx_(net.zero_context()) {
  if (int(in.instruction.size()) != net.dims().sentence) {
    throw InvalidInput("instruction embedding has the wrong width");
  }
  l_pre_ = net.instr_.forward(net.ps_, in.instruction);
  l_ = nn::prelu(l_pre_);
}

Episode::~Episode() = default;
Episode::Episode(Episode&&) noexcept = default;

namespace {

// Multi-hot targets of one signed constraint set.
struct HeadTargets {
  Vec r, o1, o2;
  bool has_obj = false;
  bool has_binary = false;
};

HeadTargets make_targets(const std::vector<Predicate>& set, const ModelDims& d) {
  HeadTargets t{Vec(std::size_t(d.rel_out()), 0.0), Vec(std::size_t(d.max_objects), 0.0),
                Vec(std::size_t(d.max_objects), 0.0)};
  if (set.empty()) {
    t.r[std::size_t(d.null_rel())] = 1.0;
    return t;
  }
  t.has_obj = true;
  for (const auto& p : set) {
    t.r[p.rel] = 1.0;
    t.o1[std::size_t(p.subject)] = 1.0;
    if (!p.unary()) {
      t.o2[std::size_t(p.object)] = 1.0;
      t.has_binary = true;
    }
  }
  return t;
}

}  // namespace

ConstraintPrediction Episode::step(const WorldState& s, const GoalSpec* prev, const GoalSpec* target,
                                   std::mt19937_64* noise) {
  const GoalNet& net = net_;
  const auto& d = net.dims();
  const auto& ab = net.cfg_.ablate;
  const auto& ps = net.ps_;
  if (!s.universe().same_objects(*in_.universe)) {
    throw DomainMismatch("episode state does not belong to the datum's universe");
  }
  auto c = std::make_unique<StepCache>();
  const std::size_t n = s.object_count();
  c->n = n;

  encode_objects(net, ps, net.rel_, in_, s, c->enc, c->r, record_ ? &c->adj : nullptr);

  c->sum.assign(std::size_t(d.object_feature()), 0.0);
  for (std::size_t o = 0; o < n; ++o) {
    Real a = ab.instruction_attention ? 1.0 / Real(n)
                                        : nn::sigmoid(net.attn_.forward(ps, concat({&c->enc[o], &l_}))[0]);
    c->alpha.push_back(a);
    for (std::size_t k = 0; k < c->sum.size(); ++k) c->sum[k] += a * c->enc[o][k];
  }
  c->zt = net.task_.forward(ps, c->sum);
  c->st = nn::prelu(c->zt);

  c->lobj.assign(std::size_t(d.word), 0.0);
  if (!ab.goal_object_attention) {
    for (const auto& obj : in_.goal_objects) {
      Real e = nn::sigmoid(net.obj_attn_.forward(ps, concat({&obj, &c->st}))[0]);
      c->eps.push_back(e);
      for (std::size_t k = 0; k < c->lobj.size(); ++k) c->lobj[k] += e * obj[k];
    }
  }

  if (ab.temporal) {
    c->h.assign(std::size_t(d.hidden), 0.0);
  } else {
    Vec x = net.history_input(prev && !prev->empty() ? prev : nullptr, in_);
    auto [h, cc] = net.hist_.forward(ps, x, ctx_.h, ctx_.c, record_ ? &c->lstm : nullptr);
    c->has_lstm = true;
    c->h = h;
    ctx_ = {std::move(h), std::move(cc)};
  }

  c->gin = concat({&c->st, &c->h, &c->lobj, &l_});
  c->zg = net.goal_.forward(ps, c->gin);
  c->gv = nn::prelu(c->zg);

  ConstraintPrediction pred;
  Vec* out[2][3] = {{&pred.r_plus, &pred.o1, &pred.o2}, {&pred.r_minus, &pred.o3, &pred.o4}};
  std::optional<HeadTargets> tg[2];
  if (target) {
    tg[0] = make_targets(target->plus, d);
    tg[1] = make_targets(target->minus, d);
  }
  for (int k = 0; k < 2; ++k) {
    auto& hd = c->head[k];
    hd.active = !(k == 0 ? ab.positive : ab.negative);
    if (!hd.active) {
      *out[k][0] = Vec(std::size_t(d.rel_out()), 0.0);
      (*out[k][0])[std::size_t(d.null_rel())] = 1.0;
      *out[k][1] = Vec(std::size_t(d.max_objects), 0.0);
      *out[k][2] = Vec(std::size_t(d.max_objects), 0.0);
      continue;
    }
    const auto& H = net.heads_;
    hd.zR = H[3 * k].forward(ps, c->gv);
    hd.pR = nn::softmax(hd.zR);
    hd.phiR = nn::gumbel_softmax(hd.zR, net.cfg_.tau, noise);
    hd.in1 = concat({&c->gv, &hd.phiR});
    hd.z1 = H[3 * k + 1].forward(ps, hd.in1);
    hd.p1 = nn::softmax(hd.z1, n);
    hd.phi1 = nn::gumbel_softmax(hd.z1, net.cfg_.tau, noise, n);
    hd.in2 = concat({&c->gv, &hd.phiR, &hd.phi1});
    hd.z2 = H[3 * k + 2].forward(ps, hd.in2);
    hd.p2 = nn::softmax(hd.z2, n);
    *out[k][0] = hd.pR;
    *out[k][1] = hd.p1;
    *out[k][2] = hd.p2;

    if (tg[k]) {
      const auto& t = *tg[k];
      loss_ += nn::bce_loss(hd.pR, t.r);
      hd.dpR = nn::bce_grad(hd.pR, t.r);
      if (t.has_obj) {
        loss_ += nn::bce_loss(hd.p1, t.o1, n);
        hd.dp1 = nn::bce_grad(hd.p1, t.o1, n);
      }
      if (t.has_binary) {
        loss_ += nn::bce_loss(hd.p2, t.o2, n);
        hd.dp2 = nn::bce_grad(hd.p2, t.o2, n);
      }
    }
  }
  if (!std::isfinite(loss_)) throw NumericError("non-finite loss");

  // Decode: argmax relation, then Ω-masked argmax objects.
  const Universe& u = s.universe();
  for (int k = 0; k < 2; ++k) {
    if (!c->head[k].active) continue;
    const Vec& pR = *out[k][0];
    auto rel = int(argmax(pR));
    if (rel == d.null_rel()) continue;
    auto m1 = net.slot_mask(rel, Slot::kFirst, u);
    std::size_t o1 = argmax(*out[k][1], &m1);
    if (o1 == out[k][1]->size()) continue;
    Predicate p{std::uint8_t(rel), ObjIndex(o1), kNoObject};
    if (!u.schema().is_unary(rel)) {
      auto m2 = net.slot_mask(rel, Slot::kSecond, u);
      m2[o1] = false;
      std::size_t o2 = argmax(*out[k][2], &m2);
      if (o2 == out[k][2]->size()) continue;
      p.object = ObjIndex(o2);
    }
    (k == 0 ? pred.plus : pred.minus) = p;
  }

  if (record_) steps_.push_back(std::move(c));
  return pred;
}

void Episode::backward(GoalNet& net) {
  if (!record_) throw InvalidInput("backward on an episode that did not record");
  if (&net != &net_) throw InvalidInput("backward with a different network");
  auto& ps = net.ps_;
  const auto& d = net.dims();
  const auto& ab = net.cfg_.ablate;
  const Real tau = net.cfg_.tau;
  const auto H = std::size_t(d.hidden);
  const auto R = std::size_t(d.rel_out());
  const auto M = std::size_t(d.max_objects);

  Vec dl(H, 0.0);
  Vec dh_next(H, 0.0), dc_next(H, 0.0);
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    StepCache& c = **it;
    Vec dgv(H, 0.0);
    for (int k = 0; k < 2; ++k) {
      auto& hd = c.head[k];
      if (!hd.active) continue;
      Vec dphiR(R, 0.0);
      Vec dz1(M, 0.0);
      if (!hd.dp2.empty()) {
        Vec dz2 = nn::softmax_backward(hd.p2, hd.dp2);
        Vec din2;
        net.heads_[3 * k + 2].backward(ps, hd.in2, dz2, &din2);
        add_into(dgv, din2, 0, H);
        add_into(dphiR, din2, H, R);
        Vec dphi1(din2.begin() + long(H + R), din2.end());
        Vec back = nn::softmax_backward(hd.phi1, dphi1, tau);
        for (std::size_t i = 0; i < M; ++i) dz1[i] += back[i];
      }
      if (!hd.dp1.empty()) {
        Vec direct = nn::softmax_backward(hd.p1, hd.dp1);
        for (std::size_t i = 0; i < M; ++i) dz1[i] += direct[i];
      }
      if (!hd.dp1.empty() || !hd.dp2.empty()) {
        Vec din1;
        net.heads_[3 * k + 1].backward(ps, hd.in1, dz1, &din1);
        add_into(dgv, din1, 0, H);
        add_into(dphiR, din1, H, R);
      }
      Vec dzR(R, 0.0);
      if (!hd.dpR.empty()) dzR = nn::softmax_backward(hd.pR, hd.dpR);
      Vec back = nn::softmax_backward(hd.phiR, dphiR, tau);
      for (std::size_t i = 0; i < R; ++i) dzR[i] += back[i];
      Vec dgv_r;
      net.heads_[3 * k].backward(ps, c.gv, dzR, &dgv_r);
      for (std::size_t i = 0; i < H; ++i) dgv[i] += dgv_r[i];
    }

    Vec dzg = nn::prelu_backward(c.zg, dgv);
    Vec dgin;
    net.goal_.backward(ps, c.gin, dzg, &dgin);
    Vec dst(dgin.begin(), dgin.begin() + long(H));
    Vec dh(dgin.begin() + long(H), dgin.begin() + long(2 * H));
    Vec dlobj(dgin.begin() + long(2 * H), dgin.begin() + long(2 * H + std::size_t(d.word)));
    add_into(dl, dgin, 2 * H + std::size_t(d.word), H);

    if (c.has_lstm) {
      for (std::size_t i = 0; i < H; ++i) dh[i] += dh_next[i];
      Vec dh_prev, dc_prev;
      net.hist_.backward(ps, c.lstm, dh, dc_next, nullptr, dh_prev, dc_prev);
      dh_next = std::move(dh_prev);
      dc_next = std::move(dc_prev);
    }

    if (!ab.goal_object_attention) {
      for (std::size_t j = 0; j < in_.goal_objects.size(); ++j) {
        const Vec& obj = in_.goal_objects[j];
        Real de = 0;
        for (std::size_t k = 0; k < obj.size(); ++k) de += dlobj[k] * obj[k];
        Real e = c.eps[j];
        Vec dz{de * e * (1 - e)};
        Vec dx;
        net.obj_attn_.backward(ps, concat({&obj, &c.st}), dz, &dx);
        add_into(dst, dx, obj.size(), H);
      }
    }

    Vec dzt = nn::prelu_backward(c.zt, dst);
    Vec dsum;
    net.task_.backward(ps, c.sum, dzt, &dsum);
    const std::size_t F = std::size_t(d.object_feature());
    for (std::size_t o = 0; o < c.n; ++o) {
      const Vec& e = c.enc[o];
      Real a = c.alpha[o];
      Vec denc(F);
      for (std::size_t k = 0; k < F; ++k) denc[k] = a * dsum[k];
      if (!ab.instruction_attention) {
        Real da = 0;
        for (std::size_t k = 0; k < F; ++k) da += dsum[k] * e[k];
        Vec dz{da * a * (1 - a)};
        Vec dx;
        net.attn_.backward(ps, concat({&e, &l_}), dz, &dx);
        add_into(denc, dx, 0, F);
        add_into(dl, dx, F, H);
      }
      if (!ab.relational) {
        Real r = c.r[o];
        Vec dz{denc[F - 1] * r * (1 - r)};
        net.rel_.backward(ps, c.adj[o], dz, nullptr);
      }
    }
  }
  Vec dzl = nn::prelu_backward(l_pre_, dl);
  net.instr_.backward(ps, in_.instruction, dzl, nullptr);
}

GoalNet::RolloutResult GoalNet::infer_rollout(const WorldState& s0, const DatumInputs& in,
                                              const PlannerConfig& planner, int max_steps) const {
  RolloutResult res;
  Episode ep(*this, in, false);
  GoalSpec prev;
  bool first = true;
  res.trace = rollout_execute(
      s0,
      [&](const WorldState& s, int) {
        auto p = ep.step(s, first ? nullptr : &prev, nullptr, nullptr);
        first = false;
        prev = p.goal();
        res.predictions.push_back(p);
        return prev;
      },
      planner, max_steps);
  return res;
}

}  // namespace goalnet::inline GOALNET_NUMERIC_NS
