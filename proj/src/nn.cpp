#include "goalnet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "goalnet/error.hpp"
#include "goalnet/kernels.hpp"

namespace goalnet::inline GOALNET_NUMERIC_NS::nn {

int ParamSet::add(const std::string& name, int rows, int cols) {
  for (const auto& t : tensors_) {
    if (t.name == name) throw InvalidInput("duplicate parameter '" + name + "'");
  }
  tensors_.emplace_back(name, rows, cols);
  return int(tensors_.size() - 1);
}

int ParamSet::index(const std::string& name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) return int(i);
  }
  throw InvalidInput("no parameter named '" + name + "'");
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& t : tensors_) std::fill(t.grad.begin(), t.grad.end(), 0.0);
}

bool ParamSet::finite() const {
  for (const auto& t : tensors_) {
    for (Real x : t.data) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

Dense Dense::make(ParamSet& ps, const std::string& name, int in, int out) {
  Dense d;
  d.W = ps.add(name + ".W", out, in);
  d.b = ps.add(name + ".b", out, 1);
  d.in = in;
  d.out = out;
  return d;
}

void Dense::init(ParamSet& ps, std::mt19937_64& rng) const {
  double a = std::sqrt(6.0 / double(in + out));
  std::uniform_real_distribution<double> u(-a, a);
  for (auto& x : ps[W].data) x = u(rng);
  std::fill(ps[b].data.begin(), ps[b].data.end(), 0.0);
}

Vec Dense::forward(const ParamSet& ps, const Vec& x) const {
  if (int(x.size()) != in) {
    throw InvalidInput(ps[W].name + ": expected input of " + std::to_string(in) + ", got " +
                       std::to_string(x.size()));
  }
  Vec y(static_cast<std::size_t>(out));
  kern::matvec(ps[W].data.data(), ps[b].data.data(), x.data(), y.data(), out, in);
  return y;
}

void Dense::backward(ParamSet& ps, const Vec& x, const Vec& dy, Vec* dx) const {
  kern::outer_acc(ps[W].grad.data(), dy.data(), x.data(), out, in);
  auto& db = ps[b].grad;
  for (int i = 0; i < out; ++i) db[std::size_t(i)] += dy[std::size_t(i)];
  if (dx) {
    dx->resize(std::size_t(in), 0.0);
    kern::matvec_t(ps[W].data.data(), dy.data(), dx->data(), out, in);
  }
}

Real prelu(Real x, Real slope) { return x > 0 ? x : slope * x; }

Vec prelu(const Vec& x, Real slope) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = prelu(x[i], slope);
  return y;
}

Vec prelu_backward(const Vec& x, const Vec& dy, Real slope) {
  Vec dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0 ? dy[i] : slope * dy[i];
  return dx;
}

Real sigmoid(Real x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  Real e = std::exp(x);
  return e / (1.0 + e);
}

Vec softmax(const Vec& x, std::size_t n) {
  n = std::min(n, x.size());
  Vec y(x.size(), 0.0);
  if (n == 0) return y;
  Real mx = *std::max_element(x.begin(), x.begin() + long(n));
  Real sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    sum += y[i];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= sum;
  return y;
}

Vec softmax_backward(const Vec& y, const Vec& dy, Real tau) {
  Real dot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  Vec dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (dy[i] - dot) / tau;
  return dx;
}

Vec gumbel_softmax(const Vec& logits, Real tau, std::mt19937_64* rng, std::size_t n) {
  if (!(tau > 0)) throw InvalidInput("gumbel-softmax temperature must be positive");
  n = std::min(n, logits.size());
  Vec z(logits.size(), 0.0);
  std::uniform_real_distribution<double> u(std::numeric_limits<double>::min(), 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Real g = rng ? -std::log(-std::log(Real(u(*rng)))) : Real(0);
    z[i] = (logits[i] + g) / tau;
  }
  return softmax(z, n);
}

namespace {
Real clamp_p(Real p) { return std::clamp(p, kBceEps, 1 - kBceEps); }
}  // namespace

Real bce_loss(const Vec& p, const Vec& t, std::size_t n) {
  if (p.size() != t.size()) throw InvalidInput("bce_loss: shape mismatch");
  n = std::min(n, p.size());
  if (n == 0) return 0.0;
  Real sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Real q = clamp_p(p[i]);
    sum -= t[i] * std::log(q) + (1 - t[i]) * std::log(1 - q);
  }
  return sum / Real(n);
}

Vec bce_grad(const Vec& p, const Vec& t, std::size_t n) {
  if (p.size() != t.size()) throw InvalidInput("bce_grad: shape mismatch");
  n = std::min(n, p.size());
  Vec g(p.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] < kBceEps || p[i] > 1 - kBceEps) continue;
    g[i] = (-t[i] / p[i] + (1 - t[i]) / (1 - p[i])) / Real(n);
  }
  return g;
}

LstmCell LstmCell::make(ParamSet& ps, const std::string& name, int in, int hidden) {
  LstmCell c;
  c.W = ps.add(name + ".W", 4 * hidden, in + hidden);
  c.b = ps.add(name + ".b", 4 * hidden, 1);
  c.in = in;
  c.hidden = hidden;
  return c;
}

void LstmCell::init(ParamSet& ps, std::mt19937_64& rng) const {
  double a = std::sqrt(6.0 / double(in + 2 * hidden));
  std::uniform_real_distribution<double> u(-a, a);
  for (auto& x : ps[W].data) x = u(rng);
  auto& bias = ps[b].data;
  std::fill(bias.begin(), bias.end(), 0.0);
  for (int k = 0; k < hidden; ++k) bias[std::size_t(hidden + k)] = 1.0;
}

std::pair<Vec, Vec> LstmCell::forward(const ParamSet& ps, const Vec& x, const Vec& h_prev,
                                      const Vec& c_prev, Cache* cache) const {
  if (int(x.size()) != in || int(h_prev.size()) != hidden || int(c_prev.size()) != hidden) {
    throw InvalidInput("lstm_step: shape mismatch");
  }
  Vec xh(x);
  xh.insert(xh.end(), h_prev.begin(), h_prev.end());
  Vec z(std::size_t(4 * hidden));
  kern::matvec(ps[W].data.data(), ps[b].data.data(), xh.data(), z.data(), 4 * hidden, in + hidden);
  const auto H = std::size_t(hidden);
  Vec i(H), f(H), g(H), o(H), c(H), tc(H), h(H);
  for (std::size_t k = 0; k < H; ++k) {
    i[k] = sigmoid(z[k]);
    f[k] = sigmoid(z[H + k]);
    g[k] = std::tanh(z[2 * H + k]);
    o[k] = sigmoid(z[3 * H + k]);
    c[k] = f[k] * c_prev[k] + i[k] * g[k];
    tc[k] = std::tanh(c[k]);
    h[k] = o[k] * tc[k];
  }
  if (cache) *cache = Cache{std::move(xh), i, f, g, o, c_prev, c, tc};
  return {h, c};
}

void LstmCell::backward(ParamSet& ps, const Cache& k, const Vec& dh, const Vec& dc_in, Vec* dx,
                        Vec& dh_prev, Vec& dc_prev) const {
  const auto H = std::size_t(hidden);
  Vec dz(4 * H);
  dc_prev.assign(H, 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    Real dout = dh[j] * k.tanh_c[j];
    Real dc = dc_in[j] + dh[j] * k.o[j] * (1 - k.tanh_c[j] * k.tanh_c[j]);
    dz[j] = dc * k.g[j] * k.i[j] * (1 - k.i[j]);
    dz[H + j] = dc * k.c_prev[j] * k.f[j] * (1 - k.f[j]);
    dz[2 * H + j] = dc * k.i[j] * (1 - k.g[j] * k.g[j]);
    dz[3 * H + j] = dout * k.o[j] * (1 - k.o[j]);
    dc_prev[j] = dc * k.f[j];
  }
  const int cols = in + hidden;
  kern::outer_acc(ps[W].grad.data(), dz.data(), k.xh.data(), 4 * hidden, cols);
  auto& db = ps[b].grad;
  for (std::size_t j = 0; j < 4 * H; ++j) db[j] += dz[j];
  Vec dxh(std::size_t(cols), 0.0);
  kern::matvec_t(ps[W].data.data(), dz.data(), dxh.data(), 4 * hidden, cols);
  if (dx) dx->assign(dxh.begin(), dxh.begin() + in);
  dh_prev.assign(dxh.begin() + in, dxh.end());
}

Adam::Adam(const ParamSet& ps, AdamConfig cfg) : cfg_(cfg), lr_(cfg.lr) {
  for (const auto& t : ps.tensors()) {
    m_.emplace_back(t.size(), 0.0);
    v_.emplace_back(t.size(), 0.0);
  }
}

void Adam::step(ParamSet& ps) {
  ++t_;
  kern::AdamCoeffs c{lr_, cfg_.beta1, cfg_.beta2, cfg_.eps, t_};
  auto& ts = ps.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    kern::adam(ts[i].data.data(), ts[i].grad.data(), m_[i].data(), v_[i].data(), ts[i].size(), c);
  }
}

void Adam::end_epoch(int epoch) {
  if (cfg_.decay_every > 0 && epoch > 0 && epoch % cfg_.decay_every == 0) lr_ *= cfg_.decay_factor;
}

Real relative_error(Real a, Real n) {
  return std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), Real(1e-8)});
}

GradCheckReport grad_check(ParamSet& ps, const std::function<Real()>& loss,
                           const std::function<void()>& backward, Real eps,
                           int samples_per_tensor, std::uint64_t seed) {
  ps.zero_grad();
  backward();
  std::mt19937_64 rng(seed);
  GradCheckReport rep;
  for (auto& t : ps.tensors()) {
    std::vector<std::size_t> coords;
    if (t.size() <= std::size_t(samples_per_tensor)) {
      for (std::size_t i = 0; i < t.size(); ++i) coords.push_back(i);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
      for (int k = 0; k < samples_per_tensor; ++k) coords.push_back(pick(rng));
    }
    Real worst = 0;
    for (std::size_t i : coords) {
      Real keep = t.data[i];
      t.data[i] = keep + eps;
      Real up = loss();
      t.data[i] = keep - eps;
      Real down = loss();
      t.data[i] = keep;
      Real num = (up - down) / (2 * eps);
      Real ana = t.grad[i];
      if (!std::isfinite(num) || !std::isfinite(ana)) {
        throw NumericError("grad_check: non-finite gradient in " + t.name);
      }
      worst = std::max(worst, relative_error(ana, num));
      ++rep.checked;
    }
    rep.per_tensor[t.name] = double(worst);
    rep.max_rel_error = std::max(rep.max_rel_error, double(worst));
  }
  return rep;
}

namespace {
constexpr char kMagic[] = "GOALNET-CHECKPOINT 1\n";
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& ps, int epoch,
                     const nlohmann::json& metadata) {
  nlohmann::json header;
  header["epoch"] = epoch;
  header["metadata"] = metadata;
  header["tensors"] = nlohmann::json::array();
  for (const auto& t : ps.tensors()) {
    header["tensors"].push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  std::string h = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic) - 1);
  std::uint64_t len = h.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(h.data(), std::streamsize(h.size()));
  for (const auto& t : ps.tensors()) {
    std::vector<double> raw(t.data.begin(), t.data.end());
    out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size() * sizeof(double)));
  }
  if (!out) throw InvalidInput("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  std::string magic(sizeof(kMagic) - 1, '\0');
  in.read(magic.data(), std::streamsize(magic.size()));
  if (magic != kMagic) throw ParseError(path.string() + ": not a checkpoint file");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1u << 28)) throw ParseError(path.string() + ": corrupt header");
  std::string h(len, '\0');
  in.read(h.data(), std::streamsize(len));
  Checkpoint ck;
  try {
    auto header = nlohmann::json::parse(h);
    ck.epoch = header.at("epoch").get<int>();
    ck.metadata = header.at("metadata");
    for (const auto& t : header.at("tensors")) {
      int i = ck.params.add(t.at("name").get<std::string>(), t.at("rows").get<int>(),
                            t.at("cols").get<int>());
      auto& data = ck.params[i].data;
      std::vector<double> raw(data.size());
      in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size() * sizeof(double)));
      std::copy(raw.begin(), raw.end(), data.begin());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!in) throw ParseError(path.string() + ": truncated");
  return ck;
}

}  // namespace goalnet::inline GOALNET_NUMERIC_NS::nn
