#pragma once

// Small reverse-mode toolkit: every op has an explicit backward.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "goalnet/real.hpp"

namespace goalnet::inline GOALNET_NUMERIC_NS::nn {

using Vec = std::vector<Real>;

struct Tensor {
  std::string name;
  int rows = 0;
  int cols = 1;
  Vec data;
  Vec grad;

  Tensor() = default;
  Tensor(std::string n, int r, int c)
      : name(std::move(n)), rows(r), cols(c), data(std::size_t(r) * c), grad(std::size_t(r) * c) {}
  std::size_t size() const { return data.size(); }
};

class ParamSet {
 public:
  int add(const std::string& name, int rows, int cols);  // returns index
  Tensor& operator[](int i) { return tensors_[std::size_t(i)]; }
  const Tensor& operator[](int i) const { return tensors_[std::size_t(i)]; }
  int index(const std::string& name) const;  // throws InvalidInput
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::size_t count() const;  // total scalars
  void zero_grad();
  bool finite() const;

 private:
  std::vector<Tensor> tensors_;
};

// Affine map y = W x + b with W (out × in).
struct Dense {
  int W = -1;
  int b = -1;
  int in = 0;
  int out = 0;

  static Dense make(ParamSet& ps, const std::string& name, int in, int out);
  void init(ParamSet& ps, std::mt19937_64& rng) const;  // Glorot-uniform weights, zero bias
  Vec forward(const ParamSet& ps, const Vec& x) const;
  // Accumulates dW, db; adds Wᵀ dy into dx when dx is non-null.
  void backward(ParamSet& ps, const Vec& x, const Vec& dy, Vec* dx) const;
};

inline constexpr Real kPreluSlope = 0.25;

Real prelu(Real x, Real slope = kPreluSlope);
Vec prelu(const Vec& x, Real slope = kPreluSlope);
// dx = dy * (x > 0 ? 1 : slope)
Vec prelu_backward(const Vec& x, const Vec& dy, Real slope = kPreluSlope);

Real sigmoid(Real x);

// Max-shifted. `n` limits the normalization to the first n entries; the rest
// are set to 0 (padding slots).
Vec softmax(const Vec& x, std::size_t n = std::size_t(-1));
// Given y = softmax(x / tau) (restricted to the first n entries), dx.
Vec softmax_backward(const Vec& y, const Vec& dy, Real tau = 1.0);

// softmax((logits + g) / tau) with g ~ Gumbel(0, 1) drawn from rng when
// non-null. Throws InvalidInput when tau <= 0.
Vec gumbel_softmax(const Vec& logits, Real tau, std::mt19937_64* rng,
                   std::size_t n = std::size_t(-1));

inline constexpr Real kBceEps = 1e-7;
// Mean over the first n entries (all when n is -1).
Real bce_loss(const Vec& p, const Vec& t, std::size_t n = std::size_t(-1));
// d loss / d p, zero where p was clamped.
Vec bce_grad(const Vec& p, const Vec& t, std::size_t n = std::size_t(-1));

// Gates stacked as [input, forget, candidate, output]; W is 4H × (I + H).
struct LstmCell {
  int W = -1;
  int b = -1;
  int in = 0;
  int hidden = 0;

  static LstmCell make(ParamSet& ps, const std::string& name, int in, int hidden);
  void init(ParamSet& ps, std::mt19937_64& rng) const;  // forget-gate bias 1

  struct Cache {
    Vec xh;  // [x, h_prev]
    Vec i, f, g, o, c_prev, c, tanh_c;
  };
  // Returns (h, c).
  std::pair<Vec, Vec> forward(const ParamSet& ps, const Vec& x, const Vec& h_prev, const Vec& c_prev,
                              Cache* cache) const;
  // Accumulates parameter grads; outputs dx, dh_prev, dc_prev.
  void backward(ParamSet& ps, const Cache& cache, const Vec& dh, const Vec& dc, Vec* dx,
                Vec& dh_prev, Vec& dc_prev) const;
};

struct AdamConfig {
  Real lr = 5e-4;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
  Real decay_factor = 0.2;  // lr multiplier
  int decay_every = 50;       // epochs
};

class Adam {
 public:
  Adam(const ParamSet& ps, AdamConfig cfg);
  void step(ParamSet& ps);
  // Call after finishing `epoch` (1-based); decays lr on multiples of decay_every.
  void end_epoch(int epoch);
  Real lr() const { return lr_; }
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  Real lr_;
  long t_ = 0;
  std::vector<Vec> m_, v_;
};

struct GradCheckReport {
  double max_rel_error = 0;
  std::map<std::string, double> per_tensor;  // worst relative error per tensor
  std::size_t checked = 0;
};

// Central differences against analytic gradients. `loss` evaluates the scalar
// at the current parameter values; `backward` fills the grads (after the
// harness zeroes them). Checks every coordinate of tensors no larger than
// `samples_per_tensor`, otherwise a seeded sample of that many.
GradCheckReport grad_check(ParamSet& ps, const std::function<Real()>& loss,
                           const std::function<void()>& backward, Real eps = 1e-4,
                           int samples_per_tensor = 64, std::uint64_t seed = 0);

Real relative_error(Real a, Real n);

// Binary file: magic line, 8-byte header length, JSON header (tensor names,
// shapes, epoch, metadata), then the raw doubles of every tensor.
void save_checkpoint(const std::filesystem::path& path, const ParamSet& ps, int epoch,
                     const nlohmann::json& metadata);
struct Checkpoint {
  ParamSet params;
  int epoch = 0;
  nlohmann::json metadata;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace goalnet::inline GOALNET_NUMERIC_NS::nn
