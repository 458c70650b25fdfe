#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "goalnet/error.hpp"
#include "goalnet/kernels.hpp"
#include "goalnet/nn.hpp"

using namespace goalnet;
using namespace goalnet::nn;

namespace {

Vec random_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("prelu") {
  CHECK(prelu(-1.0) == doctest::Approx(-0.25));
  CHECK(prelu(0.0) == 0.0);
  CHECK(prelu(2.0) == 2.0);
}

TEST_CASE("softmax") {
  auto y = softmax(Vec(4, 0.0));
  for (double v : y) CHECK(v == doctest::Approx(0.25));

  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    auto x = random_vec(rng, 9, 5.0);
    auto a = softmax(x);
    auto shifted = x;
    for (auto& v : shifted) v += 123.4;
    auto b = softmax(shifted);
    double sum = std::accumulate(a.begin(), a.end(), 0.0);
    CHECK(std::fabs(sum - 1.0) < 1e-9);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] > 0);
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
  }
  auto r = softmax({std::log(1.0), std::log(2.0), std::log(3.0)});
  CHECK(r[0] == doctest::Approx(1.0 / 6));
  CHECK(r[1] == doctest::Approx(2.0 / 6));
  CHECK(r[2] == doctest::Approx(3.0 / 6));

  auto pad = softmax({1.0, 2.0, 50.0}, 2);
  CHECK(pad[2] == 0.0);
  CHECK(pad[0] + pad[1] == doctest::Approx(1.0));
  CHECK(softmax({1000.0, -1000.0})[0] == doctest::Approx(1.0));
}

TEST_CASE("gumbel_softmax") {
  Vec z{0.3, -1.0, 2.0, 0.5};
  auto plain = softmax(z);
  auto g = gumbel_softmax(z, 1.0, nullptr);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(g[i] == doctest::Approx(plain[i]));
  auto sharp = gumbel_softmax(z, 1e-3, nullptr);
  CHECK(*std::max_element(sharp.begin(), sharp.end()) > 0.999);
  CHECK_THROWS_AS(gumbel_softmax(z, 0.0, nullptr), InvalidInput);
  CHECK_THROWS_AS(gumbel_softmax(z, -1.0, nullptr), InvalidInput);

  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    auto y = gumbel_softmax(random_vec(rng, 7), 0.1, &rng);
    CHECK(std::accumulate(y.begin(), y.end(), 0.0) == doctest::Approx(1.0));
  }
  std::mt19937_64 a(9), b(9);
  CHECK(gumbel_softmax(z, 0.5, &a) == gumbel_softmax(z, 0.5, &b));
}

TEST_CASE("bce_loss") {
  CHECK(bce_loss({1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}) < 1e-6);
  CHECK(bce_loss(Vec(5, 0.5), {1, 0, 1, 1, 0}) == doctest::Approx(std::log(2.0)));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 100; ++k) {
    Vec p(6), t(6);
    for (std::size_t i = 0; i < 6; ++i) {
      p[i] = u(rng);
      t[i] = rng() % 2;
    }
    CHECK(bce_loss(p, t) >= 0.0);
  }
  CHECK_THROWS_AS(bce_loss({0.5}, {1.0, 0.0}), InvalidInput);
}

TEST_CASE("lstm_step") {
  ParamSet ps;
  auto cell = LstmCell::make(ps, "toy", 2, 2);
  Vec zero(2, 0.0);
  auto [h0, c0] = cell.forward(ps, {0.7, -0.2}, zero, zero, nullptr);
  CHECK(h0 == Vec{0.0, 0.0});

  std::mt19937_64 rng(4);
  cell.init(ps, rng);
  for (int k = 0; k < 20; ++k) {
    auto [h, c] = cell.forward(ps, random_vec(rng, 2, 10), random_vec(rng, 2), random_vec(rng, 2), nullptr);
    for (double v : h) CHECK(std::fabs(v) < 1.0);
  }

  // Hand-evaluated gates for fixed weights.
  auto& W = ps[cell.W].data;  // 8 × 4, rows = [i0 i1 f0 f1 g0 g1 o0 o1]
  auto& b = ps[cell.b].data;
  for (std::size_t i = 0; i < W.size(); ++i) W[i] = 0.1 * double(int(i % 7) - 3);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.05 * double(i);
  Vec x{0.5, -1.0}, hp{0.2, -0.3}, cp{0.4, 0.1};
  Vec xh{0.5, -1.0, 0.2, -0.3};
  auto row = [&](int r) {
    double acc = b[std::size_t(r)];
    for (int c = 0; c < 4; ++c) acc += W[std::size_t(r * 4 + c)] * xh[std::size_t(c)];
    return acc;
  };
  auto [h, c] = cell.forward(ps, x, hp, cp, nullptr);
  for (int j = 0; j < 2; ++j) {
    double ig = sig(row(j)), fg = sig(row(2 + j)), gg = std::tanh(row(4 + j)), og = sig(row(6 + j));
    double cj = fg * cp[std::size_t(j)] + ig * gg;
    CHECK(c[std::size_t(j)] == doctest::Approx(cj).epsilon(1e-12));
    CHECK(h[std::size_t(j)] == doctest::Approx(og * std::tanh(cj)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(cell.forward(ps, Vec(3), hp, cp, nullptr), InvalidInput);
}

TEST_CASE("adam") {
  ParamSet ps;
  int i = ps.add("w", 3, 1);
  ps[i].data = {1.0, -2.0, 0.5};
  Adam opt(ps, AdamConfig{});
  auto before = ps[i].data;
  opt.step(ps);
  CHECK(ps[i].data == before);  // zero gradient

  ps[i].grad = {1.0, 1.0, 1.0};
  Adam fresh(ps, AdamConfig{});
  fresh.step(ps);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(before[k] - ps[i].data[k] == doctest::Approx(5e-4).epsilon(1e-6));
  }

  Adam sched(ps, AdamConfig{});
  for (int e = 1; e < 50; ++e) sched.end_epoch(e);
  CHECK(sched.lr() == doctest::Approx(5e-4));
  sched.end_epoch(50);
  CHECK(sched.lr() == doctest::Approx(1e-4));
  for (int e = 51; e <= 100; ++e) sched.end_epoch(e);
  CHECK(sched.lr() == doctest::Approx(2e-5));
}

TEST_CASE("grad_check on simple functions") {
  ParamSet ps;
  int w = ps.add("w", 4, 1);
  ps[w].data = {0.3, -1.2, 2.0, 0.7};
  Vec coef{1.5, -2.0, 0.25, 3.0};
  auto linear = [&] {
    double s = 0;
    for (std::size_t i = 0; i < 4; ++i) s += coef[i] * ps[w].data[i];
    return s;
  };
  auto linear_grad = [&] { ps[w].grad = coef; };
  CHECK(grad_check(ps, linear, linear_grad).max_rel_error < 1e-8);

  auto constant = [&] { return 4.0; };
  auto zero = [&] {};
  auto rep = grad_check(ps, constant, zero);
  CHECK(rep.max_rel_error == 0.0);

  // A wrong backward is caught.
  auto wrong = [&] { ps[w].grad = {1.5, -2.0, 0.25, 2.0}; };
  CHECK(grad_check(ps, linear, wrong).max_rel_error > 1e-2);
}

TEST_CASE("ops pass grad_check on random shapes") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    int in = 2 + int(rng() % 5), hid = 2 + int(rng() % 4), out = 2 + int(rng() % 5);
    ParamSet ps;
    auto d1 = Dense::make(ps, "d1", in, hid);
    auto cell = LstmCell::make(ps, "cell", hid, hid);
    auto d2 = Dense::make(ps, "d2", hid, out);
    d1.init(ps, rng);
    cell.init(ps, rng);
    d2.init(ps, rng);
    Vec x = random_vec(rng, std::size_t(in));
    Vec target(std::size_t(out), 0.0);
    target[0] = 1.0;
    double tau = 0.1 + 0.9 * double(trial) / 4;

    struct Fwd {
      Vec a, z1, y1, z2, p, q, hid_h, hid_c;
      LstmCell::Cache c1, c2;
    };
    auto forward = [&](Fwd& f) {
      f.z1 = d1.forward(ps, x);
      f.y1 = prelu(f.z1);
      Vec zero(std::size_t(hid), 0.0);
      auto [h1, c1] = cell.forward(ps, f.y1, zero, zero, &f.c1);
      auto [h2, c2] = cell.forward(ps, f.y1, h1, c1, &f.c2);
      f.hid_h = h2;
      f.z2 = d2.forward(ps, h2);
      f.p = softmax(f.z2);
      f.q = gumbel_softmax(f.z2, tau, nullptr);
      double s = sigmoid(f.z2[0]);
      return bce_loss(f.p, target) + bce_loss(f.q, target) + s * s;
    };
    auto loss = [&] {
      Fwd f;
      return forward(f);
    };
    auto backward = [&] {
      Fwd f;
      forward(f);
      Vec dz2 = softmax_backward(f.p, bce_grad(f.p, target));
      Vec dq = softmax_backward(f.q, bce_grad(f.q, target), tau);
      for (std::size_t i = 0; i < dz2.size(); ++i) dz2[i] += dq[i];
      double s = sigmoid(f.z2[0]);
      dz2[0] += 2 * s * s * (1 - s);
      Vec dh2;
      d2.backward(ps, f.hid_h, dz2, &dh2);
      Vec dx2, dh1, dc1, dx1, dh0, dc0;
      cell.backward(ps, f.c2, dh2, Vec(std::size_t(hid), 0.0), &dx2, dh1, dc1);
      cell.backward(ps, f.c1, dh1, dc1, &dx1, dh0, dc0);
      for (std::size_t i = 0; i < dx1.size(); ++i) dx1[i] += dx2[i];
      d1.backward(ps, x, prelu_backward(f.z1, dx1), nullptr);
    };
    auto rep = grad_check(ps, loss, backward, 1e-5, 1000);
    CHECK(rep.max_rel_error < 1e-4);
  }
}

TEST_CASE("checkpoint round trip is exact") {
  ParamSet ps;
  std::mt19937_64 rng(8);
  auto d = Dense::make(ps, "layer", 7, 5);
  d.init(ps, rng);
  ps[d.b].data[2] = 1.0 / 3.0;
  auto path = std::filesystem::temp_directory_path() / "goalnet_ck_test.bin";
  save_checkpoint(path, ps, 17, {{"note", "x"}});
  auto ck = load_checkpoint(path);
  CHECK(ck.epoch == 17);
  CHECK(ck.metadata["note"] == "x");
  REQUIRE(ck.params.tensors().size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ck.params.tensors()[i].name == ps.tensors()[i].name);
    CHECK(ck.params.tensors()[i].rows == ps.tensors()[i].rows);
    CHECK(ck.params.tensors()[i].data == ps.tensors()[i].data);
  }
  std::ofstream(path) << "garbage";
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
}

TEST_CASE("omp kernels match the serial reference bitwise") {
  std::mt19937_64 rng(21);
  for (auto [rows, cols] : {std::pair{3, 5}, std::pair{128, 684}, std::pair{512, 739}}) {
    auto W = random_vec(rng, std::size_t(rows) * cols);
    auto b = random_vec(rng, std::size_t(rows));
    auto x = random_vec(rng, std::size_t(cols));
    auto g = random_vec(rng, std::size_t(rows));
    Vec y1(static_cast<std::size_t>(rows)), y2(static_cast<std::size_t>(rows));
    kern::serial::matvec(W.data(), b.data(), x.data(), y1.data(), rows, cols);
    kern::omp::matvec(W.data(), b.data(), x.data(), y2.data(), rows, cols);
    CHECK(y1 == y2);
    Vec d1 = x, d2 = x;
    kern::serial::matvec_t(W.data(), g.data(), d1.data(), rows, cols);
    kern::omp::matvec_t(W.data(), g.data(), d2.data(), rows, cols);
    CHECK(d1 == d2);
    Vec G1 = W, G2 = W;
    kern::serial::outer_acc(G1.data(), g.data(), x.data(), rows, cols);
    kern::omp::outer_acc(G2.data(), g.data(), x.data(), rows, cols);
    CHECK(G1 == G2);
    Vec p1 = W, p2 = W, m1(W.size()), m2(W.size()), v1(W.size()), v2(W.size());
    kern::AdamCoeffs c{1e-3, 0.9, 0.999, 1e-8, 3};
    kern::serial::adam(p1.data(), G1.data(), m1.data(), v1.data(), p1.size(), c);
    kern::omp::adam(p2.data(), G1.data(), m2.data(), v2.data(), p2.size(), c);
    CHECK(p1 == p2);
  }
}
