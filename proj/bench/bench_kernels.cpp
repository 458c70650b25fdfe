// Serial reference kernels against their OpenMP versions, at the shapes the
// network uses (LSTM 512x739, goal layer 128x684, instruction 128x384) plus a
// larger square to show scaling.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "goalnet/kernels.hpp"

using namespace goalnet;

namespace {

struct Buffers {
  std::vector<double> W, b, x, y, g;
  Buffers(int rows, int cols) : W(std::size_t(rows) * cols), b(rows), x(cols), y(rows), g(rows) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto* v : {&W, &b, &x, &g}) {
      for (auto& e : *v) e = u(rng);
    }
  }
};

template <void (*F)(const double*, const double*, const double*, double*, int, int)>
void BM_matvec(benchmark::State& st) {
  int rows = int(st.range(0)), cols = int(st.range(1));
  Buffers buf(rows, cols);
  for (auto _ : st) {
    F(buf.W.data(), buf.b.data(), buf.x.data(), buf.y.data(), rows, cols);
    benchmark::DoNotOptimize(buf.y.data());
  }
  st.SetItemsProcessed(st.iterations() * rows * cols);
}

template <void (*F)(const double*, const double*, double*, int, int)>
void BM_matvec_t(benchmark::State& st) {
  int rows = int(st.range(0)), cols = int(st.range(1));
  Buffers buf(rows, cols);
  std::vector<double> dx(std::size_t(cols), 0.0);
  for (auto _ : st) {
    F(buf.W.data(), buf.g.data(), dx.data(), rows, cols);
    benchmark::DoNotOptimize(dx.data());
  }
  st.SetItemsProcessed(st.iterations() * rows * cols);
}

template <void (*F)(double*, const double*, const double*, int, int)>
void BM_outer(benchmark::State& st) {
  int rows = int(st.range(0)), cols = int(st.range(1));
  Buffers buf(rows, cols);
  for (auto _ : st) {
    F(buf.W.data(), buf.g.data(), buf.x.data(), rows, cols);
    benchmark::DoNotOptimize(buf.W.data());
  }
  st.SetItemsProcessed(st.iterations() * rows * cols);
}

template <void (*F)(double*, const double*, double*, double*, std::size_t, const kern::AdamCoeffs&)>
void BM_adam(benchmark::State& st) {
  std::size_t n = std::size_t(st.range(0));
  std::vector<double> p(n, 0.1), g(n, 0.01), m(n, 0.0), v(n, 0.0);
  kern::AdamCoeffs c{5e-4, 0.9, 0.999, 1e-8, 1};
  for (auto _ : st) {
    F(p.data(), g.data(), m.data(), v.data(), n, c);
    benchmark::DoNotOptimize(p.data());
  }
  st.SetItemsProcessed(st.iterations() * long(n));
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({512, 739})->Args({128, 684})->Args({128, 384})->Args({2048, 2048});
}

}  // namespace

BENCHMARK(BM_matvec<kern::serial::matvec>)->Name("matvec/serial")->Apply(shapes);
BENCHMARK(BM_matvec<kern::omp::matvec>)->Name("matvec/omp")->Apply(shapes);
BENCHMARK(BM_matvec_t<kern::serial::matvec_t>)->Name("matvec_t/serial")->Apply(shapes);
BENCHMARK(BM_matvec_t<kern::omp::matvec_t>)->Name("matvec_t/omp")->Apply(shapes);
BENCHMARK(BM_outer<kern::serial::outer_acc>)->Name("outer_acc/serial")->Apply(shapes);
BENCHMARK(BM_outer<kern::omp::outer_acc>)->Name("outer_acc/omp")->Apply(shapes);
BENCHMARK(BM_adam<kern::serial::adam>)->Name("adam/serial")->Arg(570000);
BENCHMARK(BM_adam<kern::omp::adam>)->Name("adam/omp")->Arg(570000);

BENCHMARK_MAIN();
