#include "goalnet/kernels.hpp"

#include <cmath>

#include <omp.h>

namespace goalnet::inline GOALNET_NUMERIC_NS::kern {

namespace {
constexpr long kParallelMin = 1 << 15;  // multiply-adds before threads pay off

inline void adam_one(Real& p, Real g, Real& m, Real& v, const AdamCoeffs& c, Real bc1,
                     Real bc2) {
  m = c.beta1 * m + (1 - c.beta1) * g;
  v = c.beta2 * v + (1 - c.beta2) * g * g;
  p -= c.lr * (m / bc1) / (std::sqrt(v / bc2) + c.eps);
}
}  // namespace

namespace serial {

void matvec(const Real* W, const Real* b, const Real* x, Real* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const Real* w = W + std::size_t(r) * cols;
    Real acc = b ? b[r] : Real(0);
    for (int c = 0; c < cols; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

// Row-major sweep; each dx[c] still sums over r in increasing order.
void matvec_t(const Real* W, const Real* g, Real* dx, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const Real* w = W + std::size_t(r) * cols;
    for (int c = 0; c < cols; ++c) dx[c] += w[c] * g[r];
  }
}

void outer_acc(Real* dW, const Real* g, const Real* x, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    if (g[r] == 0.0) continue;
    Real* w = dW + std::size_t(r) * cols;
    for (int c = 0; c < cols; ++c) w[c] += g[r] * x[c];
  }
}

void adam(Real* p, const Real* g, Real* m, Real* v, std::size_t n, const AdamCoeffs& c) {
  Real bc1 = 1 - std::pow(c.beta1, Real(c.step));
  Real bc2 = 1 - std::pow(c.beta2, Real(c.step));
  for (std::size_t i = 0; i < n; ++i) adam_one(p[i], g[i], m[i], v[i], c, bc1, bc2);
}

}  // namespace serial

namespace omp {

void matvec(const Real* W, const Real* b, const Real* x, Real* y, int rows, int cols) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const Real* w = W + std::size_t(r) * cols;
    Real acc = b ? b[r] : Real(0);
    for (int c = 0; c < cols; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

// Each thread owns a block of columns and sweeps all rows over it.
void matvec_t(const Real* W, const Real* g, Real* dx, int rows, int cols) {
#pragma omp parallel
  {
    int nt = omp_get_num_threads();
    int tid = omp_get_thread_num();
    int c0 = int(long(cols) * tid / nt);
    int c1 = int(long(cols) * (tid + 1) / nt);
    for (int r = 0; r < rows; ++r) {
      const Real* w = W + std::size_t(r) * cols;
      for (int c = c0; c < c1; ++c) dx[c] += w[c] * g[r];
    }
  }
}

void outer_acc(Real* dW, const Real* g, const Real* x, int rows, int cols) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    if (g[r] == 0.0) continue;
    Real* w = dW + std::size_t(r) * cols;
    for (int c = 0; c < cols; ++c) w[c] += g[r] * x[c];
  }
}

void adam(Real* p, const Real* g, Real* m, Real* v, std::size_t n, const AdamCoeffs& c) {
  Real bc1 = 1 - std::pow(c.beta1, Real(c.step));
  Real bc2 = 1 - std::pow(c.beta2, Real(c.step));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < long(n); ++i) {
    adam_one(p[i], g[i], m[i], v[i], c, bc1, bc2);
  }
}

}  // namespace omp

void matvec(const Real* W, const Real* b, const Real* x, Real* y, int rows, int cols) {
  if (long(rows) * cols >= kParallelMin) omp::matvec(W, b, x, y, rows, cols);
  else serial::matvec(W, b, x, y, rows, cols);
}

void matvec_t(const Real* W, const Real* g, Real* dx, int rows, int cols) {
  if (long(rows) * cols >= kParallelMin) omp::matvec_t(W, g, dx, rows, cols);
  else serial::matvec_t(W, g, dx, rows, cols);
}

void outer_acc(Real* dW, const Real* g, const Real* x, int rows, int cols) {
  if (long(rows) * cols >= kParallelMin) omp::outer_acc(dW, g, x, rows, cols);
  else serial::outer_acc(dW, g, x, rows, cols);
}

void adam(Real* p, const Real* g, Real* m, Real* v, std::size_t n, const AdamCoeffs& c) {
  if (long(n) >= kParallelMin) omp::adam(p, g, m, v, n, c);
  else serial::adam(p, g, m, v, n, c);
}

}  // namespace goalnet::inline GOALNET_NUMERIC_NS::kern
