#pragma once

// Dense kernels used by the network. `serial` is the reference; `omp`
// splits work so that every output element is reduced by one thread in the
// same order as the serial loop, so both produce bitwise-identical results.

#include <cstddef>

#include "goalnet/real.hpp"

namespace goalnet::inline GOALNET_NUMERIC_NS::kern {

struct AdamCoeffs {
  Real lr, beta1, beta2, eps;
  long step;  // 1-based
};

namespace serial {
// y = W x + b   (W is rows × cols, row-major; b may be null)
void matvec(const Real* W, const Real* b, const Real* x, Real* y, int rows, int cols);
// dx += Wᵀ g
void matvec_t(const Real* W, const Real* g, Real* dx, int rows, int cols);
// dW += g xᵀ
void outer_acc(Real* dW, const Real* g, const Real* x, int rows, int cols);
void adam(Real* p, const Real* g, Real* m, Real* v, std::size_t n, const AdamCoeffs& c);
}  // namespace serial

namespace omp {
void matvec(const Real* W, const Real* b, const Real* x, Real* y, int rows, int cols);
void matvec_t(const Real* W, const Real* g, Real* dx, int rows, int cols);
void outer_acc(Real* dW, const Real* g, const Real* x, int rows, int cols);
void adam(Real* p, const Real* g, Real* m, Real* v, std::size_t n, const AdamCoeffs& c);
}  // namespace omp

// What the network calls: the OpenMP kernels above a size threshold.
void matvec(const Real* W, const Real* b, const Real* x, Real* y, int rows, int cols);
void matvec_t(const Real* W, const Real* g, Real* dx, int rows, int cols);
void outer_acc(Real* dW, const Real* g, const Real* x, int rows, int cols);
void adam(Real* p, const Real* g, Real* m, Real* v, std::size_t n, const AdamCoeffs& c);

}  // namespace goalnet::inline GOALNET_NUMERIC_NS::kern
