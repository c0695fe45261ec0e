#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a plain serial reference kept for tests and benchmarks.
//
// The OpenMP kernels assign every output entry to exactly one thread and sum
// in a fixed order, so their results do not depend on the thread count.

#include <span>

#include "relest/core.hpp"

namespace relest {

enum class Execution { kSerial, kParallel };

namespace kernels {

struct TraceProducts {
  Matrix a;  // m x m, a(g,f) = tr(W_g W_f)
  Vector b;  // m,     b(g)   = tr(W_g V)
};

namespace serial {

/// (1/n) sum (x - mu)(x - mu)^T, one entry at a time.
Matrix scatter(const Matrix& rows, const Vector& mu);

/// Reference trace products from explicit matrix products.
TraceProducts trace_products(std::span<const Matrix> w, const Matrix& v);

}  // namespace serial

namespace omp {

/// Parallel over output entries (i, j), i <= j; each entry sums over rows in order.
Matrix scatter(const Matrix& rows, const Vector& mu);

/// Parallel over (g, f) pairs; traces are computed elementwise without forming products.
TraceProducts trace_products(std::span<const Matrix> w, const Matrix& v);

}  // namespace omp

/// Sets the OpenMP thread count for subsequent parallel regions (0 keeps the default).
void set_threads(int threads);
int max_threads();

}  // namespace kernels
}  // namespace relest
