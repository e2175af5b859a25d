#pragma once

#include <cstddef>

namespace nhc::kernels {

// Inner-loop kernels behind the classifier and the estimators. Every variant
// (scalar reference, AVX2) must produce bit-identical output: the contraction
// walks the input index in ascending order with one accumulator per output
// lane, and all variants use unfused multiply-then-add. The library is built
// with -ffp-contract=off so the scalar path cannot be contracted into FMAs.

// y[b][j] = (bias ? bias[j] : 0) + sum_k x[b][k] * w_t[k*out_dim + j]
// w_t is the input-major (transposed) weight layout.
using DenseForwardFn = void (*)(const double* w_t, const double* bias,
                                std::size_t in_dim, std::size_t out_dim,
                                const double* x, double* y, std::size_t batch);

// v[i] = max(v[i], 0)
using ReluFn = void (*)(double* values, std::size_t n);

// out[i] = x[i] + strength * noise[i]
using PerturbFn = void (*)(const double* x, const double* noise, double strength,
                           double* out, std::size_t n);

// v[i] = min(max(v[i], lo), hi)
using ClampFn = void (*)(double* values, std::size_t n, double lo, double hi);

struct Kernels {
  const char* name;
  DenseForwardFn dense_forward;
  ReluFn relu;
  PerturbFn perturb;
  ClampFn clamp;
};

/// Reference implementations; the ground truth for equivalence tests.
const Kernels& scalar();

/// True when the AVX2 translation unit was built into this binary.
bool avx2_compiled();

/// True when AVX2 is both compiled in and supported by the running CPU.
bool avx2_supported();

/// AVX2 implementations. Only callable when avx2_supported().
const Kernels& avx2();

/// Kernel set selected once at startup: AVX2 when the CPU supports it,
/// otherwise scalar. NHC_KERNELS=scalar|avx2 in the environment overrides.
const Kernels& active();

}  // namespace nhc::kernels
