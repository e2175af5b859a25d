#include "nhc/kernels.hpp"

#include <immintrin.h>

// Vector lanes run over the output index; the contraction index k advances
// one step at a time exactly like the scalar kernel, so each output sees the
// same sequence of mul/add roundings and the results match bit for bit.

namespace nhc::kernels {

namespace {

void dense_forward_avx2(const double* w_t, const double* bias,
                        std::size_t in_dim, std::size_t out_dim,
                        const double* x, double* y, std::size_t batch) {
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x + b * in_dim;
    double* yb = y + b * out_dim;

    std::size_t j = 0;
    if (bias) {
      for (; j + 4 <= out_dim; j += 4) _mm256_storeu_pd(yb + j, _mm256_loadu_pd(bias + j));
      for (; j < out_dim; ++j) yb[j] = bias[j];
    } else {
      const __m256d zero = _mm256_setzero_pd();
      for (; j + 4 <= out_dim; j += 4) _mm256_storeu_pd(yb + j, zero);
      for (; j < out_dim; ++j) yb[j] = 0.0;
    }

    for (std::size_t k = 0; k < in_dim; ++k) {
      const double xk = xb[k];
      const __m256d xv = _mm256_set1_pd(xk);
      const double* wk = w_t + k * out_dim;
      std::size_t j2 = 0;
      for (; j2 + 4 <= out_dim; j2 += 4) {
        const __m256d prod = _mm256_mul_pd(xv, _mm256_loadu_pd(wk + j2));
        _mm256_storeu_pd(yb + j2, _mm256_add_pd(_mm256_loadu_pd(yb + j2), prod));
      }
      for (; j2 < out_dim; ++j2) yb[j2] += xk * wk[j2];
    }
  }
}

void relu_avx2(double* values, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(values + i, _mm256_max_pd(_mm256_loadu_pd(values + i), zero));
  for (; i < n; ++i) values[i] = values[i] > 0.0 ? values[i] : 0.0;
}

void perturb_avx2(const double* x, const double* noise, double strength,
                  double* out, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(strength);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(sv, _mm256_loadu_pd(noise + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), prod));
  }
  for (; i < n; ++i) out[i] = x[i] + strength * noise[i];
}

void clamp_avx2(double* values, std::size_t n, double lo, double hi) {
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(values + i);
    v = _mm256_min_pd(_mm256_max_pd(v, lov), hiv);
    _mm256_storeu_pd(values + i, v);
  }
  for (; i < n; ++i) {
    const double t = values[i] > lo ? values[i] : lo;
    values[i] = t < hi ? t : hi;
  }
}

}  // namespace

const Kernels& avx2() {
  static constexpr Kernels k{"avx2", dense_forward_avx2, relu_avx2,
                             perturb_avx2, clamp_avx2};
  return k;
}

}  // namespace nhc::kernels
