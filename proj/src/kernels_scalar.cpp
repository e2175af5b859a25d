#include "nhc/kernels.hpp"

namespace nhc::kernels {

namespace {

void dense_forward_scalar(const double* w_t, const double* bias,
                          std::size_t in_dim, std::size_t out_dim,
                          const double* x, double* y, std::size_t batch) {
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x + b * in_dim;
    double* yb = y + b * out_dim;
    for (std::size_t j = 0; j < out_dim; ++j) yb[j] = bias ? bias[j] : 0.0;
    for (std::size_t k = 0; k < in_dim; ++k) {
      const double xk = xb[k];
      const double* wk = w_t + k * out_dim;
      for (std::size_t j = 0; j < out_dim; ++j) yb[j] += xk * wk[j];
    }
  }
}

void relu_scalar(double* values, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) values[i] = values[i] > 0.0 ? values[i] : 0.0;
}

void perturb_scalar(const double* x, const double* noise, double strength,
                    double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + strength * noise[i];
}

// Operand order mirrors maxpd/minpd so the -0.0 cases round-trip identically.
void clamp_scalar(double* values, std::size_t n, double lo, double hi) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = values[i] > lo ? values[i] : lo;
    values[i] = t < hi ? t : hi;
  }
}

}  // namespace

const Kernels& scalar() {
  static constexpr Kernels k{"scalar", dense_forward_scalar, relu_scalar,
                             perturb_scalar, clamp_scalar};
  return k;
}

}  // namespace nhc::kernels
