#include "stokes_mg/kernels.hpp"

namespace stokes::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double gather_dot(const double* vals, const int* cols, std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += vals[k] * x[cols[k]];
  return s;
}

}  // namespace stokes::kernels::scalar
