#include <cstdlib>
#include <string>

#include "stokes_mg/common.hpp"
#include "stokes_mg/kernels.hpp"

namespace stokes::kernels {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*gather_dot)(const double*, const int*, std::size_t, const double*);
};

constexpr Table kScalar{scalar::dot, scalar::axpy, scalar::gather_dot};
constexpr Table kAvx2{avx2::dot, avx2::axpy, avx2::gather_dot};

Isa detect() {
  if (const char* env = std::getenv("STOKES_MG_ISA"); env && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

Isa g_isa = detect();
const Table* g_table = g_isa == Isa::avx2 ? &kAvx2 : &kScalar;

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return g_isa; }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw Error("instruction set not supported: " + std::string(isa_name(isa)));
  g_isa = isa;
  g_table = isa == Isa::avx2 ? &kAvx2 : &kScalar;
}

double dot(std::span<const double> x, std::span<const double> y) {
  return g_table->dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  g_table->axpy(a, x.data(), y.data(), x.size());
}

double gather_dot(std::span<const double> vals, std::span<const int> cols, const double* x) {
  return g_table->gather_dot(vals.data(), cols.data(), vals.size(), x);
}

void csr_multiply(std::span<const int> row_ptr, std::span<const int> cols,
                  std::span<const double> vals, const double* x, double* y, std::size_t rows) {
  const auto gd = g_table->gather_dot;
  for (std::size_t i = 0; i < rows; ++i) {
    const int b = row_ptr[i];
    const int e = row_ptr[i + 1];
    y[i] = gd(vals.data() + b, cols.data() + b, static_cast<std::size_t>(e - b), x);
  }
}

}  // namespace stokes::kernels
