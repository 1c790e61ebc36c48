#pragma once

// Data-parallel inner loops used by the sparse, dense and patch solvers.
//
// Every kernel has a portable scalar reference in `kernels::scalar` and an
// AVX2/FMA variant in `kernels::avx2`. The unqualified entry points dispatch
// at runtime to the best variant the CPU supports; set STOKES_MG_ISA=scalar
// in the environment to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace stokes::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Switches the dispatch target. Throws stokes::Error if `isa` is unsupported.
void set_isa(Isa isa);

double dot(std::span<const double> x, std::span<const double> y);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// Sum over k of vals[k] * x[cols[k]].
double gather_dot(std::span<const double> vals, std::span<const int> cols, const double* x);
/// y[i] = sum_k vals[k] x[cols[k]] over row i of a CSR matrix.
void csr_multiply(std::span<const int> row_ptr, std::span<const int> cols,
                  std::span<const double> vals, const double* x, double* y, std::size_t rows);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double gather_dot(const double* vals, const int* cols, std::size_t n, const double* x);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double gather_dot(const double* vals, const int* cols, std::size_t n, const double* x);
}  // namespace avx2

}  // namespace stokes::kernels
