#pragma once

// Dense double-precision kernels behind the autodiff engine. Each kernel
// has a scalar reference and an AVX2/FMA variant; the variant is picked
// once at startup from CPUID (override with XDRS_ISA=scalar|avx2).

#include <cstddef>
#include <string_view>

namespace xdrs::kernels {

enum class Isa { Scalar, Avx2 };

bool avx2_available();
Isa active_isa();
void set_isa(Isa isa);  // throws ConfigError if the CPU lacks it
std::string_view isa_name(Isa isa);

double dot(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// y += A x, A row-major rows x cols
void gemv(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
// y += A^T x
void gemv_t(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
// A += x y^T
void ger(const double* x, const double* y, double* A, std::size_t rows, std::size_t cols);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
void gemv_t(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
void ger(const double* x, const double* y, double* A, std::size_t rows, std::size_t cols);
}  // namespace scalar

namespace avx2 {
bool compiled();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
void gemv_t(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
void ger(const double* x, const double* y, double* A, std::size_t rows, std::size_t cols);
}  // namespace avx2

}  // namespace xdrs::kernels
