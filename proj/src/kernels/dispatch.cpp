#include <cstdlib>
#include <string>

#include "xdrs/error.hpp"
#include "xdrs/kernels.hpp"

namespace xdrs::kernels {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*gemv)(const double*, const double*, double*, std::size_t, std::size_t);
  void (*gemv_t)(const double*, const double*, double*, std::size_t, std::size_t);
  void (*ger)(const double*, const double*, double*, std::size_t, std::size_t);
};

constexpr Table kScalar{scalar::dot, scalar::axpy, scalar::gemv, scalar::gemv_t, scalar::ger};
constexpr Table kAvx2{avx2::dot, avx2::axpy, avx2::gemv, avx2::gemv_t, avx2::ger};

Isa initial_isa() {
  if (const char* env = std::getenv("XDRS_ISA")) {
    if (std::string(env) == "scalar") return Isa::Scalar;
  }
  return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

Isa g_isa = initial_isa();
const Table* g_table = g_isa == Isa::Avx2 ? &kAvx2 : &kScalar;

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  if (!avx2::compiled()) return false;
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return g_isa; }

void set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available()) fail(ErrorKind::ConfigError, "AVX2/FMA not available on this CPU");
  g_isa = isa;
  g_table = isa == Isa::Avx2 ? &kAvx2 : &kScalar;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) { return g_table->dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { g_table->axpy(alpha, x, y, n); }
void gemv(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  g_table->gemv(A, x, y, rows, cols);
}
void gemv_t(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  g_table->gemv_t(A, x, y, rows, cols);
}
void ger(const double* x, const double* y, double* A, std::size_t rows, std::size_t cols) {
  g_table->ger(x, y, A, rows, cols);
}

}  // namespace xdrs::kernels
