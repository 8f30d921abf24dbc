#include "xdrs/kernels.hpp"

namespace xdrs::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot(A + r * cols, x, cols);
}

void gemv_t(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], A + r * cols, y, cols);
}

void ger(const double* x, const double* y, double* A, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], y, A + r * cols, cols);
}

}  // namespace xdrs::kernels::scalar
