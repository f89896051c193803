#include "levybsde/kernels.hpp"

namespace levybsde::kernels {

namespace {

double sum_shifted(const double* x, std::size_t n, double shift) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += x[k] - shift;
  return s;
}

double dot_shifted(const double* a, const double* r, std::size_t n, double shift) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * (r[k] - shift);
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

void affine(const double* x, double scale, double offset, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] * scale + offset;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * b[k];
}

void penalty_step(const double* yhat, const double* s, double n_dt, double* y, double* dk,
                  std::size_t n) {
  const double denom = 1.0 + n_dt;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = yhat[k] >= s[k] ? yhat[k] : (yhat[k] + n_dt * s[k]) / denom;
    const double gap = s[k] - v;
    y[k] = v;
    dk[k] = n_dt * (gap > 0.0 ? gap : 0.0);
  }
}

void direct_step(const double* yhat, const double* s, double* y, double* dk, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const bool push = yhat[k] < s[k];
    y[k] = push ? s[k] : yhat[k];
    dk[k] = push ? s[k] - yhat[k] : 0.0;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{sum_shifted, dot_shifted, axpy,       affine,
                                 multiply,    penalty_step, direct_step};
  return table;
}

}  // namespace levybsde::kernels
