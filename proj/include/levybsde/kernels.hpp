#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace levybsde::kernels {

// Inner loops of the regression and penalty steps. Each kernel has a scalar
// reference and an AVX2 variant; the active table is picked once at startup.
// Elementwise kernels are bit-identical across backends. Reductions differ
// only by summation order.

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  // sum_k (x_k - shift)
  double (*sum_shifted)(const double* x, std::size_t n, double shift);
  // sum_k a_k (r_k - shift)
  double (*dot_shifted)(const double* a, const double* r, std::size_t n, double shift);
  // y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = x * scale + offset
  void (*affine)(const double* x, double scale, double offset, double* out, std::size_t n);
  // out = a * b
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  // y = yhat >= s ? yhat : (yhat + n_dt s) / (1 + n_dt);  dk = n_dt max(s - y, 0)
  void (*penalty_step)(const double* yhat, const double* s, double n_dt, double* y, double* dk,
                       std::size_t n);
  // y = max(yhat, s);  dk = max(s - yhat, 0)
  void (*direct_step)(const double* yhat, const double* s, double* y, double* dk, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(LEVYBSDE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

bool backend_available(Backend backend);
/// Forces a backend. Returns false (and changes nothing) if unavailable.
bool set_backend(Backend backend);
Backend active_backend();
std::string_view backend_name(Backend backend);
const KernelTable& active();

inline double sum_shifted(std::span<const double> x, double shift) {
  return active().sum_shifted(x.data(), x.size(), shift);
}
inline double dot_shifted(std::span<const double> a, std::span<const double> r, double shift) {
  return active().dot_shifted(a.data(), r.data(), a.size(), shift);
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void affine(std::span<const double> x, double scale, double offset, std::span<double> out) {
  active().affine(x.data(), scale, offset, out.data(), out.size());
}
inline void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().multiply(a.data(), b.data(), out.data(), out.size());
}
inline void penalty_step(std::span<const double> yhat, std::span<const double> s, double n_dt,
                         std::span<double> y, std::span<double> dk) {
  active().penalty_step(yhat.data(), s.data(), n_dt, y.data(), dk.data(), y.size());
}
inline void direct_step(std::span<const double> yhat, std::span<const double> s, std::span<double> y,
                        std::span<double> dk) {
  active().direct_step(yhat.data(), s.data(), y.data(), dk.data(), y.size());
}

}  // namespace levybsde::kernels
