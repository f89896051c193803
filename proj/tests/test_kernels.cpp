#include <doctest.h>

#include <cmath>
#include <vector>

#include "levybsde/kernels.hpp"
#include "levybsde/rng.hpp"

using namespace levybsde;
namespace k = levybsde::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint32_t stream) {
  CounterRng rng(5, n, stream);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

struct Outputs {
  double sum = 0.0;
  double dot = 0.0;
  std::vector<double> axpy, affine, multiply, pen_y, pen_k, dir_y, dir_k;
};

Outputs run_all(std::size_t n) {
  const auto a = random_vector(n, 1);
  const auto b = random_vector(n, 2);
  auto s = random_vector(n, 3);
  // exact ties exercise the comparison edge
  for (std::size_t i = 0; i < n; i += 5) s[i] = a[i];
  Outputs o;
  o.sum = k::sum_shifted(a, 0.25);
  o.dot = k::dot_shifted(a, b, -0.5);
  o.axpy = b;
  k::axpy(1.7, a, o.axpy);
  o.affine.resize(n);
  k::affine(a, 3.0, -0.1, o.affine);
  o.multiply.resize(n);
  k::multiply(a, b, o.multiply);
  o.pen_y.resize(n);
  o.pen_k.resize(n);
  k::penalty_step(a, s, 0.37, o.pen_y, o.pen_k);
  o.dir_y.resize(n);
  o.dir_k.resize(n);
  k::direct_step(a, s, o.dir_y, o.dir_k);
  return o;
}

}  // namespace

TEST_CASE("scalar reference semantics") {
  REQUIRE(k::set_backend(k::Backend::Scalar));
  std::vector<double> yhat{0.0, 1.0, 2.0}, s{1.0, 1.0, 0.0}, y(3), dk(3);
  k::direct_step(yhat, s, y, dk);
  CHECK(y == std::vector<double>{1.0, 1.0, 2.0});
  CHECK(dk == std::vector<double>{1.0, 0.0, 0.0});
  k::penalty_step(yhat, s, 1.0, y, dk);
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(dk[0] == doctest::Approx(0.5));
  CHECK(y[1] == 1.0);
  CHECK(dk[1] == 0.0);
  CHECK(y[2] == 2.0);
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK(k::sum_shifted(x, 2.0) == 0.0);
  CHECK(k::dot_shifted(x, x, 1.0) == doctest::Approx(8.0));
  CHECK(k::sum_shifted(std::span<const double>{}, 1.0) == 0.0);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!k::backend_available(k::Backend::Avx2)) {
    MESSAGE("AVX2 backend not available on this machine; skipping");
    return;
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 1001u}) {
    CAPTURE(n);
    REQUIRE(k::set_backend(k::Backend::Scalar));
    const auto ref = run_all(n);
    REQUIRE(k::set_backend(k::Backend::Avx2));
    const auto vec = run_all(n);
    CHECK(vec.sum == doctest::Approx(ref.sum).epsilon(1e-13));
    CHECK(vec.dot == doctest::Approx(ref.dot).epsilon(1e-13));
    CHECK(vec.axpy == ref.axpy);
    CHECK(vec.affine == ref.affine);
    CHECK(vec.multiply == ref.multiply);
    CHECK(vec.pen_y == ref.pen_y);
    CHECK(vec.pen_k == ref.pen_k);
    CHECK(vec.dir_y == ref.dir_y);
    CHECK(vec.dir_k == ref.dir_k);
  }
  k::set_backend(k::Backend::Scalar);
}

TEST_CASE("backend names") {
  CHECK(k::backend_name(k::Backend::Scalar) == "scalar");
  CHECK(k::backend_name(k::Backend::Avx2) == "avx2");
  CHECK(k::backend_available(k::Backend::Scalar));
}
