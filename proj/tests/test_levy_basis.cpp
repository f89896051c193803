#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <vector>

#include "levybsde/errors.hpp"
#include "levybsde/levy_basis.hpp"

using namespace levybsde;
using Q = boost::multiprecision::cpp_rational;

namespace {

struct RationalAtom {
  Q size;
  Q rate;
};

double to_double(const Q& q) { return q.convert_to<double>(); }

// Exact Gram-Schmidt of the monomials in L^2(mu); returns orthogonal,
// monic v_0 .. v_{m-1} and their squared norms.
struct Oracle {
  std::vector<std::vector<Q>> v;
  std::vector<Q> norm2;
};

Oracle rational_gram_schmidt(const std::vector<RationalAtom>& atoms, Q sigma0_sq, int m) {
  std::vector<Q> moments(static_cast<std::size_t>(2 * m), Q(0));
  for (std::size_t k = 0; k < moments.size(); ++k) {
    for (const auto& a : atoms) {
      Q p(1);
      for (std::size_t e = 0; e < k + 2; ++e) p *= a.size;
      moments[k] += a.rate * p;
    }
  }
  moments[0] += sigma0_sq;
  auto ip = [&](const std::vector<Q>& f, const std::vector<Q>& g) {
    Q s(0);
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = 0; b < g.size(); ++b) s += f[a] * g[b] * moments[a + b];
    return s;
  };
  Oracle o;
  for (int i = 0; i < m; ++i) {
    std::vector<Q> e(static_cast<std::size_t>(i + 1), Q(0));
    e.back() = Q(1);
    auto v = e;
    for (int j = 0; j < i; ++j) {
      const Q c = ip(e, o.v[static_cast<std::size_t>(j)]) / o.norm2[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < o.v[static_cast<std::size_t>(j)].size(); ++k)
        v[k] -= c * o.v[static_cast<std::size_t>(j)][k];
    }
    o.norm2.push_back(ip(v, v));
    o.v.push_back(v);
  }
  return o;
}

void check_against_oracle(const std::vector<RationalAtom>& atoms, Q sigma0_sq, double sigma0, int m) {
  std::vector<JumpAtom> model_atoms;
  for (const auto& a : atoms) model_atoms.push_back({to_double(a.size), to_double(a.rate)});
  const auto model = build_measure(model_atoms, sigma0, 0.0);
  const auto basis = orthonormal_basis(model, m);
  const auto oracle = rational_gram_schmidt(atoms, sigma0_sq, m);
  for (int i = 1; i <= m; ++i) {
    const auto& v = oracle.v[static_cast<std::size_t>(i - 1)];
    const double norm = std::sqrt(to_double(oracle.norm2[static_cast<std::size_t>(i - 1)]));
    for (int k = 1; k <= i; ++k) {
      const double expected = to_double(v[static_cast<std::size_t>(k - 1)]) / norm;
      CAPTURE(i);
      CAPTURE(k);
      CHECK(basis.coeff(i, k) == doctest::Approx(expected).epsilon(1e-11));
    }
  }
}

}  // namespace

TEST_CASE("two-atom basis matches the exact rational Gram-Schmidt") {
  check_against_oracle({{Q(1), Q(1)}, {Q(-1), Q(1)}}, Q(0), 0.0, 2);
}

TEST_CASE("asymmetric four-atom basis with Gaussian part matches the rational oracle") {
  const std::vector<RationalAtom> atoms{{Q(1, 2), Q(1)}, {Q(1), Q(1, 3)}, {Q(-3, 2), Q(2)}, {Q(2), Q(1, 4)}};
  check_against_oracle(atoms, Q(1, 4), 0.5, 5);
}

TEST_CASE("orthonormality in mu and in nu") {
  const auto model = build_measure({{0.5, 1.0}, {1.0, 1.0 / 3.0}, {-1.5, 2.0}, {2.0, 0.25}}, 0.0, 0.1);
  const auto basis = orthonormal_basis(model, 4);
  CHECK(basis.effective_dim() == 4);
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) {
      const double target = i == j ? 1.0 : 0.0;
      CHECK(std::abs(inner_product(model, basis.q(i), basis.q(j)) - target) < 1e-10);
      const double nu_ip = atomic_inner_product(
          model, [&](double x) { return basis.eval_p(i, x); }, [&](double x) { return basis.eval_p(j, x); },
          AtomicWeight::Nu);
      CHECK(std::abs(nu_ip - target) < 1e-10);
    }
}

TEST_CASE("rows past the support of mu are degenerate and zero") {
  const auto model = build_measure({{1.0, 1.0}}, 0.0, 0.0);
  const auto basis = orthonormal_basis(model, 3);
  CHECK(basis.effective_dim() == 1);
  CHECK_FALSE(basis.degenerate(1));
  CHECK(basis.degenerate(2));
  CHECK(basis.degenerate(3));
  CHECK(basis.coeff(1, 1) == doctest::Approx(1.0));
  for (int k = 1; k <= 2; ++k) CHECK(basis.coeff(2, k) == 0.0);
  for (int k = 1; k <= 3; ++k) CHECK(basis.coeff(3, k) == 0.0);

  const auto with_gauss = build_measure({{1.0, 1.0}}, 1.0, 0.0);
  CHECK(orthonormal_basis(with_gauss, 3).effective_dim() == 2);
}

TEST_CASE("Gaussian-only measure gives a single martingale") {
  const auto model = build_measure({}, 2.0, 0.0);
  const auto basis = orthonormal_basis(model, 2);
  CHECK(basis.effective_dim() == 1);
  CHECK(basis.coeff(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("moments and power-jump expectations") {
  const auto model = build_measure({{1.0, 2.0}, {-0.5, 4.0}}, 0.0, 0.3);
  CHECK(model.total_rate() == doctest::Approx(6.0));
  CHECK(model.nu_moment(1) == doctest::Approx(0.0));
  CHECK(model.nu_moment(2) == doctest::Approx(3.0));
  CHECK(model.expected_power_jump(1) == doctest::Approx(0.3));
  CHECK(model.expected_power_jump(3) == doctest::Approx(1.5));
  CHECK(model.a_prime() == doctest::Approx(2.3));
  CHECK(model.jumps_bounded_by(1.0));
  CHECK_FALSE(model.jumps_bounded_by(0.9));
}

TEST_CASE("malformed measures are rejected") {
  CHECK_THROWS_AS(build_measure({{0.0, 1.0}}, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(build_measure({{1.0, -1.0}}, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(build_measure({{1.0, 1.0}, {1.0, 2.0}}, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(build_measure({{1.0, 1.0}}, -1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(build_measure({}, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(build_measure({{NAN, 1.0}}, 0.0, 0.0), ValidationError);
  const auto model = build_measure({{1.0, 1.0}}, 0.0, 0.0);
  CHECK_THROWS_AS(orthonormal_basis(model, 0), ValidationError);
}

TEST_CASE("basis remembers its measure") {
  const auto a = build_measure({{1.0, 1.0}}, 0.0, 0.0);
  const auto b = build_measure({{1.0, 2.0}}, 0.0, 0.0);
  const auto basis = orthonormal_basis(a, 2);
  CHECK(basis.matches(a));
  CHECK_FALSE(basis.matches(b));
}
