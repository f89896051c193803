#include <doctest.h>

#include <cmath>
#include <vector>

#include "levybsde/errors.hpp"
#include "levybsde/regression.hpp"
#include "levybsde/rng.hpp"

using namespace levybsde;

namespace {

std::vector<double> sample_state(std::size_t n) {
  CounterRng rng(3, 0, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
  return x;
}

}  // namespace

TEST_CASE("constant responses are reproduced exactly") {
  const auto x = sample_state(500);
  Regressor reg(x, {3, false, 1.0, 1e-8}, 0);
  std::vector<double> r(x.size(), 0.7), out(x.size());
  reg.project(r, out);
  for (double v : out) CHECK(v == 0.7);
}

TEST_CASE("polynomials inside the span are recovered") {
  const auto x = sample_state(400);
  Regressor reg(x, {3, false, 1.0, 0.0}, 0);
  CHECK(reg.n_features() == 3);
  std::vector<double> r(x.size()), out(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) r[p] = 1.0 - 2.0 * x[p] + 0.5 * x[p] * x[p] * x[p];
  reg.project(r, out);
  for (std::size_t p = 0; p < x.size(); ++p) CHECK(out[p] == doctest::Approx(r[p]).epsilon(1e-9));
}

TEST_CASE("projection is idempotent and may alias its input") {
  const auto x = sample_state(300);
  Regressor reg(x, {2, true, 1.0, 1e-8}, 0);
  std::vector<double> r(x.size()), once(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) r[p] = std::sin(3.0 * x[p]);
  reg.project(r, once);
  auto twice = once;
  reg.project(twice, twice);
  for (std::size_t p = 0; p < x.size(); ++p) CHECK(twice[p] == doctest::Approx(once[p]).epsilon(1e-8));
}

TEST_CASE("residual is orthogonal to the features") {
  const auto x = sample_state(300);
  Regressor reg(x, {2, false, 1.0, 0.0}, 0);
  std::vector<double> r(x.size()), fit(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) r[p] = std::exp(x[p]);
  reg.project(r, fit);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) {
    s0 += r[p] - fit[p];
    s1 += (r[p] - fit[p]) * x[p];
  }
  CHECK(std::abs(s0) < 1e-9);
  CHECK(std::abs(s1) < 1e-9);
}

TEST_CASE("constant state drops every feature and returns the mean") {
  std::vector<double> x(50, 0.3), r(50), out(50);
  for (std::size_t p = 0; p < r.size(); ++p) r[p] = static_cast<double>(p);
  Regressor reg(x, {4, true, 1.0, 1e-8}, 0);
  CHECK(reg.n_features() == 0);
  reg.project(r, out);
  for (double v : out) CHECK(v == doctest::Approx(24.5));
}

TEST_CASE("boundary indicator feature") {
  std::vector<double> x{-1.0, -0.5, 0.0, 0.5, 1.0, 1.0, -1.0, 0.2};
  std::vector<double> r(x.size()), out(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) r[p] = std::abs(x[p]) >= 1.0 ? 5.0 : 0.0;
  Regressor reg(x, {0, true, 1.0, 0.0}, 0);
  CHECK(reg.n_features() == 1);
  reg.project(r, out);
  for (std::size_t p = 0; p < x.size(); ++p) CHECK(out[p] == doctest::Approx(r[p]));
}

TEST_CASE("basis validation and doubling") {
  CHECK_THROWS_AS((RegressionBasis{-1, false, 1.0, 0.0}.validate()), ValidationError);
  CHECK_THROWS_AS((RegressionBasis{2, false, 1.0, -1.0}.validate()), ValidationError);
  CHECK(RegressionBasis{0, false, 1.0, 0.0}.doubled().degree == 2);
  CHECK(RegressionBasis{3, false, 1.0, 0.0}.doubled().degree == 6);
}

TEST_CASE("rank loss names the node") {
  // two distinct states cannot carry a quadratic without ridge
  std::vector<double> x{0.0, 1.0, 0.0, 1.0};
  try {
    Regressor reg(x, {2, false, 1.0, 0.0}, 17);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("node 17") != std::string::npos);
  }
}
