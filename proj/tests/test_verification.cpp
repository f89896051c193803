#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "levybsde/errors.hpp"
#include "levybsde/verification.hpp"

using namespace levybsde;

namespace {

SolverInput jump_free_input(int n_steps, std::size_t n_paths) {
  const auto model = build_measure({}, 1.0, 0.0);
  const auto basis = orthonormal_basis(model, 1);
  auto bundle = simulate_bundle(model, basis, TimeGrid::make(0.0, 1.0, n_steps), n_paths, 21);
  return make_solver_input(bundle);
}

}  // namespace

TEST_CASE("Doleans-Dade kernel") {
  const auto input = jump_free_input(10, 4);
  NodeMatrix zero(10, 4);
  NodeMatrix a(10, 4, -1.0);
  auto k = doleans_dade(a, zero, {}, input);
  CHECK(k.positive);
  CHECK(k.gamma(10, 2) == doctest::Approx(std::pow(0.9, 10)));

  NodeMatrix big(10, 4, -20.0);
  const auto neg = doleans_dade(big, zero, {}, input);
  CHECK_FALSE(neg.positive);
  CHECK(neg.nonpositive_factors == 40);
  CHECK(neg.min_factor == doctest::Approx(-1.0));

  NodeMatrix wrong(3, 4);
  CHECK_THROWS_AS(doleans_dade(wrong, zero, {}, input), ValidationError);
}

TEST_CASE("comparison holds with a shifted terminal value") {
  const auto input = jump_free_input(50, 300);
  Problem p2;
  p2.obstacle.xi = [](double x) { return x; };
  p2.coeffs.f = [](double, double, double y, std::span<const double> z) { return -0.5 * y + 0.2 * z[0]; };
  auto p1 = p2;
  p1.obstacle.xi = [](double x) { return x + 1.0; };
  const auto rep = check_comparison(p1, p2, input, {}, {2, false, 1.0, 1e-8});
  CHECK(rep.holds());
  CHECK(rep.hypotheses_verified);
  CHECK(rep.kernel_positive);
  CHECK(rep.min_diff > 0.5);
  CHECK(rep.epsilon_reg < 1e-3);
  CHECK(rep.min_diff_per_node.size() == 51);
}

TEST_CASE("comparison flags unverified hypotheses") {
  const auto input = jump_free_input(10, 50);
  Problem p2;
  p2.obstacle.xi = [](double) { return 1.0; };
  auto p1 = p2;
  p1.obstacle.xi = [](double) { return 0.0; };
  const auto rep = check_comparison(p1, p2, input, {}, {1, false, 1.0, 1e-8});
  CHECK_FALSE(rep.hypotheses_verified);
  CHECK_FALSE(rep.holds());
  CHECK_FALSE(rep.note.empty());
}

TEST_CASE("compensation identity is exact under the nu convention") {
  const auto model = build_measure({{0.5, 2.0}, {-1.0, 1.0}}, 0.0, 0.1);
  const auto basis = orthonormal_basis(model, 2);
  const auto bundle = simulate_bundle(model, basis, TimeGrid::make(0.0, 1.0, 50), 500, 5);
  const auto c = [](double, double y) { return y * y; };
  const auto audit = audit_compensation(model, basis, bundle, c, 1.0);
  CHECK(audit.selected == InnerProductConvention::Nu);
  CHECK(audit.exact);
  CHECK(audit.nu.max_abs_gap <= 1e-10);
  CHECK(audit.mu.max_abs_gap > 1e-6);
  CHECK(audit.nu.n_paths == 500);

  CHECK_THROWS_AS(check_compensation(model, basis, bundle, [](double, double) { return 1.0; }, 1.0,
                                     InnerProductConvention::Nu),
                  ValidationError);
}

TEST_CASE("property suite detects a decreasing K") {
  std::ifstream in(LEVYBSDE_FIXTURE_DIR "/corrupted_solution.csv");
  REQUIRE(in);
  const auto sol = read_solution_csv(in, Scheme::Direct, 0.0);
  const auto rep = property_suite(sol);
  CHECK_FALSE(rep.all_pass());
  CHECK_FALSE(rep.get("k_monotone").pass);
  CHECK(rep.get("k_monotone").worst == doctest::Approx(0.25));
  CHECK(rep.get("k_initial_zero").pass);
  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["k_monotone"]["pass"] == false);
  CHECK(rep.to_text().find("k_monotone") != std::string::npos);
  CHECK_THROWS_AS(rep.get("no_such_property"), std::out_of_range);
}

TEST_CASE("property suite passes on a direct solve") {
  const auto input = jump_free_input(20, 100);
  Problem p;
  p.obstacle.xi = [](double x) { return x * x; };
  p.obstacle.S = [](double, double x) { return 0.5 * x * x - 0.2; };
  const auto sol = solve_reflected_direct(p, input, {2, false, 1.0, 1e-8});
  const auto rep = property_suite(sol);
  CHECK(rep.all_pass());
  CHECK(rep.get("skorokhod_residual").worst == 0.0);
}

TEST_CASE("Doleans-Dade product tends to the exponential") {
  const auto input = jump_free_input(1000, 2);
  NodeMatrix zero(1000, 2), one(1000, 2, 1.0);
  const auto k = doleans_dade(one, zero, {}, input);
  CHECK(k.gamma(1000, 0) == doctest::Approx(std::exp(1.0)).epsilon(2e-3));
}

TEST_CASE("a jump that makes a factor negative is flagged") {
  const auto model = build_measure({{1.0, 1.0}}, 0.0, 0.0);
  const auto basis = orthonormal_basis(model, 1);
  SimulationOptions opt;
  opt.sample_jumps = false;
  opt.forced_jumps = {{0, 0.5, 1.0}};
  const auto bundle = simulate_bundle(model, basis, TimeGrid::make(0.0, 1.0, 10), 1, 1, opt);
  const auto input = make_solver_input(bundle);
  NodeMatrix zero(10, 1), beta(10, 1, -1.5);
  const auto k = doleans_dade(zero, zero, {beta}, input);
  CHECK_FALSE(k.positive);
  CHECK(k.nonpositive_factors == 1);
}
