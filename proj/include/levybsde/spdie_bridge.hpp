#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "levybsde/levy_basis.hpp"
#include "levybsde/path_engine.hpp"
#include "levybsde/reflected_forward.hpp"
#include "levybsde/solver.hpp"

namespace levybsde {

/// Markovian data: X is the reflected process started at (t, x), A = |eta|,
/// S_s = h(s, X_s) and xi = l(X_T).
struct MarkovianProblem {
  std::function<double(double)> l;
  CoefficientSpec coeffs;
  std::function<double(double, double)> h;  // optional obstacle
  ReflectedCoefficients reflection;
  LevyMeasureModel model;
  int m = 1;

  /// Checks h(T, x) = l(x) on the given x values.
  void validate(std::span<const double> x_values, double T) const;
  Problem to_problem() const;
};

struct SurfaceConfig {
  double T = 1.0;
  std::vector<double> t_grid;
  std::vector<double> x_grid;
  double dt = 1e-2;
  std::size_t n_paths = 200;
  std::uint64_t seed = 1;
  RegressionBasis basis{2, true, 1.0, 1e-8};
  SchemeSpec scheme{};
  FixedPointOptions fixed_point{};
  std::size_t threads = 1;
};

struct SurfacePoint {
  double t = 0.0;
  double x = 0.0;
  double u = 0.0;
  double stderr_u = 0.0;
  double u_minus_h = 0.0;         // NaN without obstacle
  double neumann_residual = 0.0;  // NaN away from +-theta
  int iterations = 0;
};

struct SurfaceEstimate {
  std::vector<double> t_grid;
  std::vector<double> x_grid;
  std::vector<SurfacePoint> points;  // t-major

  const SurfacePoint& at(std::size_t ti, std::size_t xi) const { return points[ti * x_grid.size() + xi]; }
  std::vector<double> u_row(std::size_t ti) const;
};

/// One independent solve per (t, x) with n = round((T - t) / dt) steps.
/// Every point shares the Brownian path B (keyed by distance to T); the
/// Lévy paths are seeded per point. The t = T row is l(x) exactly.
SurfaceEstimate estimate_surface(const MarkovianProblem& problem, const SurfaceConfig& config);

/// CSV: t,x,u,stderr,u_minus_h,neumann_residual.
void write_surface_csv(std::ostream& out, const SurfaceEstimate& surface);

struct JumpOperatorValues {
  std::vector<double> u1;  // per atom of nu, in model order
  std::vector<double> ui;  // u^(i), i = 1..m
  double du_dx = 0.0;
  bool projected = false;  // some x + sigma(x) y left the x-grid range
};

/// u^1(x, y) = u(x + sigma(x) y) - u(x) - u'(x) sigma(x) y and
/// u^(i)(x) = sum_atoms rate u^1(x, y) p_i(y), plus sigma(x) u'(x) (int y^2 nu)^{1/2}
/// for i = 1. u is interpolated with 4-point Lagrange stencils and u' is
/// the 3-point difference (one-sided at the ends). Needs >= 4 grid points.
JumpOperatorValues apply_jump_operators(std::span<const double> x_grid, std::span<const double> u_values,
                                        const LevyMeasureModel& model, const PolynomialBasis& basis,
                                        const ReflectedCoefficients& reflection, double x);

struct ZConsistencyReport {
  std::vector<double> rel_rms_gap;  // per martingale
  std::size_t n_samples = 0;
  std::size_t boundary_rows = 0;    // samples with X on the boundary
};

/// Compares the regression Z at `node` with the operator values applied
/// to the surface row `u_values` at each path's state.
ZConsistencyReport z_consistency_check(const MarkovianProblem& problem, const PolynomialBasis& basis,
                                       std::span<const double> x_grid, std::span<const double> u_values,
                                       const DiscreteSolution& solution, const NodeMatrix& state,
                                       std::size_t node);

/// Configuration of the single-atom example nu = alpha delta_beta.
struct PoissonExampleConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double a = 0.0;  // E[L_1]; the Lévy drift is a - alpha beta
  int m = 3;
  double T = 1.0;
  int n_steps = 100;
  std::size_t n_paths = 500;
  std::uint64_t seed = 1;
  double x0 = 0.0;
  double theta = 1.0;
  std::function<double(double)> sigma;
  double sigma_lipschitz = 0.0;
  std::function<double(double)> l;
  CoefficientSpec coeffs;
  std::function<double(double, double)> h;
  RegressionBasis basis{2, true, 1.0, 1e-8};
  SchemeSpec scheme{};
  FixedPointOptions fixed_point{};
  std::size_t threads = 1;
};

struct PoissonExampleReport {
  int effective_dim = 0;
  bool higher_martingales_zero = true;  // H^(i) == 0 exactly for i >= 2
  double h1_max_dev = 0.0;              // vs sign(beta) (N_t - alpha t) / sqrt(alpha)
  double beta_form_max_dev = 0.0;      // vs beta (N_t - alpha t) / sqrt(alpha)
  double solver_max_diff = 0.0;         // generic vs specialized Y, all nodes and paths
  double y0_generic = 0.0;
  double y0_specialized = 0.0;
  int iterations_generic = 0;
  int iterations_specialized = 0;
  double a_prime = 0.0;
};

PoissonExampleReport example_poisson(const PoissonExampleConfig& config);

/// Scalar m = 1 recursion with dH = sign(beta) (dN - alpha dt) / sqrt(alpha)
/// taken from jump counts. Returns Y; `iterations` receives the pass count.
NodeMatrix specialized_poisson_solve(const Problem& problem, const NodeMatrix& state, const NodeMatrix& dA,
                                     const NodeMatrix& dB, const NodeMatrix& jump_counts, double alpha,
                                     double beta, const TimeGrid& grid, const SchemeSpec& scheme,
                                     const RegressionBasis& basis, const FixedPointOptions& options,
                                     int* iterations = nullptr);

}  // namespace levybsde
