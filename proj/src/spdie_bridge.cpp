#include "levybsde/spdie_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "levybsde/csv.hpp"
#include "levybsde/errors.hpp"
#include "levybsde/kernels.hpp"
#include "levybsde/rng.hpp"

namespace levybsde {

namespace {

constexpr double kBoundarySlack = 1e-12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_terminal(double t, double T) { return std::abs(T - t) <= 1e-12 * std::max(1.0, std::abs(T)); }

void check_grid(std::span<const double> x_grid, std::span<const double> u_values) {
  if (x_grid.size() < 4) throw ValidationError("x grid too coarse: at least 4 points are needed for the stencils");
  if (u_values.size() != x_grid.size()) throw ValidationError("u values and x grid differ in length");
  for (std::size_t k = 1; k < x_grid.size(); ++k)
    if (!(x_grid[k] > x_grid[k - 1])) throw ValidationError("x grid must be strictly increasing");
}

std::vector<double> nodal_derivative(std::span<const double> x, std::span<const double> u) {
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hm = x[j] - x[j - 1], hp = x[j + 1] - x[j];
    d[j] = -hp / (hm * (hm + hp)) * u[j - 1] + (hp - hm) / (hm * hp) * u[j] + hm / (hp * (hm + hp)) * u[j + 1];
  }
  {
    const double h1 = x[1] - x[0], h2 = x[2] - x[1];
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * u[0] + (h1 + h2) / (h1 * h2) * u[1] - h1 / (h2 * (h1 + h2)) * u[2];
  }
  {
    const double h1 = x[n - 1] - x[n - 2], h2 = x[n - 2] - x[n - 3];
    d[n - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * u[n - 1] - (h1 + h2) / (h1 * h2) * u[n - 2] +
               h1 / (h2 * (h1 + h2)) * u[n - 3];
  }
  return d;
}

double lagrange4(std::span<const double> x, std::span<const double> v, double at) {
  const std::size_t n = x.size();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const std::size_t idx = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  const std::size_t start = std::min(idx > 0 ? idx - 1 : 0, n - 4);
  double s = 0.0;
  for (std::size_t a = start; a < start + 4; ++a) {
    double w = 1.0;
    for (std::size_t b = start; b < start + 4; ++b)
      if (b != a) w *= (at - x[b]) / (x[a] - x[b]);
    s += w * v[a];
  }
  return s;
}

}  // namespace

void MarkovianProblem::validate(std::span<const double> x_values, double T) const {
  if (!l) throw ValidationError("terminal function l is missing");
  if (m < 1) throw ValidationError("martingale count m must be >= 1");
  if (!h) return;
  for (double x : x_values) {
    const double a = h(T, x), b = l(x);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b))) {
      std::ostringstream msg;
      msg << "obstacle must meet the terminal condition: h(T, " << x << ") = " << a << " but l = " << b;
      throw ValidationError(msg.str());
    }
  }
}

Problem MarkovianProblem::to_problem() const {
  Problem p;
  p.coeffs = coeffs;
  p.obstacle.xi = l;
  p.obstacle.S = h;
  return p;
}

std::vector<double> SurfaceEstimate::u_row(std::size_t ti) const {
  std::vector<double> out(x_grid.size());
  for (std::size_t k = 0; k < x_grid.size(); ++k) out[k] = at(ti, k).u;
  return out;
}

SurfaceEstimate estimate_surface(const MarkovianProblem& problem, const SurfaceConfig& config) {
  if (config.t_grid.empty() || config.x_grid.empty()) throw ValidationError("surface grids must be nonempty");
  if (!(config.dt > 0.0)) throw ValidationError("surface dt must be > 0");
  if (config.n_paths < 1) throw ValidationError("surface n_paths must be >= 1");
  const double theta = problem.reflection.theta();
  for (double x : config.x_grid)
    if (x < -theta || x > theta) {
      std::ostringstream msg;
      msg << "surface x = " << x << " lies outside [-theta, theta]";
      throw ValidationError(msg.str());
    }
  for (double t : config.t_grid)
    if (!(t <= config.T) || !std::isfinite(t)) throw ValidationError("surface t values must be <= T");
  problem.validate(config.x_grid, config.T);

  const auto basis = orthonormal_basis(problem.model, problem.m);
  auto reg = config.basis;
  reg.theta = theta;
  const auto pde_problem = problem.to_problem();

  SurfaceEstimate out;
  out.t_grid = config.t_grid;
  out.x_grid = config.x_grid;
  SimulationOptions sim;
  sim.brownian = BrownianMode::Shared;
  sim.brownian_seed = mix_seed(config.seed, 0xb) | 1u;
  sim.threads = config.threads;

  for (std::size_t ti = 0; ti < config.t_grid.size(); ++ti) {
    const double t = config.t_grid[ti];
    for (std::size_t xi = 0; xi < config.x_grid.size(); ++xi) {
      const double x = config.x_grid[xi];
      SurfacePoint pt;
      pt.t = t;
      pt.x = x;
      if (is_terminal(t, config.T)) {
        pt.u = problem.l(x);
      } else {
        try {
          const int n = std::max(1, static_cast<int>(std::lround((config.T - t) / config.dt)));
          const auto grid = TimeGrid::make(t, config.T, n);
          auto bundle = simulate_bundle(problem.model, basis, grid, config.n_paths,
                                        mix_seed(config.seed, ti + 1, xi + 1), sim);
          auto reflected = reflect_bundle(problem.reflection, bundle, x, config.threads);
          bundle = attach_increasing_process(std::move(bundle),
                                             {IncreasingProcessSpec::Imported{std::move(reflected.abs_eta)}});
          const auto input = make_solver_input(bundle, &reflected.x);
          const auto sol = fixed_point_solve(pde_problem, input, config.scheme, reg, config.fixed_point,
                                             config.threads);
          pt.u = sol.mean_y(0);
          pt.stderr_u = sol.y0_stderr;
          pt.iterations = sol.iterations;
        } catch (const SolverError& e) {
          std::ostringstream msg;
          msg << "surface point (t = " << t << ", x = " << x << "): " << e.what();
          throw SolverError(msg.str());
        } catch (const ValidationError& e) {
          std::ostringstream msg;
          msg << "surface point (t = " << t << ", x = " << x << "): " << e.what();
          throw ValidationError(msg.str());
        }
      }
      pt.u_minus_h = problem.h ? pt.u - problem.h(t, x) : kNaN;
      pt.neumann_residual = kNaN;
      out.points.push_back(pt);
    }
  }

  const std::size_t nx = config.x_grid.size();
  if (nx >= 3) {
    for (std::size_t ti = 0; ti < config.t_grid.size(); ++ti) {
      const auto row = out.u_row(ti);
      const auto& xg = config.x_grid;
      const double h1 = xg[1] - xg[0], h2 = xg[2] - xg[1];
      const double d_lo = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * row[0] + (h1 + h2) / (h1 * h2) * row[1] -
                          h1 / (h2 * (h1 + h2)) * row[2];
      const double g1 = xg[nx - 1] - xg[nx - 2], g2 = xg[nx - 2] - xg[nx - 3];
      const double d_hi = (2.0 * g1 + g2) / (g1 * (g1 + g2)) * row[nx - 1] - (g1 + g2) / (g1 * g2) * row[nx - 2] +
                          g1 / (g2 * (g1 + g2)) * row[nx - 3];
      const double t = config.t_grid[ti];
      const auto phi = [&](double x, double u) { return problem.coeffs.phi ? problem.coeffs.phi(t, x, u) : 0.0; };
      if (xg[0] <= -theta + kBoundarySlack) {
        auto& pt = out.points[ti * nx];
        pt.neumann_residual = problem.reflection.boundary_direction(-theta) * d_lo + phi(pt.x, pt.u);
      }
      if (xg[nx - 1] >= theta - kBoundarySlack) {
        auto& pt = out.points[ti * nx + nx - 1];
        pt.neumann_residual = problem.reflection.boundary_direction(theta) * d_hi + phi(pt.x, pt.u);
      }
    }
  }
  return out;
}

void write_surface_csv(std::ostream& out, const SurfaceEstimate& surface) {
  CsvWriter csv(out);
  csv.header({"t", "x", "u", "stderr", "u_minus_h", "neumann_residual"});
  for (const auto& p : surface.points) {
    csv.field(p.t).field(p.x).field(p.u).field(p.stderr_u).field(p.u_minus_h).field(p.neumann_residual);
    csv.end_row();
  }
}

JumpOperatorValues apply_jump_operators(std::span<const double> x_grid, std::span<const double> u_values,
                                        const LevyMeasureModel& model, const PolynomialBasis& basis,
                                        const ReflectedCoefficients& reflection, double x) {
  check_grid(x_grid, u_values);
  const auto du = nodal_derivative(x_grid, u_values);
  const double lo = x_grid.front(), hi = x_grid.back();
  JumpOperatorValues out;
  const double xc = std::clamp(x, lo, hi);
  out.projected = xc != x;
  const double sig = reflection.sigma(xc);
  const double u_x = lagrange4(x_grid, u_values, xc);
  out.du_dx = lagrange4(x_grid, du, xc);

  const int m = basis.size();
  out.ui.assign(static_cast<std::size_t>(m), 0.0);
  for (const auto& atom : model.atoms()) {
    double target = xc + sig * atom.size;
    if (target < lo || target > hi) {
      out.projected = true;
      target = std::clamp(target, lo, hi);
    }
    const double u1 = lagrange4(x_grid, u_values, target) - u_x - out.du_dx * sig * atom.size;
    out.u1.push_back(u1);
    for (int i = 1; i <= m; ++i)
      out.ui[static_cast<std::size_t>(i - 1)] += atom.rate * u1 * basis.eval_p(i, atom.size);
  }
  out.ui[0] += sig * out.du_dx * std::sqrt(model.nu_moment(2));
  return out;
}

ZConsistencyReport z_consistency_check(const MarkovianProblem& problem, const PolynomialBasis& basis,
                                       std::span<const double> x_grid, std::span<const double> u_values,
                                       const DiscreteSolution& solution, const NodeMatrix& state,
                                       std::size_t node) {
  if (node >= solution.Y.nodes() || state.nodes() != solution.Y.nodes() || state.paths() != solution.Y.paths())
    throw ValidationError("z consistency: node or state shape does not match the solution");
  const auto m = static_cast<std::size_t>(std::min(solution.m(), basis.size()));
  const std::size_t n_paths = state.paths();
  ZConsistencyReport rep;
  rep.n_samples = n_paths;
  std::vector<double> num(m, 0.0), den(m, 0.0);
  const double theta = problem.reflection.theta();
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double x = state(node, p);
    if (std::abs(x) >= theta - kBoundarySlack) ++rep.boundary_rows;
    const auto ops = apply_jump_operators(x_grid, u_values, problem.model, basis, problem.reflection, x);
    for (std::size_t j = 0; j < m; ++j) {
      const double d = solution.Z[j](node, p) - ops.ui[j];
      num[j] += d * d;
      den[j] += ops.ui[j] * ops.ui[j];
    }
  }
  for (std::size_t j = 0; j < m; ++j)
    rep.rel_rms_gap.push_back(std::sqrt(num[j] / n_paths) / std::max(std::sqrt(den[j] / n_paths), 1e-12));
  return rep;
}

NodeMatrix specialized_poisson_solve(const Problem& problem, const NodeMatrix& state, const NodeMatrix& dA,
                                     const NodeMatrix& dB, const NodeMatrix& jump_counts, double alpha,
                                     double beta, const TimeGrid& grid, const SchemeSpec& scheme,
                                     const RegressionBasis& basis, const FixedPointOptions& options,
                                     int* iterations) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0");
  const std::size_t n_nodes = static_cast<std::size_t>(grid.n_nodes());
  const std::size_t n_steps = n_nodes - 1;
  const std::size_t n_paths = state.paths();
  const double dt = grid.dt();
  const double scale = (beta > 0.0 ? 1.0 : -1.0) / std::sqrt(alpha);

  NodeMatrix dH(n_steps, n_paths);
  for (std::size_t i = 0; i < n_steps; ++i)
    for (std::size_t p = 0; p < n_paths; ++p) dH(i, p) = scale * (jump_counts(i, p) - alpha * dt);

  ProbeDomain domain;
  domain.t0 = grid.t0;
  domain.T = grid.T;
  domain.m = 1;
  validate_coefficients(problem.coeffs, domain);
  const bool coupled = g_depends_on_yz(problem.coeffs, domain);
  const auto norm = WeightedNorm::from(problem.coeffs, options.alpha_prime);

  NodeMatrix S(n_nodes, n_paths, -std::numeric_limits<double>::infinity());
  if (problem.obstacle.S)
    for (std::size_t i = 0; i < n_nodes; ++i)
      for (std::size_t p = 0; p < n_paths; ++p) S(i, p) = problem.obstacle.S(grid.node(static_cast<int>(i)), state(i, p));

  NodeMatrix y_bar(n_nodes, n_paths), z_bar(n_nodes, n_paths);
  std::vector<double> fit(n_paths), resid(n_paths), work(n_paths), target(n_paths), yhat(n_paths), dk(n_paths);
  for (int k = 1; k <= options.max_iter; ++k) {
    NodeMatrix Y(n_nodes, n_paths), Z(n_nodes, n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) Y(n_nodes - 1, p) = problem.obstacle.xi(state(n_nodes - 1, p));
    for (std::size_t i = n_steps; i-- > 0;) {
      const double t = grid.node(static_cast<int>(i));
      const double t_next = grid.node(static_cast<int>(i) + 1);
      const Regressor reg(state.row(i), basis, static_cast<int>(i));
      const auto y_next = Y.row(i + 1);
      reg.project(y_next, fit);
      std::copy(y_next.begin(), y_next.end(), resid.begin());
      kernels::axpy(-1.0, fit, resid);
      kernels::multiply(resid, dH.row(i), work);
      reg.project(work, work);
      kernels::affine(work, 1.0 / dt, 0.0, Z.row(i));
      for (std::size_t p = 0; p < n_paths; ++p) {
        const double x = state(i, p);
        const double y1 = y_next[p];
        const double z[1] = {Z(i, p)};
        double v = y1 + (problem.coeffs.f ? problem.coeffs.f(t, x, y1, z) : 0.0) * dt;
        if (problem.coeffs.phi && dA(i, p) != 0.0) v += problem.coeffs.phi(t, x, y1) * dA(i, p);
        if (problem.coeffs.g && dB(i, p) != 0.0) {
          const double zg[1] = {z_bar(i + 1, p)};
          v += problem.coeffs.g(t_next, state(i + 1, p), y_bar(i + 1, p), zg) * dB(i, p);
        }
        target[p] = v;
      }
      reg.project(target, yhat);
      if (scheme.kind == Scheme::Penalized)
        kernels::penalty_step(yhat, S.row(i), scheme.n_penalty * dt, Y.row(i), dk);
      else
        kernels::direct_step(yhat, S.row(i), Y.row(i), dk);
    }
    const double delta = norm.distance(grid, Y, {Z}, y_bar, {z_bar});
    if (!coupled || delta < options.tol) {
      if (iterations) *iterations = k;
      return Y;
    }
    y_bar = std::move(Y);
    z_bar = std::move(Z);
  }
  throw SolverError("specialized Poisson solver did not converge");
}

PoissonExampleReport example_poisson(const PoissonExampleConfig& config) {
  if (!(config.alpha > 0.0)) throw ValidationError("alpha must be > 0");
  if (!config.l) throw ValidationError("terminal function l is missing");
  if (!config.sigma) throw ValidationError("sigma is missing");

  MarkovianProblem problem;
  problem.l = config.l;
  problem.coeffs = config.coeffs;
  problem.h = config.h;
  problem.reflection = ReflectedCoefficients::make(config.theta, config.sigma, config.sigma_lipschitz);
  problem.model = build_measure({{config.beta, config.alpha}}, 0.0, config.a - config.alpha * config.beta);
  problem.m = config.m;

  PoissonExampleReport rep;
  const auto basis = orthonormal_basis(problem.model, problem.m);
  rep.effective_dim = basis.effective_dim();
  rep.a_prime = problem.model.a_prime();
  if (rep.effective_dim != 1) throw SolverError("single-atom model did not give effective_dim = 1");

  const auto grid = TimeGrid::make(0.0, config.T, config.n_steps);
  SimulationOptions sim;
  sim.threads = config.threads;
  auto bundle = simulate_bundle(problem.model, basis, grid, config.n_paths, config.seed, sim);

  const std::size_t n_nodes = static_cast<std::size_t>(grid.n_nodes());
  const std::size_t n_paths = config.n_paths;
  NodeMatrix counts(n_nodes - 1, n_paths);
  for (std::size_t p = 0; p < n_paths; ++p)
    for (const auto& j : bundle.jumps(p)) counts(static_cast<std::size_t>(j.step), p) += 1.0;

  for (int i = 2; i <= bundle.m(); ++i)
    for (double v : bundle.teugels(i).values())
      if (v != 0.0) rep.higher_martingales_zero = false;
  const double sign = config.beta > 0.0 ? 1.0 : -1.0;
  const double root = std::sqrt(config.alpha);
  for (std::size_t p = 0; p < n_paths; ++p) {
    double n_t = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (i > 0) n_t += counts(i - 1, p);
      const double comp = n_t - config.alpha * (grid.node(static_cast<int>(i)) - grid.t0);
      const double h = bundle.teugels(1)(i, p);
      rep.h1_max_dev = std::max(rep.h1_max_dev, std::abs(h - sign * comp / root));
      rep.beta_form_max_dev = std::max(rep.beta_form_max_dev, std::abs(h - config.beta * comp / root));
    }
  }

  auto reflected = reflect_bundle(problem.reflection, bundle, config.x0, config.threads);
  bundle = attach_increasing_process(std::move(bundle), {IncreasingProcessSpec::Imported{reflected.abs_eta}});
  const auto input = make_solver_input(bundle, &reflected.x);
  auto reg = config.basis;
  reg.theta = config.theta;
  const auto pde_problem = problem.to_problem();

  const auto generic = fixed_point_solve(pde_problem, input, config.scheme, reg, config.fixed_point, config.threads);
  int spec_iters = 0;
  const auto special = specialized_poisson_solve(pde_problem, input.state, input.dA, input.dB, counts, config.alpha,
                                                 config.beta, grid, config.scheme, reg, config.fixed_point,
                                                 &spec_iters);
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t p = 0; p < n_paths; ++p)
      rep.solver_max_diff = std::max(rep.solver_max_diff, std::abs(generic.Y(i, p) - special(i, p)));
  rep.y0_generic = generic.mean_y(0);
  const auto row0 = special.row(0);
  rep.y0_specialized = row0[0] + kernels::sum_shifted(row0, row0[0]) / static_cast<double>(n_paths);
  rep.iterations_generic = generic.iterations;
  rep.iterations_specialized = spec_iters;
  return rep;
}

}  // namespace levybsde
