#include "levybsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "levybsde/csv.hpp"
#include "levybsde/errors.hpp"
#include "levybsde/kernels.hpp"
#include "levybsde/parallel.hpp"
#include "levybsde/rng.hpp"

namespace levybsde {

namespace {

constexpr double kProbeRelSlack = 1e-9;
constexpr double kProbeAbsSlack = 1e-12;
constexpr double kNoObstacle = -std::numeric_limits<double>::infinity();

struct Probe {
  double t, x, y1, y2;
  std::vector<double> z1, z2;
};

std::vector<Probe> make_probes(const ProbeDomain& d) {
  CounterRng rng(d.seed, 0x9e0b, 0);
  std::vector<Probe> probes;
  probes.reserve(static_cast<std::size_t>(d.n_probes));
  const auto mz = static_cast<std::size_t>(std::max(0, d.m));
  for (int k = 0; k < d.n_probes; ++k) {
    Probe p;
    p.t = d.t0 + (d.T - d.t0) * rng.uniform();
    p.x = d.x_lo + (d.x_hi - d.x_lo) * rng.uniform();
    p.y1 = d.yz_range * (2.0 * rng.uniform() - 1.0);
    // probes with k % 4 == 1 hold y fixed, k % 4 == 2 hold z fixed
    p.y2 = (k % 4 == 1) ? p.y1 : d.yz_range * (2.0 * rng.uniform() - 1.0);
    p.z1.resize(mz);
    p.z2.resize(mz);
    for (std::size_t j = 0; j < mz; ++j) {
      p.z1[j] = d.yz_range * (2.0 * rng.uniform() - 1.0);
      p.z2[j] = (k % 4 == 2) ? p.z1[j] : d.yz_range * (2.0 * rng.uniform() - 1.0);
    }
    probes.push_back(std::move(p));
  }
  return probes;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

[[noreturn]] void probe_failure(std::string_view what, const Probe& p, double lhs, double rhs) {
  std::ostringstream msg;
  msg << what << " at probe (t=" << p.t << ", x=" << p.x << ", y1=" << p.y1 << ", y2=" << p.y2
      << "): " << lhs << " > " << rhs;
  throw ValidationError(msg.str());
}

bool exceeds(double lhs, double rhs) { return lhs > rhs * (1.0 + kProbeRelSlack) + kProbeAbsSlack; }

double eval_driver(const DriverFn& fn, double t, double x, double y, std::span<const double> z) {
  return fn ? fn(t, x, y, z) : 0.0;
}

std::string ratio_history(const std::vector<double>& ratios) {
  std::ostringstream msg;
  msg << "[";
  for (std::size_t k = 0; k < ratios.size(); ++k) msg << (k ? ", " : "") << ratios[k];
  msg << "]";
  return msg.str();
}

}  // namespace

void validate_coefficients(const CoefficientSpec& coeffs, const ProbeDomain& domain) {
  const double c = coeffs.lipschitz_c;
  const double alpha = coeffs.g_z_alpha;
  const double beta = coeffs.phi_monotone_beta;
  if (!std::isfinite(c) || c <= 0.0) throw ValidationError("lipschitz_c must be finite and > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("g_z_alpha must lie in (0, 1)");
  if (!std::isfinite(beta) || beta > 0.0) throw ValidationError("phi_monotone_beta must be finite and <= 0");
  if (!std::isfinite(coeffs.growth_K) || coeffs.growth_K < 0.0)
    throw ValidationError("growth_K must be finite and >= 0");

  for (const auto& p : make_probes(domain)) {
    const double dy2 = (p.y1 - p.y2) * (p.y1 - p.y2);
    const double dz2 = sq_dist(p.z1, p.z2);
    if (coeffs.f) {
      const double a = coeffs.f(p.t, p.x, p.y1, p.z1);
      const double b = coeffs.f(p.t, p.x, p.y2, p.z2);
      if (!std::isfinite(a) || !std::isfinite(b)) probe_failure("f is not finite", p, a, b);
      if (exceeds((a - b) * (a - b), c * (dy2 + dz2)))
        probe_failure("f violates the Lipschitz bound", p, (a - b) * (a - b), c * (dy2 + dz2));
    }
    if (coeffs.phi) {
      const double a = coeffs.phi(p.t, p.x, p.y1);
      const double b = coeffs.phi(p.t, p.x, p.y2);
      if (!std::isfinite(a) || !std::isfinite(b)) probe_failure("phi is not finite", p, a, b);
      const double mono = (p.y1 - p.y2) * (a - b);
      if (mono > beta * dy2 + kProbeRelSlack * std::abs(beta * dy2) + kProbeAbsSlack)
        probe_failure("phi violates monotonicity", p, mono, beta * dy2);
      if (exceeds(std::abs(a - b), c * std::sqrt(dy2)))
        probe_failure("phi violates the Lipschitz bound", p, std::abs(a - b), c * std::sqrt(dy2));
    }
    if (coeffs.g) {
      const double a = coeffs.g(p.t, p.x, p.y1, p.z1);
      const double b = coeffs.g(p.t, p.x, p.y2, p.z2);
      if (!std::isfinite(a) || !std::isfinite(b)) probe_failure("g is not finite", p, a, b);
      if (exceeds((a - b) * (a - b), c * dy2 + alpha * dz2))
        probe_failure("g violates the (c, alpha) bound", p, (a - b) * (a - b), c * dy2 + alpha * dz2);
    }
  }
}

bool g_depends_on_yz(const CoefficientSpec& coeffs, const ProbeDomain& domain) {
  if (!coeffs.g) return false;
  for (const auto& p : make_probes(domain))
    if (coeffs.g(p.t, p.x, p.y1, p.z1) != coeffs.g(p.t, p.x, p.y2, p.z2)) return true;
  return false;
}

ProbeDomain SolverInput::probe_domain() const {
  ProbeDomain d;
  d.t0 = grid.t0;
  d.T = grid.T;
  d.m = m();
  const auto v = state.values();
  if (!v.empty()) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    d.x_lo = *lo;
    d.x_hi = *hi;
  }
  return d;
}

SolverInput make_solver_input(const PathBundle& bundle, const NodeMatrix* state) {
  SolverInput in;
  in.grid = bundle.grid();
  if (state) {
    if (state->nodes() != static_cast<std::size_t>(in.grid.n_nodes()) || state->paths() != bundle.n_paths())
      throw ValidationError("state process does not match the bundle shape");
    in.state = *state;
  } else {
    in.state = bundle.levy();
  }
  for (int i = 1; i <= bundle.m(); ++i) in.dH.push_back(step_increments(bundle.teugels(i)));
  in.dB = backward_increments(bundle);
  in.dA = step_increments(bundle.increasing());
  return in;
}

std::string_view scheme_name(Scheme scheme) { return scheme == Scheme::Direct ? "direct" : "penalized"; }

double DiscreteSolution::mean_y(std::size_t node) const {
  const auto row = Y.row(node);
  return row[0] + kernels::sum_shifted(row, row[0]) / static_cast<double>(row.size());
}

DiscreteSolution solve_scheme(const Problem& problem, const SolverInput& input, const SchemeSpec& scheme,
                              const RegressionBasis& basis, const Iterate* frozen, std::size_t threads) {
  basis.validate();
  if (!problem.obstacle.xi) throw ValidationError("terminal condition xi is missing");
  if (scheme.kind == Scheme::Penalized && (!std::isfinite(scheme.n_penalty) || scheme.n_penalty < 0.0))
    throw ValidationError("n_penalty must be finite and >= 0");

  const auto& grid = input.grid;
  const int n_steps = grid.n_steps;
  const std::size_t n_nodes = static_cast<std::size_t>(grid.n_nodes());
  const std::size_t n_paths = input.n_paths();
  const int m = input.m();
  const auto msz = static_cast<std::size_t>(m);
  const double dt = grid.dt();
  if (input.state.nodes() != n_nodes || input.dB.nodes() != n_nodes - 1 || input.dA.nodes() != n_nodes - 1)
    throw ValidationError("solver input shapes do not match the grid");
  if (frozen && (frozen->Y.nodes() != n_nodes || frozen->Z.size() != msz))
    throw ValidationError("frozen iterate shape does not match the input");

  DiscreteSolution sol;
  sol.grid = grid;
  sol.scheme = scheme.kind;
  sol.n_penalty = scheme.kind == Scheme::Penalized ? scheme.n_penalty : 0.0;
  sol.Y = NodeMatrix(n_nodes, n_paths);
  for (int j = 0; j < m; ++j) sol.Z.emplace_back(n_nodes, n_paths);
  sol.K = NodeMatrix(n_nodes, n_paths);
  sol.S = NodeMatrix(n_nodes, n_paths, kNoObstacle);

  const auto& obstacle = problem.obstacle.S;
  if (obstacle) {
    parallel_for(n_paths, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = 0; i < n_nodes; ++i) {
        const double t = grid.node(static_cast<int>(i));
        for (std::size_t p = b; p < e; ++p) sol.S(i, p) = obstacle(t, input.state(i, p));
      }
    });
  }
  {
    const auto last = n_nodes - 1;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double xi = problem.obstacle.xi(input.state(last, p));
      if (!std::isfinite(xi)) {
        std::ostringstream msg;
        msg << "terminal value is not finite on path " << p;
        throw SolverError(msg.str());
      }
      if (sol.S(last, p) > xi) {
        std::ostringstream msg;
        msg << "obstacle exceeds the terminal value at T on path " << p << " (S = " << sol.S(last, p)
            << ", xi = " << xi << ")";
        throw ValidationError(msg.str());
      }
      sol.Y(last, p) = xi;
    }
  }

  const auto& coeffs = problem.coeffs;
  NodeMatrix dK(n_nodes - 1, n_paths);
  std::vector<double> fit(n_paths), resid(n_paths), work(n_paths), target(n_paths), yhat(n_paths);

  for (int ii = n_steps - 1; ii >= 0; --ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double t = grid.node(ii);
    const double t_next = grid.node(ii + 1);
    const Regressor reg(input.state.row(i), basis, ii);
    const auto y_next = sol.Y.row(i + 1);

    reg.project(y_next, fit);
    std::copy(y_next.begin(), y_next.end(), resid.begin());
    kernels::axpy(-1.0, fit, resid);
    for (std::size_t j = 0; j < msz; ++j) {
      kernels::multiply(resid, input.dH[j].row(i), work);
      reg.project(work, work);
      kernels::affine(work, 1.0 / dt, 0.0, sol.Z[j].row(i));
    }

    const auto db = input.dB.row(i);
    const auto da = input.dA.row(i);
    parallel_for(n_paths, threads, [&](std::size_t b, std::size_t e) {
      std::vector<double> z(msz), zg(msz);
      for (std::size_t p = b; p < e; ++p) {
        const double x = input.state(i, p);
        const double y1 = y_next[p];
        for (std::size_t j = 0; j < msz; ++j) z[j] = sol.Z[j](i, p);
        double v = y1 + eval_driver(coeffs.f, t, x, y1, z) * dt;
        if (coeffs.phi && da[p] != 0.0) v += coeffs.phi(t, x, y1) * da[p];
        if (coeffs.g && db[p] != 0.0) {
          double yg = y1;
          for (std::size_t j = 0; j < msz; ++j) zg[j] = frozen ? frozen->Z[j](i + 1, p) : sol.Z[j](i + 1, p);
          if (frozen) yg = frozen->Y(i + 1, p);
          v += coeffs.g(t_next, input.state(i + 1, p), yg, zg) * db[p];
        }
        target[p] = v;
      }
    });

    if (ii == 0) {
      const double mean = target[0] + kernels::sum_shifted(target, target[0]) / static_cast<double>(n_paths);
      double var = 0.0;
      for (std::size_t p = 0; p < n_paths; ++p) var += (target[p] - mean) * (target[p] - mean);
      var /= static_cast<double>(std::max<std::size_t>(1, n_paths - 1));
      sol.y0_stderr = std::sqrt(var / static_cast<double>(n_paths));
    }

    reg.project(target, yhat);
    if (scheme.kind == Scheme::Penalized)
      kernels::penalty_step(yhat, sol.S.row(i), scheme.n_penalty * dt, sol.Y.row(i), dK.row(i));
    else
      kernels::direct_step(yhat, sol.S.row(i), sol.Y.row(i), dK.row(i));

    for (std::size_t p = 0; p < n_paths; ++p) {
      bool ok = std::isfinite(sol.Y(i, p)) && std::isfinite(dK(i, p));
      for (std::size_t j = 0; j < msz && ok; ++j) ok = std::isfinite(sol.Z[j](i, p));
      if (!ok) {
        std::ostringstream msg;
        msg << "non-finite value at node " << ii << " (t = " << t << ", path " << p << ")";
        throw SolverError(msg.str());
      }
    }
  }

  for (std::size_t i = 0; i + 1 < n_nodes; ++i) {
    std::copy(sol.K.row(i).begin(), sol.K.row(i).end(), sol.K.row(i + 1).begin());
    kernels::axpy(1.0, dK.row(i), sol.K.row(i + 1));
  }
  return sol;
}

DiscreteSolution solve_penalized(const Problem& problem, const SolverInput& input, double n_penalty,
                                 const RegressionBasis& basis, std::size_t threads) {
  return solve_scheme(problem, input, {Scheme::Penalized, n_penalty}, basis, nullptr, threads);
}

DiscreteSolution solve_reflected_direct(const Problem& problem, const SolverInput& input,
                                        const RegressionBasis& basis, std::size_t threads) {
  return solve_scheme(problem, input, {Scheme::Direct, 0.0}, basis, nullptr, threads);
}

WeightedNorm WeightedNorm::from(const CoefficientSpec& coeffs, double alpha_prime) {
  const double alpha = coeffs.g_z_alpha;
  const double c = coeffs.lipschitz_c;
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("g_z_alpha must lie in (0, 1)");
  const double ap = alpha_prime > 0.0 ? alpha_prime : 0.5 * (1.0 + alpha);
  if (!(ap > alpha && ap < 1.0)) throw ValidationError("alpha_prime must lie in (alpha, 1)");
  WeightedNorm w;
  w.alpha_prime = ap;
  const double gamma = c / (1.0 - ap) - 1.0 + alpha;
  w.mu = gamma + ap * c / alpha;
  w.c_bar = ap * c / alpha;
  return w;
}

double WeightedNorm::distance(const TimeGrid& grid, const NodeMatrix& y1, const std::vector<NodeMatrix>& z1,
                              const NodeMatrix& y2, const std::vector<NodeMatrix>& z2) const {
  const std::size_t n_paths = y1.paths();
  const double dt = grid.dt();
  double total = 0.0;
  for (int ii = 0; ii < grid.n_steps; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double dy = y1(i, p) - y2(i, p);
      double dz = 0.0;
      for (std::size_t j = 0; j < z1.size(); ++j) {
        const double d = z1[j](i, p) - z2[j](i, p);
        dz += d * d;
      }
      s += c_bar * dy * dy + alpha_prime * dz;
    }
    total += std::exp(-mu * grid.node(ii)) * s * dt;
  }
  return std::sqrt(total / static_cast<double>(n_paths));
}

DiscreteSolution fixed_point_solve(const Problem& problem, const SolverInput& input, const SchemeSpec& scheme,
                                   const RegressionBasis& basis, const FixedPointOptions& options,
                                   std::size_t threads) {
  if (!(options.tol > 0.0)) throw ValidationError("fixed-point tol must be > 0");
  if (options.max_iter < 1) throw ValidationError("fixed-point max_iter must be >= 1");
  const auto domain = input.probe_domain();
  validate_coefficients(problem.coeffs, domain);
  const auto norm = WeightedNorm::from(problem.coeffs, options.alpha_prime);
  const bool coupled = g_depends_on_yz(problem.coeffs, domain);

  const std::size_t n_nodes = static_cast<std::size_t>(input.grid.n_nodes());
  Iterate current{NodeMatrix(n_nodes, input.n_paths()), {}};
  for (int j = 0; j < input.m(); ++j) current.Z.emplace_back(n_nodes, input.n_paths());

  std::vector<double> deltas, ratios;
  for (int k = 1; k <= options.max_iter; ++k) {
    auto sol = solve_scheme(problem, input, scheme, basis, &current, threads);
    const double delta = norm.distance(input.grid, sol.Y, sol.Z, current.Y, current.Z);
    if (!deltas.empty()) ratios.push_back(deltas.back() > 0.0 ? delta / deltas.back() : 0.0);
    deltas.push_back(delta);
    if (!coupled || delta < options.tol) {
      sol.iterations = k;
      sol.deltas = deltas;
      sol.contraction_ratios = ratios;
      return sol;
    }
    current.Y = std::move(sol.Y);
    current.Z = std::move(sol.Z);
  }
  std::ostringstream msg;
  msg << "fixed point did not converge after " << options.max_iter << " iterations (last delta "
      << deltas.back() << ", tol " << options.tol << "); contraction ratios " << ratio_history(ratios);
  throw SolverError(msg.str());
}

std::vector<double> skorokhod_residuals(const DiscreteSolution& solution) {
  const std::size_t n_nodes = solution.Y.nodes();
  const std::size_t n_paths = solution.Y.paths();
  std::vector<double> out(n_paths, 0.0);
  for (std::size_t p = 0; p < n_paths; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n_nodes; ++i) {
      const double dk = solution.K(i + 1, p) - solution.K(i, p);
      if (dk != 0.0) s += (solution.Y(i, p) - solution.S(i, p)) * dk;
    }
    out[p] = s;
  }
  return out;
}

double a_priori_functional(const DiscreteSolution& solution) {
  const std::size_t n_nodes = solution.Y.nodes();
  const std::size_t n_paths = solution.Y.paths();
  const double dt = solution.grid.dt();
  double total = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    double sup_y = 0.0, zsum = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      sup_y = std::max(sup_y, solution.Y(i, p) * solution.Y(i, p));
      if (i + 1 < n_nodes)
        for (const auto& z : solution.Z) zsum += z(i, p) * z(i, p) * dt;
    }
    const double kT = solution.K(n_nodes - 1, p);
    total += sup_y + zsum + kT * kT;
  }
  return total / static_cast<double>(n_paths);
}

SweepResult penalization_sweep(const Problem& problem, const SolverInput& input, const RegressionBasis& basis,
                               const std::vector<double>& n_list, const FixedPointOptions& options,
                               std::size_t threads) {
  if (n_list.empty()) throw ValidationError("n_list must not be empty");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (!std::isfinite(n_list[k]) || n_list[k] < 0.0) throw ValidationError("n_list entries must be finite and >= 0");
    if (k > 0 && !(n_list[k] > n_list[k - 1])) throw ValidationError("n_list must be strictly increasing");
  }
  SweepResult result;
  const auto direct = fixed_point_solve(problem, input, {Scheme::Direct, 0.0}, basis, options, threads);
  result.direct_y0 = direct.mean_y(0);

  DiscreteSolution previous;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    auto sol = fixed_point_solve(problem, input, {Scheme::Penalized, n_list[k]}, basis, options, threads);
    SweepRow row;
    row.n = n_list[k];
    row.y0 = sol.mean_y(0);
    const std::size_t last = sol.K.nodes() - 1;
    const auto k_row = sol.K.row(last);
    row.k_T = k_row[0] + kernels::sum_shifted(k_row, k_row[0]) / static_cast<double>(k_row.size());
    for (double r : skorokhod_residuals(sol)) row.skorokhod = std::max(row.skorokhod, std::abs(r));
    row.gap_to_direct = std::abs(result.direct_y0 - row.y0);
    row.a_priori = a_priori_functional(sol);
    row.iterations = sol.iterations;
    if (k > 0) {
      const auto& prev_row = result.rows.back();
      row.cauchy = std::abs(row.y0 - prev_row.y0);
      const auto a = previous.Y.values();
      const auto b = sol.Y.values();
      for (std::size_t q = 0; q < a.size(); ++q) row.monotone_violation = std::max(row.monotone_violation, a[q] - b[q]);
      if (row.y0 < prev_row.y0) result.y0_nondecreasing = false;
      if (!(row.gap_to_direct < prev_row.gap_to_direct)) result.gap_decreasing = false;
    }
    result.rows.push_back(row);
    previous = std::move(sol);
  }
  return result;
}

RegressionAllowance estimate_regression_allowance(const Problem& problem, const SolverInput& input,
                                                  const SchemeSpec& scheme, const RegressionBasis& basis,
                                                  const FixedPointOptions& options, std::size_t threads) {
  const auto base = fixed_point_solve(problem, input, scheme, basis, options, threads);
  const auto rich = fixed_point_solve(problem, input, scheme, basis.doubled(), options, threads);
  RegressionAllowance out;
  const std::size_t n_paths = base.Y.paths();
  for (std::size_t i = 0; i < base.Y.nodes(); ++i) {
    double ss = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double d = rich.Y(i, p) - base.Y(i, p);
      ss += d * d;
    }
    out.epsilon = std::max(out.epsilon, std::sqrt(ss / static_cast<double>(n_paths)));
    out.mean_shift = std::max(out.mean_shift, std::abs(rich.mean_y(i) - base.mean_y(i)));
  }
  return out;
}

void write_solution_report(std::ostream& out, const DiscreteSolution& solution) {
  CsvWriter csv(out);
  csv.header({"node", "t", "mean_Y", "sd_Y", "mean_K", "skorokhod"});
  const std::size_t n_nodes = solution.Y.nodes();
  const std::size_t n_paths = solution.Y.paths();
  const double inv = 1.0 / static_cast<double>(n_paths);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double mean = solution.mean_y(i);
    double var = 0.0, mean_k = 0.0, sk = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      var += (solution.Y(i, p) - mean) * (solution.Y(i, p) - mean);
      mean_k += solution.K(i, p);
      if (i + 1 < n_nodes) {
        const double dk = solution.K(i + 1, p) - solution.K(i, p);
        if (dk != 0.0) sk += (solution.Y(i, p) - solution.S(i, p)) * dk;
      }
    }
    csv.field(i).field(solution.grid.node(static_cast<int>(i))).field(mean).field(std::sqrt(var * inv))
        .field(mean_k * inv).field(sk * inv);
    csv.end_row();
  }
}

void write_solution_csv(std::ostream& out, const DiscreteSolution& solution, std::size_t max_paths) {
  CsvWriter csv(out);
  std::vector<std::string> cols{"path_id", "node_index", "t", "Y"};
  for (int j = 1; j <= solution.m(); ++j) cols.push_back("Z_" + std::to_string(j));
  cols.push_back("K");
  cols.push_back("S");
  csv.header(cols);
  const std::size_t n = std::min(max_paths, solution.Y.paths());
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < solution.Y.nodes(); ++i) {
      csv.field(p).field(i).field(solution.grid.node(static_cast<int>(i))).field(solution.Y(i, p));
      for (const auto& z : solution.Z) csv.field(z(i, p));
      csv.field(solution.K(i, p)).field(solution.S(i, p));
      csv.end_row();
    }
  }
}

DiscreteSolution read_solution_csv(std::istream& in, Scheme scheme, double n_penalty) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("solution file is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "path_id" || header[1] != "node_index" || header[2] != "t" ||
      header[3] != "Y" || header[header.size() - 2] != "K" || header.back() != "S")
    throw ValidationError("solution file header must be path_id,node_index,t,Y,Z_1..Z_m,K,S");
  const std::size_t m = header.size() - 6;

  struct Row {
    double t, y, k, s;
    std::vector<double> z;
  };
  std::map<std::pair<std::size_t, std::size_t>, Row> rows;
  std::size_t max_path = 0, max_node = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      std::ostringstream msg;
      msg << "solution file line " << line_no << ": expected " << header.size() << " fields";
      throw ValidationError(msg.str());
    }
    auto num = [&](std::size_t k) {
      char* end = nullptr;
      const double v = std::strtod(f[k].c_str(), &end);
      if (end == f[k].c_str() || *end != '\0') {
        std::ostringstream msg;
        msg << "solution file line " << line_no << ": field '" << header[k] << "' is not a number";
        throw ValidationError(msg.str());
      }
      return v;
    };
    const auto p = static_cast<std::size_t>(num(0));
    const auto i = static_cast<std::size_t>(num(1));
    Row r{num(2), num(3), num(header.size() - 2), num(header.size() - 1), {}};
    for (std::size_t j = 0; j < m; ++j) r.z.push_back(num(4 + j));
    rows[{p, i}] = std::move(r);
    max_path = std::max(max_path, p);
    max_node = std::max(max_node, i);
  }
  const std::size_t n_paths = max_path + 1;
  const std::size_t n_nodes = max_node + 1;
  if (rows.size() != n_paths * n_nodes || n_nodes < 2)
    throw ValidationError("solution file does not hold a complete (path, node) table");

  DiscreteSolution sol;
  sol.scheme = scheme;
  sol.n_penalty = n_penalty;
  sol.Y = NodeMatrix(n_nodes, n_paths);
  sol.K = NodeMatrix(n_nodes, n_paths);
  sol.S = NodeMatrix(n_nodes, n_paths);
  for (std::size_t j = 0; j < m; ++j) sol.Z.emplace_back(n_nodes, n_paths);
  for (const auto& [key, r] : rows) {
    const auto [p, i] = key;
    sol.Y(i, p) = r.y;
    sol.K(i, p) = r.k;
    sol.S(i, p) = r.s;
    for (std::size_t j = 0; j < m; ++j) sol.Z[j](i, p) = r.z[j];
  }
  sol.grid = TimeGrid::make(rows.at({0, 0}).t, rows.at({0, n_nodes - 1}).t, static_cast<int>(n_nodes - 1));
  return sol;
}

}  // namespace levybsde
