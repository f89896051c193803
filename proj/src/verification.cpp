#include "levybsde/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "levybsde/errors.hpp"
#include "levybsde/rng.hpp"

namespace levybsde {

KernelPath doleans_dade(const NodeMatrix& a, const NodeMatrix& b, const std::vector<NodeMatrix>& beta,
                        const SolverInput& input) {
  const std::size_t n_steps = static_cast<std::size_t>(input.grid.n_steps);
  const std::size_t n_paths = input.n_paths();
  if (a.nodes() != n_steps || b.nodes() != n_steps || a.paths() != n_paths || b.paths() != n_paths)
    throw ValidationError("kernel coefficient paths must be steps x paths");
  if (beta.size() > input.dH.size()) throw ValidationError("more beta paths than martingales");

  const double dt = input.grid.dt();
  KernelPath out;
  out.gamma = NodeMatrix(n_steps + 1, n_paths, 1.0);
  for (std::size_t i = 0; i < n_steps; ++i) {
    for (std::size_t p = 0; p < n_paths; ++p) {
      double dx = a(i, p) * dt + b(i, p) * input.dA(i, p);
      for (std::size_t j = 0; j < beta.size(); ++j) dx += beta[j](i, p) * input.dH[j](i, p);
      const double factor = 1.0 + dx;
      if (!(factor > 0.0)) {
        out.positive = false;
        ++out.nonpositive_factors;
      }
      out.min_factor = std::min(out.min_factor, factor);
      out.gamma(i + 1, p) = out.gamma(i, p) * factor;
    }
  }
  return out;
}

namespace {

double quotient(double num, double den) { return den != 0.0 ? num / den : 0.0; }

// Linearization coefficients of problem 1 between the two solutions, as in
// the comparison argument: a from y, beta^j from z_j (telescoping), b from phi.
KernelPath comparison_kernel(const Problem& p1, const DiscreteSolution& s1, const DiscreteSolution& s2,
                             const SolverInput& input) {
  const std::size_t n_steps = static_cast<std::size_t>(input.grid.n_steps);
  const std::size_t n_paths = input.n_paths();
  const std::size_t m = static_cast<std::size_t>(input.m());
  NodeMatrix a(n_steps, n_paths), b(n_steps, n_paths);
  std::vector<NodeMatrix> beta(m, NodeMatrix(n_steps, n_paths));
  const auto& f = p1.coeffs.f;
  const auto& phi = p1.coeffs.phi;
  std::vector<double> z(m);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = input.grid.node(static_cast<int>(i));
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double x = input.state(i, p);
      const double y1 = s1.Y(i + 1, p), y2 = s2.Y(i + 1, p);
      for (std::size_t j = 0; j < m; ++j) z[j] = s1.Z[j](i, p);
      if (f) {
        a(i, p) = quotient(f(t, x, y1, z) - f(t, x, y2, z), y1 - y2);
        for (std::size_t j = 0; j < m; ++j) {
          const double before = f(t, x, y2, z);
          const double zj = z[j];
          z[j] = s2.Z[j](i, p);
          beta[j](i, p) = quotient(before - f(t, x, y2, z), zj - z[j]);
        }
      }
      if (phi) b(i, p) = quotient(phi(t, x, y1) - phi(t, x, y2), y1 - y2);
    }
  }
  return doleans_dade(a, b, beta, input);
}

}  // namespace

ComparisonReport check_comparison(const Problem& problem1, const Problem& problem2, const SolverInput& input,
                                  const SchemeSpec& scheme, const RegressionBasis& basis,
                                  const FixedPointOptions& options, std::size_t threads) {
  ComparisonReport report;
  std::ostringstream note;

  // Hypotheses on probes: xi1 >= xi2 on terminal states, f1 >= f2, shared
  // phi and obstacle.
  const auto last = input.state.nodes() - 1;
  for (std::size_t p = 0; p < input.n_paths() && report.hypotheses_verified; ++p) {
    const double x = input.state(last, p);
    if (problem1.obstacle.xi(x) < problem2.obstacle.xi(x)) {
      report.hypotheses_verified = false;
      note << "xi1 < xi2 at x = " << x << "; ";
    }
  }
  if (static_cast<bool>(problem1.obstacle.S) != static_cast<bool>(problem2.obstacle.S) ||
      static_cast<bool>(problem1.coeffs.phi) != static_cast<bool>(problem2.coeffs.phi)) {
    report.hypotheses_verified = false;
    note << "problems do not share phi / obstacle handling; ";
  }
  const auto domain = input.probe_domain();
  CounterRng rng(domain.seed, 0xc0a1, 0);
  std::vector<double> z(static_cast<std::size_t>(domain.m));
  for (int k = 0; k < domain.n_probes && report.hypotheses_verified; ++k) {
    const double t = domain.t0 + (domain.T - domain.t0) * rng.uniform();
    const double x = domain.x_lo + (domain.x_hi - domain.x_lo) * rng.uniform();
    const double y = domain.yz_range * (2.0 * rng.uniform() - 1.0);
    for (auto& v : z) v = domain.yz_range * (2.0 * rng.uniform() - 1.0);
    const double f1 = problem1.coeffs.f ? problem1.coeffs.f(t, x, y, z) : 0.0;
    const double f2 = problem2.coeffs.f ? problem2.coeffs.f(t, x, y, z) : 0.0;
    if (f1 < f2) {
      report.hypotheses_verified = false;
      note << "f1 < f2 at probe (t=" << t << ", x=" << x << ", y=" << y << "); ";
    }
    if (problem1.coeffs.phi && problem1.coeffs.phi(t, x, y) != problem2.coeffs.phi(t, x, y)) {
      report.hypotheses_verified = false;
      note << "phi differs at probe; ";
    }
    if (problem1.obstacle.S && problem1.obstacle.S(t, x) != problem2.obstacle.S(t, x)) {
      report.hypotheses_verified = false;
      note << "obstacles differ at probe; ";
    }
  }
  if (!report.hypotheses_verified) note << "hypotheses unverified";

  const auto s1 = fixed_point_solve(problem1, input, scheme, basis, options, threads);
  const auto s2 = fixed_point_solve(problem2, input, scheme, basis, options, threads);
  const auto r1 = fixed_point_solve(problem1, input, scheme, basis.doubled(), options, threads);
  const auto r2 = fixed_point_solve(problem2, input, scheme, basis.doubled(), options, threads);

  const std::size_t n_nodes = s1.Y.nodes();
  const std::size_t n_paths = s1.Y.paths();
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double shift = (r1.Y(i, p) - r2.Y(i, p)) - (s1.Y(i, p) - s2.Y(i, p));
      report.epsilon_reg = std::max(report.epsilon_reg, std::abs(shift));
    }
  }
  report.min_diff = std::numeric_limits<double>::infinity();
  report.min_diff_per_node.assign(n_nodes, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double d = s1.Y(i, p) - s2.Y(i, p);
      report.min_diff_per_node[i] = std::min(report.min_diff_per_node[i], d);
      if (d < -report.epsilon_reg) {
        ++report.violation_count;
        report.worst_violation = std::max(report.worst_violation, -d - report.epsilon_reg);
      }
    }
    report.min_diff = std::min(report.min_diff, report.min_diff_per_node[i]);
  }
  report.kernel_positive = comparison_kernel(problem1, s1, s2, input).positive;
  report.note = note.str();
  return report;
}

CompensationReport check_compensation(const LevyMeasureModel& model, const PolynomialBasis& basis,
                                      const PathBundle& bundle, const JumpFunction& c, double bound,
                                      InnerProductConvention convention) {
  if (!c) throw ValidationError("compensation function c is missing");
  if (!basis.matches(model)) throw ValidationError("basis/model mismatch");
  if (!std::isfinite(bound) || bound < 0.0) throw ValidationError("compensation bound must be finite and >= 0");
  const auto& grid = bundle.grid();
  const int n_steps = grid.n_steps;
  const double dt = grid.dt();
  const int m = bundle.m();
  const auto msz = static_cast<std::size_t>(m);

  for (int k = 0; k <= n_steps; ++k) {
    const double s = grid.node(k);
    for (const auto& atom : model.atoms()) {
      const double y = atom.size;
      const double v = c(s, y);
      const double cap = bound * std::min(y * y, std::abs(y));
      if (!std::isfinite(v) || std::abs(v) > cap * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "c violates |c(s,y)| <= b (y^2 min |y|) at s = " << s << ", y = " << y << " (|c| = "
            << std::abs(v) << ", bound " << cap << ")";
        throw ValidationError(msg.str());
      }
    }
  }

  // Per-step chaos coefficients and compensator.
  std::vector<double> coef(static_cast<std::size_t>(n_steps) * msz);
  std::vector<double> compensator(static_cast<std::size_t>(n_steps));
  for (int k = 0; k < n_steps; ++k) {
    const double s = grid.node(k);
    const auto cs = [&](double y) { return c(s, y); };
    for (int i = 1; i <= m; ++i) {
      const auto pi = [&](double y) { return basis.eval_p(i, y); };
      coef[static_cast<std::size_t>(k) * msz + static_cast<std::size_t>(i - 1)] = atomic_inner_product(
          model, cs, pi, convention == InnerProductConvention::Nu ? AtomicWeight::Nu : AtomicWeight::Mu);
    }
    double comp = 0.0;
    for (const auto& atom : model.atoms()) comp += atom.rate * c(s, atom.size);
    compensator[static_cast<std::size_t>(k)] = comp * dt;
  }

  const std::size_t n_paths = bundle.n_paths();
  std::vector<double> gaps(n_paths);
  double sum_lhs = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    double lhs = 0.0;
    for (const auto& j : bundle.jumps(p)) lhs += c(j.time, j.size);
    double rhs = 0.0;
    for (int k = 0; k < n_steps; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      for (int i = 1; i <= m; ++i) {
        const auto& h = bundle.teugels(i);
        rhs += coef[ks * msz + static_cast<std::size_t>(i - 1)] * (h(ks + 1, p) - h(ks, p));
      }
      rhs += compensator[ks];
    }
    gaps[p] = lhs - rhs;
    sum_lhs += lhs;
  }

  CompensationReport r;
  r.convention = convention;
  r.n_paths = n_paths;
  r.mean_lhs = sum_lhs / static_cast<double>(n_paths);
  double sum = 0.0;
  for (double g : gaps) {
    sum += g;
    r.max_abs_gap = std::max(r.max_abs_gap, std::abs(g));
  }
  r.mean_gap = sum / static_cast<double>(n_paths);
  double ss = 0.0;
  for (double g : gaps) ss += (g - r.mean_gap) * (g - r.mean_gap);
  r.sd_gap = n_paths > 1 ? std::sqrt(ss / static_cast<double>(n_paths - 1)) : 0.0;
  return r;
}

CompensationAudit audit_compensation(const LevyMeasureModel& model, const PolynomialBasis& basis,
                                     const PathBundle& bundle, const JumpFunction& c, double bound,
                                     double tolerance) {
  CompensationAudit audit;
  audit.nu = check_compensation(model, basis, bundle, c, bound, InnerProductConvention::Nu);
  audit.mu = check_compensation(model, basis, bundle, c, bound, InnerProductConvention::Mu);
  if (audit.nu.max_abs_gap <= tolerance) {
    audit.selected = InnerProductConvention::Nu;
    audit.exact = true;
  } else if (audit.mu.max_abs_gap <= tolerance) {
    audit.selected = InnerProductConvention::Mu;
    audit.exact = true;
  } else {
    audit.selected = audit.nu.max_abs_gap <= audit.mu.max_abs_gap ? InnerProductConvention::Nu
                                                                   : InnerProductConvention::Mu;
  }
  return audit;
}

bool PropertyReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.pass; });
}

const PropertyResult& PropertyReport::get(const std::string& name) const {
  for (const auto& r : results)
    if (r.name == name) return r;
  throw std::out_of_range("unknown property " + name);
}

std::string PropertyReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& r : results) {
    nlohmann::ordered_json entry;
    entry["pass"] = r.pass;
    entry["worst"] = std::isfinite(r.worst) ? nlohmann::ordered_json(r.worst) : nlohmann::ordered_json(nullptr);
    entry["tolerance"] =
        std::isfinite(r.tolerance) ? nlohmann::ordered_json(r.tolerance) : nlohmann::ordered_json(nullptr);
    j[r.name] = entry;
  }
  return j.dump(2) + "\n";
}

std::string PropertyReport::to_text() const {
  std::ostringstream out;
  for (const auto& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %s  worst=%.6g  tolerance=%.6g\n", r.name.c_str(),
                  r.pass ? "PASS" : "FAIL", r.worst, r.tolerance);
    out << line;
  }
  out << (all_pass() ? "all properties pass\n" : "property suite FAILED\n");
  return out.str();
}

PropertyReport property_suite(const DiscreteSolution& solution, const SuiteTolerances& tolerances) {
  const std::size_t n_nodes = solution.Y.nodes();
  const std::size_t n_paths = solution.Y.paths();
  const bool direct = solution.scheme == Scheme::Direct;
  PropertyReport report;

  bool finite = true;
  for (double v : solution.Y.values()) finite = finite && std::isfinite(v);
  for (double v : solution.K.values()) finite = finite && std::isfinite(v);
  for (const auto& z : solution.Z)
    for (double v : z.values()) finite = finite && std::isfinite(v);

  double sk_worst = 0.0;
  for (double r : skorokhod_residuals(solution)) sk_worst = std::max(sk_worst, std::abs(r));
  if (!std::isfinite(sk_worst)) sk_worst = std::numeric_limits<double>::infinity();
  const double sk_tol = direct ? 0.0 : tolerances.penalized_skorokhod;
  report.results.push_back({"skorokhod_residual", sk_worst <= sk_tol, sk_worst, sk_tol});

  double violation = 0.0;
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t p = 0; p < n_paths; ++p)
      violation = std::max(violation, solution.S(i, p) - solution.Y(i, p));
  const double ob_tol = direct ? 0.0 : tolerances.penalized_obstacle;
  report.results.push_back({"obstacle_violation", violation <= ob_tol, violation, ob_tol});

  double decrease = 0.0;
  for (std::size_t i = 0; i + 1 < n_nodes; ++i)
    for (std::size_t p = 0; p < n_paths; ++p)
      decrease = std::max(decrease, solution.K(i, p) - solution.K(i + 1, p));
  report.results.push_back({"k_monotone", decrease <= 0.0, decrease, 0.0});

  double k0 = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) k0 = std::max(k0, std::abs(solution.K(0, p)));
  report.results.push_back({"k_initial_zero", k0 == 0.0, k0, 0.0});

  const double functional = a_priori_functional(solution);
  report.results.push_back({"a_priori_functional", std::isfinite(functional), functional,
                            std::numeric_limits<double>::infinity()});

  report.results.push_back({"finite_values", finite, finite ? 0.0 : 1.0, 0.0});
  return report;
}

}  // namespace levybsde
