#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "levybsde/node_matrix.hpp"
#include "levybsde/path_engine.hpp"
#include "levybsde/regression.hpp"

namespace levybsde {

/// f(t, x, y, z) and g(t, x, y, z); z has one entry per martingale.
using DriverFn = std::function<double(double, double, double, std::span<const double>)>;
/// phi(t, x, y)
using PhiFn = std::function<double(double, double, double)>;

/// Coefficients of the equation. Empty functions are identically zero.
struct CoefficientSpec {
  DriverFn f;
  PhiFn phi;
  DriverFn g;
  double lipschitz_c = 1.0;
  double phi_monotone_beta = 0.0;
  double g_z_alpha = 0.5;
  double growth_K = 1.0;
};

struct ObstacleSpec {
  /// Lower obstacle S(t, x); empty means no reflection.
  std::function<double(double, double)> S;
  /// Terminal value xi(x).
  std::function<double(double)> xi;
};

struct Problem {
  CoefficientSpec coeffs;
  ObstacleSpec obstacle;
};

/// Where the coefficient probes are drawn.
struct ProbeDomain {
  double t0 = 0.0;
  double T = 1.0;
  double x_lo = -1.0;
  double x_hi = 1.0;
  int m = 1;
  double yz_range = 10.0;
  int n_probes = 256;
  std::uint64_t seed = 0x5eed;
};

/// Checks the declared constants on random probes:
///   |f(y1,z1) - f(y2,z2)|^2 <= c (|dy|^2 + |dz|^2)
///   (y1 - y2)(phi(y1) - phi(y2)) <= beta |dy|^2,  |phi(y1) - phi(y2)| <= c |dy|
///   |g(y1,z1) - g(y2,z2)|^2 <= c |dy|^2 + alpha |dz|^2,  0 < alpha < 1
/// Throws ValidationError naming the failing coefficient.
void validate_coefficients(const CoefficientSpec& coeffs, const ProbeDomain& domain);

/// False when every probe shows g unchanged under changes of (y, z).
bool g_depends_on_yz(const CoefficientSpec& coeffs, const ProbeDomain& domain);

/// Everything the backward recursion reads, one row per node or step.
struct SolverInput {
  TimeGrid grid;
  NodeMatrix state;             // X, nodes x paths
  std::vector<NodeMatrix> dH;   // m entries, steps x paths
  NodeMatrix dB;                // steps x paths
  NodeMatrix dA;                // steps x paths

  int m() const { return static_cast<int>(dH.size()); }
  std::size_t n_paths() const { return state.paths(); }
  ProbeDomain probe_domain() const;
};

/// Uses `state` as X when given, otherwise the Lévy path L itself.
SolverInput make_solver_input(const PathBundle& bundle, const NodeMatrix* state = nullptr);

enum class Scheme { Penalized, Direct };
std::string_view scheme_name(Scheme scheme);

struct SchemeSpec {
  Scheme kind = Scheme::Direct;
  double n_penalty = 0.0;
};

struct DiscreteSolution {
  TimeGrid grid;
  Scheme scheme = Scheme::Direct;
  double n_penalty = 0.0;
  int iterations = 1;
  std::vector<double> deltas;              // weighted-norm distance per iteration
  std::vector<double> contraction_ratios;  // deltas[k] / deltas[k-1]

  NodeMatrix Y;
  std::vector<NodeMatrix> Z;  // m entries, nodes x paths, Z_N = 0
  NodeMatrix K;               // nondecreasing, K_0 = 0
  NodeMatrix S;               // obstacle values, -inf without obstacle
  double y0_stderr = 0.0;     // sd of the node-0 regression target / sqrt(paths)

  int m() const { return static_cast<int>(Z.size()); }
  double mean_y(std::size_t node) const;
};

/// Frozen arguments of g for one fixed-point iteration.
struct Iterate {
  NodeMatrix Y;
  std::vector<NodeMatrix> Z;
};

/// One backward pass. With `frozen` set, g reads (Ybar, Zbar) at t_{i+1};
/// otherwise it reads the pass's own (Y_{i+1}, Z_{i+1}).
DiscreteSolution solve_scheme(const Problem& problem, const SolverInput& input, const SchemeSpec& scheme,
                              const RegressionBasis& basis, const Iterate* frozen = nullptr,
                              std::size_t threads = 1);

DiscreteSolution solve_penalized(const Problem& problem, const SolverInput& input, double n_penalty,
                                 const RegressionBasis& basis, std::size_t threads = 1);
DiscreteSolution solve_reflected_direct(const Problem& problem, const SolverInput& input,
                                        const RegressionBasis& basis, std::size_t threads = 1);

struct FixedPointOptions {
  double tol = 1e-10;
  int max_iter = 25;
  /// 0 selects (1 + alpha) / 2.
  double alpha_prime = 0.0;
};

/// Weighted distance sqrt(mean_paths sum_i e^{-mu t_i} (cbar |dY_i|^2 + alpha' |dZ_i|^2) dt)
/// with gamma = c / (1 - alpha') - 1 + alpha, mu = gamma + alpha' c / alpha,
/// cbar = alpha' c / alpha.
struct WeightedNorm {
  double alpha_prime = 0.75;
  double mu = 0.0;
  double c_bar = 1.0;

  static WeightedNorm from(const CoefficientSpec& coeffs, double alpha_prime);
  double distance(const TimeGrid& grid, const NodeMatrix& y1, const std::vector<NodeMatrix>& z1,
                  const NodeMatrix& y2, const std::vector<NodeMatrix>& z2) const;
};

/// Picard iteration on g's arguments from (0, 0). Stops after one pass when
/// g ignores (y, z). Throws SolverError with the ratio history if the
/// distance is still >= tol after max_iter passes.
DiscreteSolution fixed_point_solve(const Problem& problem, const SolverInput& input, const SchemeSpec& scheme,
                                   const RegressionBasis& basis, const FixedPointOptions& options = {},
                                   std::size_t threads = 1);

struct SweepRow {
  double n = 0.0;
  double y0 = 0.0;
  double k_T = 0.0;              // mean over paths
  double skorokhod = 0.0;        // worst path
  double gap_to_direct = 0.0;    // |Y_0^direct - Y_0^n|
  double cauchy = 0.0;           // |Y_0^n - Y_0^{previous n}|
  double monotone_violation = 0.0;  // max (Y^{previous n} - Y^n)^+ over nodes and paths
  double a_priori = 0.0;
  int iterations = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double direct_y0 = 0.0;
  bool y0_nondecreasing = true;
  bool gap_decreasing = true;
};

SweepResult penalization_sweep(const Problem& problem, const SolverInput& input, const RegressionBasis& basis,
                               const std::vector<double>& n_list, const FixedPointOptions& options = {},
                               std::size_t threads = 1);

struct RegressionAllowance {
  double epsilon = 0.0;    // max over nodes of the RMS over paths of Y^{2d} - Y^d
  double mean_shift = 0.0; // max over nodes of |mean Y^{2d} - mean Y^d|
};

/// Re-solves with the doubled basis and measures the observed shift.
RegressionAllowance estimate_regression_allowance(const Problem& problem, const SolverInput& input,
                                                  const SchemeSpec& scheme, const RegressionBasis& basis,
                                                  const FixedPointOptions& options = {},
                                                  std::size_t threads = 1);

/// sum_i (Y_i - S_i) dK_i per path; terms with dK_i = 0 are skipped.
std::vector<double> skorokhod_residuals(const DiscreteSolution& solution);

/// mean over paths of sup_i |Y_i|^2 + sum_i |Z_i|^2 dt + K_N^2.
double a_priori_functional(const DiscreteSolution& solution);

/// CSV: node,t,mean_Y,sd_Y,mean_K,skorokhod (per-node mean of (Y_i - S_i) dK_i).
void write_solution_report(std::ostream& out, const DiscreteSolution& solution);

/// CSV: path_id,node_index,t,Y,Z_1..Z_m,K,S for the first `max_paths` paths.
void write_solution_csv(std::ostream& out, const DiscreteSolution& solution, std::size_t max_paths);
/// Inverse of write_solution_csv. Throws ValidationError on malformed input.
DiscreteSolution read_solution_csv(std::istream& in, Scheme scheme, double n_penalty);

}  // namespace levybsde
