#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "levybsde/levy_basis.hpp"
#include "levybsde/node_matrix.hpp"
#include "levybsde/path_engine.hpp"
#include "levybsde/solver.hpp"

namespace levybsde {

/// Discrete Doléans-Dade kernel Gamma_{i+1} = Gamma_i (1 + dX_i) with
/// dX_i = a_i dt + b_i dA_i + sum_j beta^j_i dH^j_i.
struct KernelPath {
  NodeMatrix gamma;  // nodes x paths, Gamma_0 = 1
  bool positive = true;
  std::size_t nonpositive_factors = 0;
  double min_factor = 1.0;
};

/// a, b and each beta^j are steps x paths. Never throws on a nonpositive
/// factor; it is reported instead.
KernelPath doleans_dade(const NodeMatrix& a, const NodeMatrix& b, const std::vector<NodeMatrix>& beta,
                        const SolverInput& input);

struct ComparisonReport {
  std::vector<double> min_diff_per_node;  // min over paths of Y1 - Y2
  double min_diff = 0.0;
  double epsilon_reg = 0.0;
  std::size_t violation_count = 0;  // entries with Y1 - Y2 < -epsilon_reg
  double worst_violation = 0.0;     // largest (-(Y1 - Y2) - epsilon_reg)^+
  bool kernel_positive = true;
  bool hypotheses_verified = true;
  std::string note;
  bool holds() const { return violation_count == 0; }
};

/// Solves both problems on the same input and reports min(Y1 - Y2). The
/// allowance epsilon_reg is the largest change of Y1 - Y2 when both are
/// re-solved with the doubled regression basis.
ComparisonReport check_comparison(const Problem& problem1, const Problem& problem2, const SolverInput& input,
                                  const SchemeSpec& scheme, const RegressionBasis& basis,
                                  const FixedPointOptions& options = {}, std::size_t threads = 1);

/// c(s, y) in the compensation identity.
using JumpFunction = std::function<double(double, double)>;

enum class InnerProductConvention { Nu, Mu };

struct CompensationReport {
  InnerProductConvention convention = InnerProductConvention::Nu;
  double mean_gap = 0.0;
  double sd_gap = 0.0;
  double max_abs_gap = 0.0;
  double mean_lhs = 0.0;
  std::size_t n_paths = 0;
};

/// Per path: sum over jumps of c(s, dL_s) minus
/// sum_i sum_k <c(t_k, .), p_i> dH^(i)_k + sum_k int c(t_k, y) nu(dy) dt.
/// Throws ValidationError if |c(s, y)| > bound (y^2 min |y|) on an atom.
CompensationReport check_compensation(const LevyMeasureModel& model, const PolynomialBasis& basis,
                                      const PathBundle& bundle, const JumpFunction& c, double bound,
                                      InnerProductConvention convention);

struct CompensationAudit {
  CompensationReport nu;
  CompensationReport mu;
  InnerProductConvention selected = InnerProductConvention::Nu;
  bool exact = false;  // selected convention reaches the tolerance on every path
};

/// Runs both conventions; picks nu if exact, otherwise mu if exact,
/// otherwise the one with the smaller worst gap.
CompensationAudit audit_compensation(const LevyMeasureModel& model, const PolynomialBasis& basis,
                                     const PathBundle& bundle, const JumpFunction& c, double bound,
                                     double tolerance = 1e-10);

struct PropertyResult {
  std::string name;
  bool pass = true;
  double worst = 0.0;
  double tolerance = 0.0;
};

struct PropertyReport {
  std::vector<PropertyResult> results;
  bool all_pass() const;
  const PropertyResult& get(const std::string& name) const;
  /// {"name": {"pass": bool, "worst": x, "tolerance": y}, ...}
  std::string to_json() const;
  std::string to_text() const;
};

struct SuiteTolerances {
  double penalized_skorokhod = 1e-2;
  double penalized_obstacle = 1e-2;
};

/// Skorokhod residual, obstacle violation, K monotone, K_0 = 0, a priori
/// functional finite, all values finite.
PropertyReport property_suite(const DiscreteSolution& solution, const SuiteTolerances& tolerances = {});

}  // namespace levybsde
