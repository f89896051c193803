#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "levybsde/levy_basis.hpp"
#include "levybsde/node_matrix.hpp"
#include "levybsde/path_engine.hpp"

namespace levybsde {

/// Diffusion coefficient of the reflected SDE on [-theta, theta]. sigma is
/// always evaluated at the projection of its argument.
class ReflectedCoefficients {
 public:
  /// Validates theta > 0, boundedness and the declared Lipschitz constant
  /// of sigma on a 1001-point grid of [-theta, theta].
  static ReflectedCoefficients make(double theta, std::function<double(double)> sigma,
                                    double lipschitz_K);

  double theta() const { return theta_; }
  double lipschitz_K() const { return lipschitz_K_; }
  double project(double x) const;
  double sigma(double x) const { return sigma_(project(x)); }
  /// Inward normal: e(-theta) = 1, e(theta) = -1, zero in the interior.
  double boundary_direction(double x) const;
  bool on_boundary(double x) const { return x <= -theta_ || x >= theta_; }

 private:
  double theta_ = 1.0;
  double lipschitz_K_ = 0.0;
  std::function<double(double)> sigma_;
};

struct ReflectedPath {
  std::vector<double> x;
  std::vector<double> eta;      // signed reflection term
  std::vector<double> abs_eta;  // |eta|, nondecreasing
  std::vector<int> boundary_hits;
  std::vector<int> projection_steps;  // steps in which the projection acted
};

/// Projected Euler scheme driven by the node values of one Lévy path:
///   X~ = X_i + sigma(X_i) (L_{i+1} - L_i),  X_{i+1} = pr(X~),
///   d|eta| = |X~ - X_{i+1}|,  d eta = X_{i+1} - X~.
ReflectedPath simulate_reflected(const ReflectedCoefficients& coeffs,
                                 std::span<const double> levy_path, double x0);

struct ReflectedBundle {
  NodeMatrix x;
  NodeMatrix eta;
  NodeMatrix abs_eta;
  /// Projections triggered in a step that contained a jump of size > 1,
  /// i.e. outside what the invariance condition covers.
  std::size_t large_jump_exits = 0;
};

ReflectedBundle reflect_bundle(const ReflectedCoefficients& coeffs, const PathBundle& bundle,
                               double x0, std::size_t threads = 1);

struct InvarianceReport {
  bool ok = true;
  double worst_violation = 0.0;  // distance of x + y sigma(x) outside [-theta, theta]
  double worst_x = 0.0;
  double worst_y = 0.0;
  int atoms_checked = 0;
};

/// Checks x + y sigma(x) in [-theta, theta] for every atom |y| <= 1 over a
/// 1001-point grid. Report-only.
InvarianceReport validate_invariance(const ReflectedCoefficients& coeffs, const LevyMeasureModel& model);

}  // namespace levybsde
