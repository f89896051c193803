#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace levybsde {

/// Features of the state used for conditional expectations: standardized
/// powers x, x^2, ..., x^degree, optionally the boundary indicator
/// 1{|x| >= theta}, and an unpenalized intercept.
struct RegressionBasis {
  int degree = 2;
  bool boundary_indicator = false;
  double theta = 1.0;
  double ridge = 1e-8;

  /// Same basis with twice the polynomial degree (at least 2).
  RegressionBasis doubled() const;
  void validate() const;
};

/// Least-squares projection onto the span of the features of one time
/// slice of the state. Built once per backward step and reused for every
/// response at that step.
class Regressor {
 public:
  /// `node` is only used to label errors.
  Regressor(std::span<const double> state, const RegressionBasis& basis, int node);

  std::size_t n_paths() const { return n_; }
  /// Number of non-constant features kept (excluding the intercept).
  std::size_t n_features() const { return features_.size(); }

  /// out = fitted values of `response`. A constant response is reproduced
  /// exactly. `out` may alias `response`.
  void project(std::span<const double> response, std::span<double> out) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<double>> features_;
  std::vector<double> chol_;  // lower Cholesky factor, row-major p x p
  mutable std::vector<double> rhs_;
};

}  // namespace levybsde
