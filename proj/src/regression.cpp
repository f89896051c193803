#include "levybsde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levybsde/errors.hpp"
#include "levybsde/kernels.hpp"

namespace levybsde {

namespace {
constexpr double kConstantFeature = 1e-12;
constexpr double kPivotFloor = 1e-12;
constexpr double kBoundarySlack = 1e-12;
}  // namespace

RegressionBasis RegressionBasis::doubled() const {
  RegressionBasis b = *this;
  b.degree = std::max(2, 2 * degree);
  return b;
}

void RegressionBasis::validate() const {
  if (degree < 0 || degree > 12) throw ValidationError("regression degree must lie in 0..12");
  if (!std::isfinite(ridge) || ridge < 0.0) throw ValidationError("ridge must be finite and >= 0");
  if (boundary_indicator && !(theta > 0.0)) throw ValidationError("boundary indicator requires theta > 0");
}

Regressor::Regressor(std::span<const double> state, const RegressionBasis& basis, int node)
    : n_(state.size()) {
  if (n_ == 0) throw ValidationError("regression needs at least one path");
  const double inv_n = 1.0 / static_cast<double>(n_);

  std::vector<double> raw(state.begin(), state.end());
  std::vector<double> power(n_, 1.0);
  auto add_feature = [&](const std::vector<double>& values) {
    const double mean = values[0] + kernels::sum_shifted(values, values[0]) * inv_n;
    std::vector<double> col(n_);
    kernels::affine(values, 1.0, -mean, col);
    const double sd = std::sqrt(kernels::dot_shifted(col, col, 0.0) * inv_n);
    if (!(sd > kConstantFeature * std::max(1.0, std::abs(mean)))) return;
    kernels::affine(col, 1.0 / sd, 0.0, col);
    features_.push_back(std::move(col));
  };
  for (int k = 1; k <= basis.degree; ++k) {
    kernels::multiply(power, raw, power);
    add_feature(power);
  }
  if (basis.boundary_indicator) {
    std::vector<double> ind(n_);
    for (std::size_t p = 0; p < n_; ++p)
      ind[p] = std::abs(state[p]) >= basis.theta - kBoundarySlack ? 1.0 : 0.0;
    add_feature(ind);
  }

  const std::size_t p = features_.size();
  chol_.assign(p * p, 0.0);
  rhs_.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      chol_[i * p + j] = kernels::dot_shifted(features_[i], features_[j], 0.0) * inv_n +
                         (i == j ? basis.ridge : 0.0);

  for (std::size_t j = 0; j < p; ++j) {
    double d = chol_[j * p + j];
    for (std::size_t k = 0; k < j; ++k) d -= chol_[j * p + k] * chol_[j * p + k];
    if (!(d > kPivotFloor)) {
      std::ostringstream msg;
      msg << "singular regression at node " << node << ": feature matrix lost rank (pivot " << d
          << "); increase ridge or lower the degree";
      throw SolverError(msg.str());
    }
    const double l = std::sqrt(d);
    chol_[j * p + j] = l;
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = chol_[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= chol_[i * p + k] * chol_[j * p + k];
      chol_[i * p + j] = s / l;
    }
  }
}

void Regressor::project(std::span<const double> response, std::span<double> out) const {
  const double inv_n = 1.0 / static_cast<double>(n_);
  const double shift = response[0];
  const double intercept = shift + kernels::sum_shifted(response, shift) * inv_n;
  const std::size_t p = features_.size();
  for (std::size_t i = 0; i < p; ++i) rhs_[i] = kernels::dot_shifted(features_[i], response, shift) * inv_n;
  for (std::size_t i = 0; i < p; ++i) {
    double s = rhs_[i];
    for (std::size_t k = 0; k < i; ++k) s -= chol_[i * p + k] * rhs_[k];
    rhs_[i] = s / chol_[i * p + i];
  }
  for (std::size_t i = p; i-- > 0;) {
    double s = rhs_[i];
    for (std::size_t k = i + 1; k < p; ++k) s -= chol_[k * p + i] * rhs_[k];
    rhs_[i] = s / chol_[i * p + i];
  }
  std::fill(out.begin(), out.end(), intercept);
  for (std::size_t i = 0; i < p; ++i)
    if (rhs_[i] != 0.0) kernels::axpy(rhs_[i], features_[i], out);
}

}  // namespace levybsde
