#include "levybsde/levy_basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levybsde/errors.hpp"

namespace levybsde {

namespace {

constexpr double kDegeneracyTolerance = 1e-12;

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

std::vector<MuAtom> sorted_mu(std::vector<MuAtom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const MuAtom& a, const MuAtom& b) { return a.location < b.location; });
  return atoms;
}

}  // namespace

Polynomial Polynomial::monomial(int power) {
  std::vector<double> c(static_cast<std::size_t>(power) + 1, 0.0);
  c.back() = 1.0;
  return Polynomial(std::move(c));
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

LevyMeasureModel build_measure(std::vector<JumpAtom> atoms, double sigma0, double drift) {
  if (!std::isfinite(sigma0) || sigma0 < 0.0)
    throw ValidationError("sigma0 must be finite and >= 0");
  if (!std::isfinite(drift)) throw ValidationError("drift must be finite");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    if (!std::isfinite(a.size) || a.size == 0.0) {
      std::ostringstream msg;
      msg << "jump atom " << i << ": size must be finite and nonzero";
      throw ValidationError(msg.str());
    }
    if (!std::isfinite(a.rate) || a.rate <= 0.0) {
      std::ostringstream msg;
      msg << "jump atom " << i << ": rate must be finite and > 0";
      throw ValidationError(msg.str());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (atoms[j].size == a.size) {
        std::ostringstream msg;
        msg << "duplicate jump size " << a.size << " (atoms " << j << " and " << i << ")";
        throw ValidationError(msg.str());
      }
    }
  }
  if (atoms.empty() && sigma0 == 0.0)
    throw ValidationError("measure mu is identically zero: no jump atoms and sigma0 = 0");

  LevyMeasureModel model;
  model.atoms_ = std::move(atoms);
  model.sigma0_ = sigma0;
  model.drift_ = drift;
  return model;
}

std::vector<MuAtom> LevyMeasureModel::mu_atoms() const {
  std::vector<MuAtom> out;
  out.reserve(atoms_.size() + 1);
  for (const auto& a : atoms_) out.push_back({a.size, a.size * a.size * a.rate});
  if (sigma0_ > 0.0) out.push_back({0.0, sigma0_ * sigma0_});
  return out;
}

double LevyMeasureModel::total_rate() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.rate;
  return s;
}

double LevyMeasureModel::nu_moment(int k) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.rate * ipow(a.size, k);
  return s;
}

double LevyMeasureModel::expected_power_jump(int i) const {
  return i == 1 ? drift_ + nu_moment(1) : nu_moment(i);
}

double LevyMeasureModel::a_prime() const {
  double s = drift_;
  for (const auto& a : atoms_)
    if (std::abs(a.size) >= 1.0) s += a.size * a.rate;
  return s;
}

bool LevyMeasureModel::jumps_bounded_by(double bound) const {
  return std::all_of(atoms_.begin(), atoms_.end(),
                     [bound](const JumpAtom& a) { return std::abs(a.size) <= bound; });
}

double inner_product(const LevyMeasureModel& model, const Polynomial& f, const Polynomial& g) {
  double s = 0.0;
  for (const auto& a : model.mu_atoms()) s += f(a.location) * g(a.location) * a.mass;
  return s;
}

double atomic_inner_product(const LevyMeasureModel& model, const std::function<double(double)>& f,
                            const std::function<double(double)>& g, AtomicWeight weight) {
  double s = 0.0;
  if (weight == AtomicWeight::Mu) {
    for (const auto& a : model.mu_atoms()) s += f(a.location) * g(a.location) * a.mass;
  } else {
    for (const auto& a : model.atoms()) s += f(a.size) * g(a.size) * a.rate;
  }
  return s;
}

void PolynomialBasis::check_index(int i) const {
  if (i < 1 || i > size()) {
    std::ostringstream msg;
    msg << "basis index " << i << " outside 1.." << size();
    throw std::out_of_range(msg.str());
  }
}

bool PolynomialBasis::degenerate(int i) const {
  check_index(i);
  return i > effective_dim_;
}

double PolynomialBasis::coeff(int i, int k) const {
  check_index(i);
  if (k < 1 || k > i) throw std::out_of_range("coefficient index k must satisfy 1 <= k <= i");
  return q_[static_cast<std::size_t>(i - 1)].coeffs()[static_cast<std::size_t>(k - 1)];
}

const Polynomial& PolynomialBasis::q(int i) const {
  check_index(i);
  return q_[static_cast<std::size_t>(i - 1)];
}

double PolynomialBasis::eval_q(int i, double x) const { return q(i)(x); }

double PolynomialBasis::eval_p(int i, double x) const { return x * q(i)(x); }

bool PolynomialBasis::matches(const LevyMeasureModel& model) const {
  const auto other = sorted_mu(model.mu_atoms());
  if (other.size() != mu_atoms_.size()) return false;
  for (std::size_t a = 0; a < other.size(); ++a) {
    const double scale = std::max(1.0, std::abs(mu_atoms_[a].mass));
    if (other[a].location != mu_atoms_[a].location ||
        std::abs(other[a].mass - mu_atoms_[a].mass) > 1e-12 * scale)
      return false;
  }
  return true;
}

PolynomialBasis orthonormal_basis(const LevyMeasureModel& model, int m) {
  if (m < 1) throw ValidationError("number of martingales m must be >= 1");

  const auto mu = model.mu_atoms();
  const std::size_t n_atoms = mu.size();
  const auto msz = static_cast<std::size_t>(m);

  auto weighted_dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t a = 0; a < n_atoms; ++a) s += mu[a].mass * u[a] * v[a];
    return s;
  };

  // Accepted basis elements as (coefficients, values on the atoms).
  std::vector<std::vector<double>> coeffs;
  std::vector<std::vector<double>> values;

  PolynomialBasis basis;
  basis.q_.reserve(msz);
  for (int k = 0; k < m; ++k) {
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    c.back() = 1.0;
    std::vector<double> u(n_atoms);
    for (std::size_t a = 0; a < n_atoms; ++a) u[a] = ipow(mu[a].location, k);
    const double monomial_norm = std::sqrt(weighted_dot(u, u));

    bool degenerate = coeffs.size() >= n_atoms;
    if (!degenerate) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < coeffs.size(); ++j) {
          const double proj = weighted_dot(u, values[j]);
          for (std::size_t a = 0; a < n_atoms; ++a) u[a] -= proj * values[j][a];
          for (std::size_t l = 0; l < coeffs[j].size(); ++l) c[l] -= proj * coeffs[j][l];
        }
      }
      const double norm = std::sqrt(weighted_dot(u, u));
      degenerate = !(norm > kDegeneracyTolerance * monomial_norm);
      if (!degenerate) {
        for (auto& x : u) x /= norm;
        for (auto& x : c) x /= norm;
        coeffs.push_back(c);
        values.push_back(std::move(u));
      }
    }
    if (degenerate) std::fill(c.begin(), c.end(), 0.0);
    basis.q_.emplace_back(std::move(c));
  }
  basis.effective_dim_ = static_cast<int>(coeffs.size());

  basis.mu_moments_.assign(2 * msz - 1, 0.0);
  for (std::size_t k = 0; k < basis.mu_moments_.size(); ++k)
    for (const auto& a : mu) basis.mu_moments_[k] += a.mass * ipow(a.location, static_cast<int>(k));
  basis.mu_atoms_ = sorted_mu(mu);
  return basis;
}

}  // namespace levybsde
