#pragma once

#include <functional>
#include <span>
#include <vector>

namespace levybsde {

/// One atom of a finite-activity Lévy measure: jumps of `size` arrive at
/// Poisson intensity `rate`.
struct JumpAtom {
  double size = 0.0;
  double rate = 0.0;
};

/// One atom of the orthonormalization measure mu(dx) = x^2 nu(dx) + sigma0^2 delta_0.
struct MuAtom {
  double location = 0.0;
  double mass = 0.0;
};

/// Dense polynomial with coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  static Polynomial monomial(int power);

  double operator()(double x) const;
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const double> coeffs() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
};

/// Finite Lévy measure nu = sum rate_k delta_{size_k}, Gaussian mass sigma0
/// and drift a. The measure mu derived from it is always exactly atomic.
class LevyMeasureModel {
 public:
  const std::vector<JumpAtom>& atoms() const { return atoms_; }
  double sigma0() const { return sigma0_; }
  double drift() const { return drift_; }

  /// Atoms of mu: mass size^2 * rate at every jump size, sigma0^2 at zero.
  std::vector<MuAtom> mu_atoms() const;

  double total_rate() const;
  /// sum rate * size^k, i.e. the k-th moment of nu (k >= 1).
  double nu_moment(int k) const;
  /// E[L^i_1]: nu_moment(i) for i >= 2, drift + nu_moment(1) for i = 1.
  double expected_power_jump(int i) const;
  /// a' = a + int_{|y|>=1} y nu(dy).
  double a_prime() const;
  bool jumps_bounded_by(double bound) const;

 private:
  friend LevyMeasureModel build_measure(std::vector<JumpAtom>, double, double);
  std::vector<JumpAtom> atoms_;
  double sigma0_ = 0.0;
  double drift_ = 0.0;
};

/// Throws ValidationError on zero/duplicate/non-finite sizes, non-positive
/// rates, negative sigma0, or an all-zero mu.
LevyMeasureModel build_measure(std::vector<JumpAtom> atoms, double sigma0, double drift);

/// Exact quadrature over the atoms of mu.
double inner_product(const LevyMeasureModel& model, const Polynomial& f, const Polynomial& g);

/// Which measure the atomic sum is weighted by.
enum class AtomicWeight { Mu, Nu };

double atomic_inner_product(const LevyMeasureModel& model, const std::function<double(double)>& f,
                            const std::function<double(double)>& g, AtomicWeight weight);

/// Teugels coefficients. Index i runs 1..m: row i holds c_{i,1..i}, the
/// coefficients of q_{i-1}(x) = c_{i,i} x^{i-1} + ... + c_{i,1}.
class PolynomialBasis {
 public:
  int size() const { return static_cast<int>(q_.size()); }
  int effective_dim() const { return effective_dim_; }
  bool degenerate(int i) const;

  double coeff(int i, int k) const;
  const Polynomial& q(int i) const;

  double eval_q(int i, double x) const;
  /// p_i(x) = x q_{i-1}(x)
  double eval_p(int i, double x) const;

  /// Moments of mu, int x^k dmu for k = 0 .. 2m-2.
  std::span<const double> mu_moments() const { return mu_moments_; }

  /// True when this basis was orthonormalized against `model`'s mu.
  bool matches(const LevyMeasureModel& model) const;

 private:
  friend PolynomialBasis orthonormal_basis(const LevyMeasureModel&, int);
  void check_index(int i) const;

  std::vector<Polynomial> q_;
  int effective_dim_ = 0;
  std::vector<double> mu_moments_;
  std::vector<MuAtom> mu_atoms_;
};

/// Gram-Schmidt of {1, x, ..., x^{m-1}} in L^2(mu), two passes per vector.
/// Rows past the number of atoms of mu are zeroed and flagged degenerate.
PolynomialBasis orthonormal_basis(const LevyMeasureModel& model, int m);

}  // namespace levybsde
