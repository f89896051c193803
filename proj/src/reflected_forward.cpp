#include "levybsde/reflected_forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levybsde/errors.hpp"
#include "levybsde/parallel.hpp"

namespace levybsde {

namespace {
constexpr int kCheckPoints = 1001;
constexpr double kInvarianceSlack = 1e-12;
}  // namespace

ReflectedCoefficients ReflectedCoefficients::make(double theta, std::function<double(double)> sigma,
                                                  double lipschitz_K) {
  if (!std::isfinite(theta) || theta <= 0.0) throw ValidationError("theta must be finite and > 0");
  if (!sigma) throw ValidationError("sigma function is missing");
  if (!std::isfinite(lipschitz_K) || lipschitz_K < 0.0)
    throw ValidationError("sigma Lipschitz constant must be finite and >= 0");

  std::vector<double> xs(kCheckPoints), vals(kCheckPoints);
  for (int k = 0; k < kCheckPoints; ++k) {
    xs[static_cast<std::size_t>(k)] = -theta + 2.0 * theta * k / (kCheckPoints - 1);
    vals[static_cast<std::size_t>(k)] = sigma(xs[static_cast<std::size_t>(k)]);
    if (!std::isfinite(vals[static_cast<std::size_t>(k)]))
      throw ValidationError("sigma is not finite on [-theta, theta]");
  }
  for (int k = 1; k < kCheckPoints; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double slope = std::abs(vals[i] - vals[i - 1]) / (xs[i] - xs[i - 1]);
    if (slope > lipschitz_K * (1.0 + 1e-9) + 1e-12) {
      std::ostringstream msg;
      msg << "sigma violates the declared Lipschitz constant " << lipschitz_K << " near x = " << xs[i]
          << " (observed slope " << slope << ")";
      throw ValidationError(msg.str());
    }
  }

  ReflectedCoefficients c;
  c.theta_ = theta;
  c.lipschitz_K_ = lipschitz_K;
  c.sigma_ = std::move(sigma);
  return c;
}

double ReflectedCoefficients::project(double x) const { return std::clamp(x, -theta_, theta_); }

double ReflectedCoefficients::boundary_direction(double x) const {
  if (x <= -theta_) return 1.0;
  if (x >= theta_) return -1.0;
  return 0.0;
}

ReflectedPath simulate_reflected(const ReflectedCoefficients& coeffs,
                                 std::span<const double> levy_path, double x0) {
  if (!(x0 >= -coeffs.theta() && x0 <= coeffs.theta())) {
    std::ostringstream msg;
    msg << "initial state " << x0 << " lies outside [-theta, theta]";
    throw ValidationError(msg.str());
  }
  const std::size_t n = levy_path.size();
  ReflectedPath out;
  out.x.assign(n, x0);
  out.eta.assign(n, 0.0);
  out.abs_eta.assign(n, 0.0);
  if (coeffs.on_boundary(x0)) out.boundary_hits.push_back(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double xi = out.x[i];
    const double trial = xi + coeffs.sigma(xi) * (levy_path[i + 1] - levy_path[i]);
    const double next = coeffs.project(trial);
    out.x[i + 1] = next;
    out.eta[i + 1] = out.eta[i] + (next - trial);
    out.abs_eta[i + 1] = out.abs_eta[i] + std::abs(trial - next);
    if (trial != next) out.projection_steps.push_back(static_cast<int>(i));
    if (coeffs.on_boundary(next)) out.boundary_hits.push_back(static_cast<int>(i + 1));
  }
  return out;
}

ReflectedBundle reflect_bundle(const ReflectedCoefficients& coeffs, const PathBundle& bundle,
                               double x0, std::size_t threads) {
  const std::size_t n_nodes = static_cast<std::size_t>(bundle.grid().n_nodes());
  const std::size_t n_paths = bundle.n_paths();
  ReflectedBundle out{NodeMatrix(n_nodes, n_paths), NodeMatrix(n_nodes, n_paths),
                      NodeMatrix(n_nodes, n_paths), 0};
  std::vector<std::size_t> exits(n_paths, 0);
  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> levy(n_nodes);
    for (std::size_t p = begin; p < end; ++p) {
      for (std::size_t i = 0; i < n_nodes; ++i) levy[i] = bundle.levy()(i, p);
      const auto path = simulate_reflected(coeffs, levy, x0);
      for (std::size_t i = 0; i < n_nodes; ++i) {
        out.x(i, p) = path.x[i];
        out.eta(i, p) = path.eta[i];
        out.abs_eta(i, p) = path.abs_eta[i];
      }
      const auto jumps = bundle.jumps(p);
      for (int step : path.projection_steps) {
        const bool large = std::any_of(jumps.begin(), jumps.end(), [step](const JumpRecord& j) {
          return j.step == step && std::abs(j.size) > 1.0;
        });
        if (large) ++exits[p];
      }
    }
  });
  for (auto e : exits) out.large_jump_exits += e;
  return out;
}

InvarianceReport validate_invariance(const ReflectedCoefficients& coeffs, const LevyMeasureModel& model) {
  InvarianceReport report;
  const double theta = coeffs.theta();
  for (const auto& atom : model.atoms()) {
    if (std::abs(atom.size) > 1.0) continue;
    ++report.atoms_checked;
    for (int k = 0; k < kCheckPoints; ++k) {
      const double x = -theta + 2.0 * theta * k / (kCheckPoints - 1);
      const double image = x + atom.size * coeffs.sigma(x);
      const double violation = std::max(image - theta, -theta - image);
      if (violation > report.worst_violation) {
        report.worst_violation = violation;
        report.worst_x = x;
        report.worst_y = atom.size;
      }
    }
  }
  report.ok = report.worst_violation <= kInvarianceSlack;
  return report;
}

}  // namespace levybsde
