#include "levybsde/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "levybsde/csv.hpp"
#include "levybsde/errors.hpp"
#include "levybsde/parallel.hpp"
#include "levybsde/rng.hpp"

namespace levybsde {

TimeGrid TimeGrid::make(double t0, double T, int n_steps) {
  if (!std::isfinite(t0) || !std::isfinite(T) || !(t0 < T))
    throw ValidationError("time grid requires finite t0 < T");
  if (n_steps < 1) throw ValidationError("time grid requires n_steps >= 1");
  return TimeGrid{t0, T, n_steps};
}

const NodeMatrix& PathBundle::power_jumps(int i) const {
  if (i < 1 || i > m_) throw std::out_of_range("power-jump index outside 1..m");
  return i == 1 ? levy_ : higher_powers_[static_cast<std::size_t>(i - 2)];
}

const NodeMatrix& PathBundle::teugels(int i) const {
  if (i < 1 || i > m_) throw std::out_of_range("martingale index outside 1..m");
  return teugels_[static_cast<std::size_t>(i - 1)];
}

std::span<const JumpRecord> PathBundle::jumps(std::size_t path) const {
  if (path >= n_paths_) throw std::out_of_range("path index out of range");
  return std::span<const JumpRecord>(jumps_).subspan(
      jump_offsets_[path], jump_offsets_[path + 1] - jump_offsets_[path]);
}

PathBundle simulate_bundle(const LevyMeasureModel& model, const PolynomialBasis& basis,
                           const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                           const SimulationOptions& options) {
  if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
  if (!basis.matches(model))
    throw ValidationError("basis/model mismatch: basis was not orthonormalized for this model");
  for (const auto& fj : options.forced_jumps) {
    if (fj.path >= n_paths) throw ValidationError("forced jump refers to a path beyond n_paths");
    if (!(fj.time > grid.t0 && fj.time <= grid.T))
      throw ValidationError("forced jump time must lie in (t0, T]");
    if (fj.size == 0.0 || !std::isfinite(fj.size))
      throw ValidationError("forced jump size must be finite and nonzero");
  }

  const int m = basis.size();
  const int n_steps = grid.n_steps;
  const std::size_t n_nodes = static_cast<std::size_t>(grid.n_nodes());
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);

  PathBundle b;
  b.grid_ = grid;
  b.n_paths_ = n_paths;
  b.m_ = m;
  b.seed_ = seed;
  b.brownian_ = NodeMatrix(n_nodes, n_paths);
  b.levy_ = NodeMatrix(n_nodes, n_paths);
  for (int i = 2; i <= m; ++i) b.higher_powers_.emplace_back(n_nodes, n_paths);
  for (int i = 1; i <= m; ++i) b.teugels_.emplace_back(n_nodes, n_paths);
  b.increasing_ = NodeMatrix(n_nodes, n_paths);

  std::vector<double> shared_b;
  if (options.brownian == BrownianMode::Shared) {
    const std::uint64_t bseed = options.brownian_seed != 0 ? options.brownian_seed : seed;
    shared_b.assign(n_nodes, 0.0);
    for (int i = 0; i < n_steps; ++i) {
      // keyed by steps remaining to T
      CounterRng rng(bseed, kSharedBrownianStream, static_cast<std::uint32_t>(n_steps - 1 - i));
      shared_b[static_cast<std::size_t>(i) + 1] =
          shared_b[static_cast<std::size_t>(i)] + rng.normal() * sqrt_dt;
    }
  }

  const auto& atoms = model.atoms();
  const double total_rate = model.total_rate();
  std::vector<double> cumulative_rate;
  for (const auto& a : atoms)
    cumulative_rate.push_back((cumulative_rate.empty() ? 0.0 : cumulative_rate.back()) + a.rate);
  std::vector<double> expected(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) expected[static_cast<std::size_t>(k - 1)] = model.expected_power_jump(k);

  std::vector<std::vector<JumpRecord>> per_path(n_paths);

  parallel_for(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> jump_power_sums(static_cast<std::size_t>(m));
    std::vector<double> y_values(static_cast<std::size_t>(m));
    std::vector<JumpRecord> step_jumps;
    for (std::size_t p = begin; p < end; ++p) {
      std::fill(jump_power_sums.begin(), jump_power_sums.end(), 0.0);
      double w = 0.0;
      double bp = 0.0;
      auto& path_jumps = per_path[p];
      for (int i = 0; i < n_steps; ++i) {
        const double t_lo = grid.node(i);
        const double t_hi = grid.node(i + 1);
        CounterRng rng(seed, p, static_cast<std::uint32_t>(i));
        const double zb = rng.normal();
        const double zw = rng.normal();

        step_jumps.clear();
        if (options.sample_jumps && total_rate > 0.0) {
          const auto count = rng.poisson(total_rate * dt);
          for (std::uint64_t j = 0; j < count; ++j) {
            const double u_time = rng.uniform();
            const double u_atom = rng.uniform() * total_rate;
            auto it = std::upper_bound(cumulative_rate.begin(), cumulative_rate.end(), u_atom);
            if (it == cumulative_rate.end()) --it;
            const auto atom = static_cast<std::size_t>(it - cumulative_rate.begin());
            step_jumps.push_back({i, t_lo + u_time * dt, atoms[atom].size});
          }
        }
        for (const auto& fj : options.forced_jumps) {
          if (fj.path == p && fj.time > t_lo && fj.time <= t_hi)
            step_jumps.push_back({i, fj.time, fj.size});
        }
        std::stable_sort(step_jumps.begin(), step_jumps.end(),
                         [](const JumpRecord& a, const JumpRecord& c) { return a.time < c.time; });
        for (const auto& jr : step_jumps) {
          double power = 1.0;
          for (int k = 0; k < m; ++k) {
            power *= jr.size;
            jump_power_sums[static_cast<std::size_t>(k)] += power;
          }
          path_jumps.push_back(jr);
        }

        w += zw * sqrt_dt;
        switch (options.brownian) {
          case BrownianMode::PerPath: bp += zb * sqrt_dt; break;
          case BrownianMode::Shared: bp = shared_b[static_cast<std::size_t>(i) + 1]; break;
          case BrownianMode::Zero: bp = 0.0; break;
        }

        const auto node = static_cast<std::size_t>(i) + 1;
        const double elapsed = t_hi - grid.t0;
        const double l_value = model.drift() * elapsed + model.sigma0() * w + jump_power_sums[0];
        b.brownian_(node, p) = bp;
        b.levy_(node, p) = l_value;
        for (int k = 2; k <= m; ++k)
          b.higher_powers_[static_cast<std::size_t>(k - 2)](node, p) =
              jump_power_sums[static_cast<std::size_t>(k - 1)];

        y_values[0] = l_value - elapsed * expected[0];
        for (int k = 2; k <= m; ++k)
          y_values[static_cast<std::size_t>(k - 1)] =
              jump_power_sums[static_cast<std::size_t>(k - 1)] - elapsed * expected[static_cast<std::size_t>(k - 1)];
        for (int r = 1; r <= m; ++r) {
          const auto c = basis.q(r).coeffs();
          double h = 0.0;
          for (int k = 1; k <= r; ++k)
            h += c[static_cast<std::size_t>(k - 1)] * y_values[static_cast<std::size_t>(k - 1)];
          b.teugels_[static_cast<std::size_t>(r - 1)](node, p) = h;
        }
      }
    }
  });

  b.jump_offsets_.assign(n_paths + 1, 0);
  std::size_t total = 0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    b.jump_offsets_[p] = total;
    total += per_path[p].size();
  }
  b.jump_offsets_[n_paths] = total;
  b.jumps_.reserve(total);
  for (auto& v : per_path) b.jumps_.insert(b.jumps_.end(), v.begin(), v.end());
  return b;
}

NodeMatrix step_increments(const NodeMatrix& values) {
  if (values.nodes() < 2) return NodeMatrix(0, values.paths());
  NodeMatrix d(values.nodes() - 1, values.paths());
  for (std::size_t i = 0; i + 1 < values.nodes(); ++i) {
    const auto lo = values.row(i);
    const auto hi = values.row(i + 1);
    auto out = d.row(i);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = hi[p] - lo[p];
  }
  return d;
}

NodeMatrix backward_increments(const PathBundle& bundle) { return step_increments(bundle.brownian()); }

struct IncreasingProcessAttacher {
  static void install(PathBundle& bundle, NodeMatrix values) { bundle.increasing_ = std::move(values); }
};

PathBundle attach_increasing_process(PathBundle bundle, const IncreasingProcessSpec& spec) {
  const auto& grid = bundle.grid();
  const std::size_t n_nodes = static_cast<std::size_t>(grid.n_nodes());
  const std::size_t n_paths = bundle.n_paths();
  NodeMatrix a(n_nodes, n_paths);

  if (const auto* det = std::get_if<IncreasingProcessSpec::Deterministic>(&spec.source)) {
    if (!det->value) throw ValidationError("deterministic increasing process has no function");
    const double base = det->value(grid.t0);
    double prev = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double v = det->value(grid.node(static_cast<int>(i))) - base;
      if (!std::isfinite(v) || v < prev) {
        std::ostringstream msg;
        msg << "increasing process decreases (or is non-finite) at node " << i;
        throw ValidationError(msg.str());
      }
      prev = v;
      std::fill(a.row(i).begin(), a.row(i).end(), v);
    }
  } else if (const auto* imp = std::get_if<IncreasingProcessSpec::Imported>(&spec.source)) {
    if (imp->values.nodes() != n_nodes || imp->values.paths() != n_paths)
      throw ValidationError("imported increasing process has the wrong shape");
    for (std::size_t p = 0; p < n_paths; ++p) {
      if (imp->values(0, p) != 0.0) {
        std::ostringstream msg;
        msg << "imported increasing process must start at 0 (path " << p << ")";
        throw ValidationError(msg.str());
      }
      for (std::size_t i = 1; i < n_nodes; ++i) {
        if (!(imp->values(i, p) >= imp->values(i - 1, p))) {
          std::ostringstream msg;
          msg << "imported increasing process decreases at node " << i << " of path " << p;
          throw ValidationError(msg.str());
        }
      }
    }
    a = imp->values;
  }
  IncreasingProcessAttacher::install(bundle, std::move(a));
  return bundle;
}

void write_paths_csv(std::ostream& out, const PathBundle& bundle, std::size_t max_paths) {
  CsvWriter csv(out);
  std::vector<std::string> cols{"path_id", "node_index", "t", "B", "L"};
  for (int i = 1; i <= bundle.m(); ++i) cols.push_back("H_" + std::to_string(i));
  cols.push_back("A");
  csv.header(cols);
  const std::size_t n = std::min(max_paths, bundle.n_paths());
  const auto& grid = bundle.grid();
  for (std::size_t p = 0; p < n; ++p) {
    for (int i = 0; i < grid.n_nodes(); ++i) {
      const auto node = static_cast<std::size_t>(i);
      csv.field(p).field(i).field(grid.node(i)).field(bundle.brownian()(node, p)).field(bundle.levy()(node, p));
      for (int k = 1; k <= bundle.m(); ++k) csv.field(bundle.teugels(k)(node, p));
      csv.field(bundle.increasing()(node, p));
      csv.end_row();
    }
  }
}

}  // namespace levybsde
