#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "levybsde/levy_basis.hpp"
#include "levybsde/node_matrix.hpp"

namespace levybsde {

/// Uniform grid t_i = t0 + i (T - t0) / n_steps.
struct TimeGrid {
  double t0 = 0.0;
  double T = 1.0;
  int n_steps = 1;

  static TimeGrid make(double t0, double T, int n_steps);

  double dt() const { return (T - t0) / n_steps; }
  double node(int i) const { return i == n_steps ? T : t0 + i * dt(); }
  int n_nodes() const { return n_steps + 1; }
};

struct JumpRecord {
  int step = 0;  // jump lies in (t_step, t_{step+1}]
  double time = 0.0;
  double size = 0.0;
};

enum class BrownianMode {
  Shared,   // one B path common to every path of the bundle
  PerPath,  // independent B per path
  Zero,     // B identically zero
};

/// Test hook: a jump injected on top of the sampled ones.
struct ForcedJump {
  std::size_t path = 0;
  double time = 0.0;
  double size = 0.0;
};

struct SimulationOptions {
  BrownianMode brownian = BrownianMode::Shared;
  /// Seed of the shared Brownian stream; 0 means "use the bundle seed".
  std::uint64_t brownian_seed = 0;
  std::vector<ForcedJump> forced_jumps;
  bool sample_jumps = true;
  std::size_t threads = 1;
};

class PathBundle {
 public:
  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  int m() const { return m_; }
  std::uint64_t seed() const { return seed_; }

  const NodeMatrix& brownian() const { return brownian_; }
  const NodeMatrix& levy() const { return levy_; }
  /// L^i for i = 1..m; L^1 is L itself.
  const NodeMatrix& power_jumps(int i) const;
  /// H^(i) for i = 1..m.
  const NodeMatrix& teugels(int i) const;
  const NodeMatrix& increasing() const { return increasing_; }

  std::span<const JumpRecord> jumps(std::size_t path) const;
  std::size_t total_jumps() const { return jumps_.size(); }

 private:
  friend PathBundle simulate_bundle(const LevyMeasureModel&, const PolynomialBasis&,
                                    const TimeGrid&, std::size_t, std::uint64_t,
                                    const SimulationOptions&);
  friend struct IncreasingProcessAttacher;

  TimeGrid grid_;
  std::size_t n_paths_ = 0;
  int m_ = 0;
  std::uint64_t seed_ = 0;
  NodeMatrix brownian_;
  NodeMatrix levy_;
  std::vector<NodeMatrix> higher_powers_;  // L^2 .. L^m
  std::vector<NodeMatrix> teugels_;
  NodeMatrix increasing_;
  std::vector<JumpRecord> jumps_;
  std::vector<std::size_t> jump_offsets_;  // n_paths + 1
};

/// Simulates B, L = drift t + sigma0 W + compound Poisson, the power-jump
/// processes and the Teugels martingales. Deterministic in (seed, path_id).
/// The increasing process starts as A = 0.
PathBundle simulate_bundle(const LevyMeasureModel& model, const PolynomialBasis& basis,
                           const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                           const SimulationOptions& options = {});

/// Delta B_i = B_{t_{i+1}} - B_{t_i}, one row per step.
NodeMatrix backward_increments(const PathBundle& bundle);

/// Per-step increments of any node-valued process, one row per step.
NodeMatrix step_increments(const NodeMatrix& values);

struct IncreasingProcessSpec {
  struct Zero {};
  struct Deterministic {
    std::function<double(double)> value;
  };
  struct Imported {
    NodeMatrix values;  // e.g. |eta| from reflected_forward
  };
  std::variant<Zero, Deterministic, Imported> source = Zero{};
};

/// Installs A on the bundle. Deterministic sources are shifted so that
/// A_{t0} = 0. Throws ValidationError if A would decrease anywhere.
PathBundle attach_increasing_process(PathBundle bundle, const IncreasingProcessSpec& spec);

/// CSV with columns path_id,node_index,t,B,L,H_1..H_m,A for the first
/// `max_paths` paths.
void write_paths_csv(std::ostream& out, const PathBundle& bundle, std::size_t max_paths);

}  // namespace levybsde
