#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "levybsde/levy_basis.hpp"
#include "levybsde/regression.hpp"
#include "levybsde/solver.hpp"

namespace levybsde::cli {

/// Flat sectioned key = value configuration. Only documented keys exist;
/// setting anything else is a ValidationError.
class Config {
 public:
  /// Every key with its default value.
  static Config defaults();

  /// `key` is "section.name".
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;

  /// Parses "[section]" headers and "name = value" lines; '#' starts a comment.
  void load_text(std::string_view text, std::string_view origin);
  void load_file(const std::string& path);
  /// Applies "section.name=value".
  void apply_override(std::string_view assignment);

  /// Canonical text form; load_text(serialize()) reproduces the config.
  std::string serialize() const;

  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> number_list(const std::string& key) const;

 private:
  struct Entry {
    std::string key;
    std::string value;
  };
  Entry* find(const std::string& key);
  const Entry* find(const std::string& key) const;
  std::vector<Entry> entries_;
};

enum class StateKind { Levy, Reflected };
enum class IncreasingKind { Zero, Time, LocalTime };

/// Typed, range-checked view of a Config.
struct Settings {
  std::vector<JumpAtom> atoms;
  double sigma0 = 0.0;
  double drift = 0.0;
  int m = 1;

  double t0 = 0.0;
  double T = 1.0;
  int n_steps = 100;
  int surface_t_points = 11;
  int surface_x_points = 11;

  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  BrownianMode brownian = BrownianMode::Shared;

  SchemeSpec scheme;
  std::vector<double> n_list;
  RegressionBasis basis;
  FixedPointOptions fixed_point;

  std::string scenario;
  StateKind state = StateKind::Levy;
  IncreasingKind increasing = IncreasingKind::Zero;
  double x0 = 0.0;
  double theta = 1.0;
  double sigma_c = 1.0;
  double sigma_abs = 0.0;
  double xi_c = 0.0, xi_x = 0.0, xi_x2 = 0.0;
  double f_c = 0.0, f_y = 0.0, f_z = 0.0;
  double phi_c = 0.0, phi_y = 0.0;
  double g_c = 0.0, g_y = 0.0, g_z = 0.0;
  bool obstacle = false;
  double s_c = 0.0, s_t = 0.0, s_x = 0.0, s_x2 = 0.0;
  double lipschitz_c = 1.0;
  double g_alpha = 0.5;

  std::string out_dir = "out";
  bool write_solution = false;
  std::size_t max_paths = 20;

  static Settings from(const Config& config);

  double xi(double x) const { return xi_c + xi_x * x + xi_x2 * x * x; }
  double sigma(double x) const;
  double obstacle_value(double t, double x) const { return s_c + s_t * t + s_x * x + s_x2 * x * x; }
  Problem problem() const;
};

}  // namespace levybsde::cli
