#include "levybsde/cli/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "levybsde/errors.hpp"

namespace levybsde::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.size() - start : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
    throw ValidationError("config key '" + key + "': '" + text + "' is not a finite number");
  return v;
}

[[noreturn]] void range_error(const std::string& key, const std::string& requirement) {
  throw ValidationError("config key '" + key + "' " + requirement);
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.entries_ = {
      {"model.atoms", "1:1"},
      {"model.sigma0", "0"},
      {"model.drift", "0"},
      {"model.m", "1"},
      {"grid.t0", "0"},
      {"grid.T", "1"},
      {"grid.n_steps", "100"},
      {"grid.surface_t_points", "11"},
      {"grid.surface_x_points", "11"},
      {"monte_carlo.n_paths", "1000"},
      {"monte_carlo.seed", "1"},
      {"monte_carlo.brownian", "shared"},
      {"solver.scheme", "direct"},
      {"solver.n_penalty", "0"},
      {"solver.n_list", "1,2,4,8"},
      {"solver.degree", "2"},
      {"solver.ridge", "1e-8"},
      {"solver.boundary_indicator", "false"},
      {"solver.tol", "1e-10"},
      {"solver.max_iter", "25"},
      {"solver.alpha_prime", "0"},
      {"problem.scenario", "custom"},
      {"problem.state", "levy"},
      {"problem.increasing", "zero"},
      {"problem.x0", "0"},
      {"problem.theta", "1"},
      {"problem.sigma_c", "1"},
      {"problem.sigma_abs", "0"},
      {"problem.xi_c", "0"},
      {"problem.xi_x", "0"},
      {"problem.xi_x2", "0"},
      {"problem.f_c", "0"},
      {"problem.f_y", "0"},
      {"problem.f_z", "0"},
      {"problem.phi_c", "0"},
      {"problem.phi_y", "0"},
      {"problem.g_c", "0"},
      {"problem.g_y", "0"},
      {"problem.g_z", "0"},
      {"problem.obstacle", "none"},
      {"problem.s_c", "0"},
      {"problem.s_t", "0"},
      {"problem.s_x", "0"},
      {"problem.s_x2", "0"},
      {"problem.lipschitz_c", "1"},
      {"problem.g_alpha", "0.5"},
      {"outputs.dir", "out"},
      {"outputs.write_solution", "false"},
      {"outputs.max_paths", "20"},
  };
  return c;
}

Config::Entry* Config::find(const std::string& key) {
  for (auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

const Config::Entry* Config::find(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

void Config::set(const std::string& key, const std::string& value) {
  auto* e = find(key);
  if (!e) throw ValidationError("unknown config key '" + key + "'");
  e->value = value;
}

const std::string& Config::get(const std::string& key) const {
  const auto* e = find(key);
  if (!e) throw ValidationError("unknown config key '" + key + "'");
  return e->value;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

void Config::load_text(std::string_view text, std::string_view origin) {
  std::string section;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        std::ostringstream msg;
        msg << origin << ":" << line_no << ": malformed section header";
        throw ValidationError(msg.str());
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      std::ostringstream msg;
      msg << origin << ":" << line_no << ": expected 'name = value' inside a [section]";
      throw ValidationError(msg.str());
    }
    set(section + "." + trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  load_text(buf.str(), path);
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ValidationError("override '" + std::string(assignment) + "' must look like section.key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::serialize() const {
  std::ostringstream out;
  std::string section;
  for (const auto& e : entries_) {
    const auto dot = e.key.find('.');
    const auto sec = e.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << e.key.substr(dot + 1) << " = " << e.value << "\n";
  }
  return out.str();
}

double Config::number(const std::string& key) const { return parse_double(get(key), key); }

long long Config::integer(const std::string& key) const {
  const auto& text = get(key);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
    throw ValidationError("config key '" + key + "': '" + text + "' is not an integer");
  return v;
}

std::uint64_t Config::u64(const std::string& key) const {
  const auto& text = get(key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || text.front() == '-' || end != text.c_str() + text.size() || errno == ERANGE)
    throw ValidationError("config key '" + key + "': '" + text + "' is not an unsigned 64-bit integer");
  return v;
}

bool Config::boolean(const std::string& key) const {
  const auto& text = get(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("config key '" + key + "': '" + text + "' is not a boolean");
}

std::vector<double> Config::number_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(get(key), ',')) out.push_back(parse_double(item, key));
  return out;
}

double Settings::sigma(double x) const { return sigma_c + sigma_abs * std::abs(x); }

Problem Settings::problem() const {
  Problem p;
  const double fc = f_c, fy = f_y, fz = f_z;
  if (fc != 0.0 || fy != 0.0 || fz != 0.0)
    p.coeffs.f = [fc, fy, fz](double, double, double y, std::span<const double> z) {
      return fc + fy * y + (z.empty() ? 0.0 : fz * z[0]);
    };
  const double pc = phi_c, py = phi_y;
  if (pc != 0.0 || py != 0.0) p.coeffs.phi = [pc, py](double, double, double y) { return pc + py * y; };
  const double gc = g_c, gy = g_y, gz = g_z;
  if (gc != 0.0 || gy != 0.0 || gz != 0.0)
    p.coeffs.g = [gc, gy, gz](double, double, double y, std::span<const double> z) {
      return gc + gy * y + (z.empty() ? 0.0 : gz * z[0]);
    };
  p.coeffs.lipschitz_c = lipschitz_c;
  p.coeffs.g_z_alpha = g_alpha;
  p.coeffs.phi_monotone_beta = phi_y;
  const double a = xi_c, b = xi_x, c = xi_x2;
  p.obstacle.xi = [a, b, c](double x) { return a + b * x + c * x * x; };
  if (obstacle) {
    const double sc = s_c, st = s_t, sx = s_x, sx2 = s_x2;
    p.obstacle.S = [sc, st, sx, sx2](double t, double x) { return sc + st * t + sx * x + sx2 * x * x; };
  }
  return p;
}

Settings Settings::from(const Config& c) {
  Settings s;
  {
    const auto& text = c.get("model.atoms");
    if (!text.empty() && text != "none") {
      for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) range_error("model.atoms", "must be a list of size:rate pairs, e.g. 1:1,-1:1");
        s.atoms.push_back({parse_double(parts[0], "model.atoms"), parse_double(parts[1], "model.atoms")});
      }
    }
  }
  s.sigma0 = c.number("model.sigma0");
  if (s.sigma0 < 0.0) range_error("model.sigma0", "must be >= 0");
  s.drift = c.number("model.drift");
  const auto m = c.integer("model.m");
  if (m < 1 || m > 8) range_error("model.m", "must lie in 1..8");
  s.m = static_cast<int>(m);

  s.t0 = c.number("grid.t0");
  s.T = c.number("grid.T");
  if (!(s.T > s.t0)) range_error("grid.T", "must exceed grid.t0");
  const auto n_steps = c.integer("grid.n_steps");
  if (n_steps < 1 || n_steps > 1000000) range_error("grid.n_steps", "must lie in 1..1000000");
  s.n_steps = static_cast<int>(n_steps);
  const auto stp = c.integer("grid.surface_t_points");
  const auto sxp = c.integer("grid.surface_x_points");
  if (stp < 1 || stp > 1001) range_error("grid.surface_t_points", "must lie in 1..1001");
  if (sxp < 1 || sxp > 1001) range_error("grid.surface_x_points", "must lie in 1..1001");
  s.surface_t_points = static_cast<int>(stp);
  s.surface_x_points = static_cast<int>(sxp);

  const auto n_paths = c.integer("monte_carlo.n_paths");
  if (n_paths < 1 || n_paths > 10000000) range_error("monte_carlo.n_paths", "must lie in 1..10000000");
  s.n_paths = static_cast<std::size_t>(n_paths);
  s.seed = c.u64("monte_carlo.seed");
  const auto& brownian = c.get("monte_carlo.brownian");
  if (brownian == "shared") s.brownian = BrownianMode::Shared;
  else if (brownian == "per-path") s.brownian = BrownianMode::PerPath;
  else if (brownian == "zero") s.brownian = BrownianMode::Zero;
  else range_error("monte_carlo.brownian", "must be one of shared, per-path, zero");

  const auto& scheme = c.get("solver.scheme");
  if (scheme == "direct") s.scheme.kind = Scheme::Direct;
  else if (scheme == "penalized") s.scheme.kind = Scheme::Penalized;
  else range_error("solver.scheme", "must be direct or penalized");
  s.scheme.n_penalty = c.number("solver.n_penalty");
  if (s.scheme.n_penalty < 0.0) range_error("solver.n_penalty", "must be >= 0");
  s.n_list = c.number_list("solver.n_list");
  for (std::size_t k = 0; k < s.n_list.size(); ++k) {
    if (s.n_list[k] < 0.0) range_error("solver.n_list", "entries must be >= 0");
    if (k > 0 && !(s.n_list[k] > s.n_list[k - 1])) range_error("solver.n_list", "must be strictly increasing");
  }
  const auto degree = c.integer("solver.degree");
  if (degree < 0 || degree > 6) range_error("solver.degree", "must lie in 0..6");
  s.basis.degree = static_cast<int>(degree);
  s.basis.ridge = c.number("solver.ridge");
  if (s.basis.ridge < 0.0) range_error("solver.ridge", "must be >= 0");
  s.basis.boundary_indicator = c.boolean("solver.boundary_indicator");
  s.fixed_point.tol = c.number("solver.tol");
  if (!(s.fixed_point.tol > 0.0)) range_error("solver.tol", "must be > 0");
  const auto max_iter = c.integer("solver.max_iter");
  if (max_iter < 1 || max_iter > 10000) range_error("solver.max_iter", "must lie in 1..10000");
  s.fixed_point.max_iter = static_cast<int>(max_iter);
  s.fixed_point.alpha_prime = c.number("solver.alpha_prime");
  if (s.fixed_point.alpha_prime < 0.0 || s.fixed_point.alpha_prime >= 1.0)
    range_error("solver.alpha_prime", "must be 0 (default) or lie in (g_alpha, 1)");

  s.scenario = c.get("problem.scenario");
  const auto& state = c.get("problem.state");
  if (state == "levy") s.state = StateKind::Levy;
  else if (state == "reflected") s.state = StateKind::Reflected;
  else range_error("problem.state", "must be levy or reflected");
  const auto& inc = c.get("problem.increasing");
  if (inc == "zero") s.increasing = IncreasingKind::Zero;
  else if (inc == "time") s.increasing = IncreasingKind::Time;
  else if (inc == "local-time") s.increasing = IncreasingKind::LocalTime;
  else range_error("problem.increasing", "must be zero, time or local-time");
  if (s.increasing == IncreasingKind::LocalTime && s.state != StateKind::Reflected)
    range_error("problem.increasing", "= local-time requires problem.state = reflected");
  s.x0 = c.number("problem.x0");
  s.theta = c.number("problem.theta");
  if (!(s.theta > 0.0)) range_error("problem.theta", "must be > 0");
  if (s.state == StateKind::Reflected && std::abs(s.x0) > s.theta)
    range_error("problem.x0", "must lie in [-theta, theta] for the reflected state");
  s.basis.theta = s.theta;
  s.sigma_c = c.number("problem.sigma_c");
  s.sigma_abs = c.number("problem.sigma_abs");
  s.xi_c = c.number("problem.xi_c");
  s.xi_x = c.number("problem.xi_x");
  s.xi_x2 = c.number("problem.xi_x2");
  s.f_c = c.number("problem.f_c");
  s.f_y = c.number("problem.f_y");
  s.f_z = c.number("problem.f_z");
  s.phi_c = c.number("problem.phi_c");
  s.phi_y = c.number("problem.phi_y");
  if (s.phi_y > 0.0) range_error("problem.phi_y", "must be <= 0 (phi must be monotone decreasing in y)");
  s.g_c = c.number("problem.g_c");
  s.g_y = c.number("problem.g_y");
  s.g_z = c.number("problem.g_z");
  const auto& obstacle = c.get("problem.obstacle");
  if (obstacle == "none") s.obstacle = false;
  else if (obstacle == "quadratic") s.obstacle = true;
  else range_error("problem.obstacle", "must be none or quadratic");
  s.s_c = c.number("problem.s_c");
  s.s_t = c.number("problem.s_t");
  s.s_x = c.number("problem.s_x");
  s.s_x2 = c.number("problem.s_x2");
  s.lipschitz_c = c.number("problem.lipschitz_c");
  if (!(s.lipschitz_c > 0.0)) range_error("problem.lipschitz_c", "must be > 0");
  s.g_alpha = c.number("problem.g_alpha");
  if (!(s.g_alpha > 0.0 && s.g_alpha < 1.0)) range_error("problem.g_alpha", "must lie in (0, 1)");
  if (s.fixed_point.alpha_prime != 0.0 && !(s.fixed_point.alpha_prime > s.g_alpha))
    range_error("solver.alpha_prime", "must exceed problem.g_alpha");

  s.out_dir = c.get("outputs.dir");
  if (s.out_dir.empty()) range_error("outputs.dir", "must not be empty");
  s.write_solution = c.boolean("outputs.write_solution");
  const auto max_paths = c.integer("outputs.max_paths");
  if (max_paths < 0) range_error("outputs.max_paths", "must be >= 0");
  s.max_paths = static_cast<std::size_t>(max_paths);
  return s;
}

}  // namespace levybsde::cli
