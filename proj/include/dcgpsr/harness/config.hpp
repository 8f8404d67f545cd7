#pragma once

// Experiment configuration: flat key=value text, '#' starts a comment.
//
//   n_antennas=256
//   sparsity=16
//   m=128
//   k=32            # defaults to 2 * sparsity
//   rho=auto        # or a positive number
//   rho_fraction=0.001
//   rho_noise_factor=0.5
//   snr_grid=5,10,15,20,25   # empty or absent: noiseless
//   samples=100
//   seed=42
//   solvers=dc_gpsr,gpsr,ista,omp

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcgpsr/errors.hpp"
#include "dcgpsr/problem.hpp"

namespace dcgpsr {

/// Validation failure tied to one configuration field.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : InvalidInput("config field '" + field + "': " + message), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class SolverKind { dc_gpsr, dc_proximal, gpsr, ista, omp };

inline constexpr SolverKind kAllSolvers[] = {SolverKind::dc_gpsr, SolverKind::dc_proximal,
                                             SolverKind::gpsr, SolverKind::ista, SolverKind::omp};

inline std::string_view solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::dc_gpsr: return "dc_gpsr";
    case SolverKind::dc_proximal: return "dc_proximal";
    case SolverKind::gpsr: return "gpsr";
    case SolverKind::ista: return "ista";
    case SolverKind::omp: return "omp";
  }
  return "?";
}

inline std::optional<SolverKind> parse_solver(std::string_view name) {
  for (auto s : kAllSolvers)
    if (solver_name(s) == name) return s;
  return std::nullopt;
}

/// rho is either fixed or auto_rho per instance.
struct RhoRule {
  std::optional<double> fixed;
  double fraction = kDefaultRhoFraction;
  double noise_factor = kDefaultRhoNoiseFactor;

  double resolve(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double sigma) const {
    return fixed ? *fixed : auto_rho(phi, y, sigma, fraction, noise_factor);
  }
};

struct ExperimentConfig {
  int n_antennas = 256;
  int sparsity = 16;
  int m_measurements = 128;
  std::optional<int> k_real;  // 2 * sparsity when unset
  RhoRule rho_rule;
  std::vector<double> snr_grid_db;
  int num_samples = 100;
  std::uint64_t base_seed = 42;
  std::vector<SolverKind> solvers{SolverKind::dc_gpsr};
  SolverOptions solver_options;
  bool write_traces = true;
  bool write_vectors = true;

  int k() const { return k_real ? *k_real : 2 * sparsity; }
  int n_real() const { return 2 * n_antennas; }

  void validate() const {
    if (n_antennas < 1) throw ConfigError("n_antennas", "must be >= 1");
    if (sparsity < 1 || sparsity > n_antennas)
      throw ConfigError("sparsity", "must lie in [1, n_antennas]");
    if (m_measurements < 1) throw ConfigError("m", "must be >= 1");
    if (m_measurements >= n_real())
      throw ConfigError("m", "must be < 2 * n_antennas (" + std::to_string(n_real()) + ")");
    if (k() < 1 || k() > n_real())
      throw ConfigError("k", "must lie in [1, 2 * n_antennas]");
    if (rho_rule.fixed && !(*rho_rule.fixed > 0.0 && std::isfinite(*rho_rule.fixed)))
      throw ConfigError("rho", "must be 'auto' or a finite number > 0");
    if (!(rho_rule.fraction > 0.0 && std::isfinite(rho_rule.fraction)))
      throw ConfigError("rho_fraction", "must be a finite number > 0");
    if (!(rho_rule.noise_factor >= 0.0 && std::isfinite(rho_rule.noise_factor)))
      throw ConfigError("rho_noise_factor", "must be a finite number >= 0");
    for (double s : snr_grid_db)
      if (!std::isfinite(s)) throw ConfigError("snr_grid", "entries must be finite");
    if (num_samples < 1) throw ConfigError("samples", "must be >= 1");
    if (solvers.empty()) throw ConfigError("solvers", "at least one solver is required");
    for (std::size_t i = 0; i < solvers.size(); ++i)
      for (std::size_t j = i + 1; j < solvers.size(); ++j)
        if (solvers[i] == solvers[j])
          throw ConfigError("solvers", "duplicate entry '" +
                                           std::string(solver_name(solvers[i])) + "'");
    if (std::find(solvers.begin(), solvers.end(), SolverKind::omp) != solvers.end() &&
        k() > m_measurements)
      throw ConfigError("k", "omp requires k <= m");
    const SolverOptions& o = solver_options;
    if (!(o.outer_tol > 0.0)) throw ConfigError("outer_tol", "must be > 0");
    if (o.outer_max < 1) throw ConfigError("outer_max", "must be >= 1");
    if (!(o.inner_tol > 0.0)) throw ConfigError("inner_tol", "must be > 0");
    if (o.inner_max < 1) throw ConfigError("inner_max", "must be >= 1");
    if (!(o.alpha_min > 0.0)) throw ConfigError("alpha_min", "must be > 0");
    if (!(o.alpha_max > o.alpha_min)) throw ConfigError("alpha_max", "must exceed alpha_min");
    if (!(o.lipschitz_margin >= 1.0)) throw ConfigError("lipschitz_margin", "must be >= 1");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

}  // namespace detail

/// Parses and validates a configuration. Unknown and repeated keys are errors.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected key=value, got '" + text + "'");
    const std::string key = detail::trim(std::string_view(text).substr(0, eq));
    const std::string value = detail::trim(std::string_view(text).substr(eq + 1));
    if (!seen.emplace(key, value).second) throw ConfigError(key, "given more than once");

    using detail::parse_integer;
    using detail::parse_real;
    SolverOptions& o = cfg.solver_options;
    if (key == "n_antennas") cfg.n_antennas = parse_integer<int>(key, value);
    else if (key == "sparsity") cfg.sparsity = parse_integer<int>(key, value);
    else if (key == "m") cfg.m_measurements = parse_integer<int>(key, value);
    else if (key == "k") cfg.k_real = parse_integer<int>(key, value);
    else if (key == "rho") {
      if (value == "auto") cfg.rho_rule.fixed.reset();
      else cfg.rho_rule.fixed = parse_real(key, value);
    } else if (key == "rho_fraction") cfg.rho_rule.fraction = parse_real(key, value);
    else if (key == "rho_noise_factor") cfg.rho_rule.noise_factor = parse_real(key, value);
    else if (key == "snr_grid") {
      cfg.snr_grid_db.clear();
      for (const auto& item : detail::split_list(value)) cfg.snr_grid_db.push_back(parse_real(key, item));
    } else if (key == "samples") cfg.num_samples = parse_integer<int>(key, value);
    else if (key == "seed") cfg.base_seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "solvers") {
      cfg.solvers.clear();
      for (const auto& item : detail::split_list(value)) {
        const auto s = parse_solver(item);
        if (!s) throw ConfigError(key, "unknown solver '" + item + "'");
        cfg.solvers.push_back(*s);
      }
    } else if (key == "outer_tol") o.outer_tol = parse_real(key, value);
    else if (key == "outer_max") o.outer_max = parse_integer<int>(key, value);
    else if (key == "inner_tol") o.inner_tol = parse_real(key, value);
    else if (key == "inner_max") o.inner_max = parse_integer<int>(key, value);
    else if (key == "alpha_min") o.alpha_min = parse_real(key, value);
    else if (key == "alpha_max") o.alpha_max = parse_real(key, value);
    else if (key == "lipschitz_margin") o.lipschitz_margin = parse_real(key, value);
    else if (key == "traces") cfg.write_traces = detail::parse_bool(key, value);
    else if (key == "vectors") cfg.write_vectors = detail::parse_bool(key, value);
    else throw ConfigError(key, "unknown key");
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

}  // namespace dcgpsr
