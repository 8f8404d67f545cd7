#pragma once

// CSV and JSON persistence for vectors, matrices, channel samples, solver
// traces and results. Doubles are written with 17 significant digits so that
// every value reads back bit-exactly.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dcgpsr/channel_model.hpp"
#include "dcgpsr/errors.hpp"
#include "dcgpsr/problem.hpp"
#include "dcgpsr/sensing.hpp"

namespace dcgpsr::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  if (end == begin || *end != '\0' || (errno == ERANGE && std::isinf(v)))
    throw IoError(where + ": cannot parse number '" + text + "'");
  return v;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

inline std::vector<std::string> split_fields(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// ---- vectors ---------------------------------------------------------------

inline void write_vector_csv(std::ostream& out, const std::string& name, const Eigen::VectorXd& v) {
  out << name << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

inline void write_complex_csv(std::ostream& out, const std::string& name,
                              const Eigen::VectorXcd& v) {
  out << name << "_re," << name << "_im\n";
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << format_double(v(i).real()) << ',' << format_double(v(i).imag()) << '\n';
}

namespace detail {

/// Rows of a headed CSV, each checked to have `columns` fields.
inline std::vector<std::vector<double>> read_table(std::istream& in, std::size_t columns,
                                                   const std::string& where) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(where + ": empty file");
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns)
      throw IoError(where + ": line " + std::to_string(line_no) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(columns));
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_double(f, where));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline Eigen::VectorXd read_vector_csv(std::istream& in, const std::string& where = "vector") {
  const auto rows = detail::read_table(in, 1, where);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<Eigen::Index>(i)) = rows[i][0];
  return v;
}

inline Eigen::VectorXcd read_complex_csv(std::istream& in, const std::string& where = "vector") {
  const auto rows = detail::read_table(in, 2, where);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = Complex(rows[i][0], rows[i][1]);
  return v;
}

inline void save_vector(const fs::path& path, const std::string& name, const Eigen::VectorXd& v) {
  auto out = open_out(path);
  write_vector_csv(out, name, v);
}

inline Eigen::VectorXd load_vector(const fs::path& path) {
  auto in = open_in(path);
  return read_vector_csv(in, path.string());
}

inline void save_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline json load_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// ---- matrices --------------------------------------------------------------

inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

inline Eigen::MatrixXd read_matrix_csv(std::istream& in, const std::string& where = "matrix") {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split_fields(line)) row.push_back(parse_double(f, where));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(where + ": ragged rows (" + std::to_string(row.size()) + " vs " +
                    std::to_string(rows.front().size()) + " columns)");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(where + ": empty matrix");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return a;
}

inline json matrix_sidecar(const MeasurementMatrix& phi) {
  return json{{"m", phi.m()}, {"n", phi.n()}, {"seed", phi.seed}};
}

/// Writes <stem>.csv and <stem>.json.
inline void save_matrix(const fs::path& stem, const MeasurementMatrix& phi) {
  auto out = open_out(fs::path(stem).replace_extension(".csv"));
  write_matrix_csv(out, phi.phi);
  save_json(fs::path(stem).replace_extension(".json"), matrix_sidecar(phi));
}

/// Reads a matrix CSV; when a JSON sidecar sits next to it, its m and n
/// must match and its seed is kept.
inline MeasurementMatrix load_matrix(const fs::path& csv) {
  auto in = open_in(csv);
  MeasurementMatrix phi{read_matrix_csv(in, csv.string()), 0};
  const fs::path sidecar = fs::path(csv).replace_extension(".json");
  if (fs::exists(sidecar)) {
    const json j = load_json(sidecar);
    if (j.value("m", phi.m()) != phi.m() || j.value("n", phi.n()) != phi.n())
      throw IoError(sidecar.string() + ": declared shape does not match " + csv.string());
    phi.seed = j.value("seed", std::uint64_t{0});
  }
  return phi;
}

// ---- channel samples -------------------------------------------------------

inline json channel_json(const ChannelSample& s) {
  return json{{"n", s.h_angular.size()}, {"sparsity", s.sparsity}, {"seed", s.seed}};
}

/// h_spatial.csv, h_angular.csv, x_true.csv and channel.json under dir.
inline void save_channel(const fs::path& dir, const ChannelSample& s) {
  {
    auto out = open_out(dir / "h_spatial.csv");
    write_complex_csv(out, "h_spatial", s.h_spatial);
  }
  {
    auto out = open_out(dir / "h_angular.csv");
    write_complex_csv(out, "h_angular", s.h_angular);
  }
  save_vector(dir / "x_true.csv", "x_true", s.x_real);
  save_json(dir / "channel.json", channel_json(s));
}

// ---- traces and results ----------------------------------------------------

inline void write_trace_csv(std::ostream& out, const SolverTrace& t) {
  out << "outer_iter,inner_iter_cumulative,F,l1_objective,normalized_sq_error\n";
  std::size_t cumulative = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    cumulative += t.inner_counts[i];
    out << i << ',' << cumulative << ',' << format_double(t.outer_objectives[i]) << ','
        << format_double(t.l1_objectives[i]) << ',';
    if (i < t.errors.size()) out << format_double(t.errors[i]);
    out << '\n';
  }
}

inline json trace_json(const SolverTrace& t) {
  json rows = json::array();
  std::size_t cumulative = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    cumulative += t.inner_counts[i];
    json row{{"outer_iter", i},
             {"inner_iter_cumulative", cumulative},
             {"F", t.outer_objectives[i]},
             {"l1_objective", t.l1_objectives[i]}};
    row["normalized_sq_error"] = i < t.errors.size() ? json(t.errors[i]) : json(nullptr);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json result_json(const ReconResult& r, const SparseProblem& p,
                        std::optional<double> nse = std::nullopt) {
  json j{{"converged", r.converged},
         {"outer_iters", r.outer_iters},
         {"inner_iters", r.trace.inner_total()},
         {"rho", p.rho()},
         {"k", p.k()},
         {"final_F", objective_F(r.x_hat, p)},
         {"final_l1_objective", objective_l1(r.x_hat, p)}};
  j["normalized_sq_error"] = nse ? json(*nse) : json(nullptr);
  return j;
}

}  // namespace dcgpsr::io
