#pragma once

// Noiseless study and SNR sweep. One Gaussian matrix is drawn per
// experiment; every (sample, snr index) cell draws its channel and then its
// noise from its own generator seeded with hash64(base_seed, sample, snr_index).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "dcgpsr/channel_model.hpp"
#include "dcgpsr/dc_gpsr.hpp"
#include "dcgpsr/harness/config.hpp"
#include "dcgpsr/harness/io.hpp"
#include "dcgpsr/metrics.hpp"
#include "dcgpsr/omp.hpp"
#include "dcgpsr/proximal.hpp"
#include "dcgpsr/random.hpp"
#include "dcgpsr/sensing.hpp"

namespace dcgpsr {

struct ResultRecord {
  std::string solver;
  int sample = 0;
  std::uint64_t seed = 0;
  std::optional<double> snr_db;
  double nse = 0.0;
  int outer_iters = 0;
  std::size_t inner_iters = 0;
  double wall_s = 0.0;
};

struct SummaryRow {
  std::string solver;
  std::optional<double> snr_db;
  double nmse = 0.0;
  int samples = 0;
};

struct StudyResult {
  std::vector<ResultRecord> records;
  std::vector<SummaryRow> summary;
  std::uint64_t matrix_seed = 0;
};

/// Everything known about one solver run, handed to a sink as it completes.
struct CellRun {
  SolverKind solver;
  int sample;
  std::size_t snr_index;
  const ChannelSample& channel;
  const NoisySystem& system;
  const SparseProblem& problem;
  const ReconResult& result;
  const ResultRecord& record;
};

using CellSink = std::function<void(const CellRun&)>;

/// Stream index reserved for the shared measurement matrix.
inline constexpr std::uint64_t kMatrixStream = std::numeric_limits<std::uint64_t>::max();

inline std::uint64_t matrix_seed(std::uint64_t base_seed) {
  return hash64(base_seed, kMatrixStream, 0);
}

inline std::uint64_t cell_seed(std::uint64_t base_seed, int sample, std::size_t snr_index) {
  return hash64(base_seed, static_cast<std::uint64_t>(sample), snr_index);
}

inline MeasurementMatrix experiment_matrix(const ExperimentConfig& cfg) {
  Rng rng(matrix_seed(cfg.base_seed));
  return gaussian_matrix(cfg.m_measurements, cfg.n_real(), rng);
}

inline ReconResult run_solver(SolverKind kind, const SparseProblem& p, const SolverOptions& opts,
                              const std::optional<Eigen::VectorXd>& truth) {
  switch (kind) {
    case SolverKind::dc_gpsr: return dc_gpsr(p, opts, truth);
    case SolverKind::dc_proximal: return dc_proximal(p, opts, truth);
    case SolverKind::gpsr: return gpsr_baseline(p, opts, truth);
    case SolverKind::ista: return ista(p, opts, truth);
    case SolverKind::omp: return omp(p, truth);
  }
  throw InvalidInput("unknown solver");
}

/// Gaussian Phi (m x n) and a real x with exactly k nonzero N(0,1) entries at
/// uniformly drawn positions, y = Phi x. Used for small oracle and
/// cross-solver checks.
struct RandomInstance {
  std::shared_ptr<const MeasurementMatrix> phi;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

inline RandomInstance random_sparse_instance(Eigen::Index m, Eigen::Index n, int k,
                                             std::uint64_t seed) {
  detail::require_k(k, n);
  Rng rng(seed);
  auto phi = std::make_shared<const MeasurementMatrix>(gaussian_matrix(m, n, rng));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < k; ++j) {
    Eigen::Index idx = 0;
    do idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    while (x(idx) != 0.0);
    double v = 0.0;
    do v = rng.normal();
    while (v == 0.0);
    x(idx) = v;
  }
  Eigen::VectorXd y = phi->phi * x;
  return {std::move(phi), std::move(x), std::move(y)};
}

/// Mean nse per (solver, snr), in record order.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records) {
  std::vector<SummaryRow> rows;
  std::vector<double> sums;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& s) {
      return s.solver == r.solver && s.snr_db == r.snr_db;
    });
    if (it == rows.end()) {
      rows.push_back(SummaryRow{r.solver, r.snr_db, 0.0, 0});
      sums.push_back(0.0);
      it = rows.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - rows.begin());
    sums[idx] += r.nse;
    ++it->samples;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].nmse = sums[i] / rows[i].samples;
  return rows;
}

namespace detail {

struct Cell {
  ChannelSample channel;
  NoisySystem system;
};

inline Cell draw_cell(const ExperimentConfig& cfg, const MeasurementMatrix& phi, int sample,
                      std::size_t snr_index, std::optional<double> snr_db) {
  const std::uint64_t seed = cell_seed(cfg.base_seed, sample, snr_index);
  Rng rng(seed);
  Cell c{sample_sparse_channel(cfg.n_antennas, cfg.sparsity, rng), {}};
  const Eigen::VectorXd clean = measure(phi, c.channel.x_real);
  const double sigma = snr_db ? snr_to_sigma(c.channel.x_real, phi.m(), *snr_db) : 0.0;
  c.system = add_noise(clean, sigma, rng, snr_db);
  return c;
}

/// Runs every configured solver on every (snr, sample) cell. Records come
/// out sorted by (solver order in cfg, snr order, sample).
inline StudyResult run_cells(const ExperimentConfig& cfg,
                             const std::vector<std::optional<double>>& snrs,
                             const CellSink& sink) {
  cfg.validate();
  StudyResult out;
  out.matrix_seed = matrix_seed(cfg.base_seed);
  const auto phi = std::make_shared<const MeasurementMatrix>(experiment_matrix(cfg));
  const double gram = gram_spectral_norm(phi->phi);

  std::map<std::tuple<std::size_t, std::size_t, int>, ResultRecord> sorted;
  for (std::size_t s = 0; s < snrs.size(); ++s) {
    for (int i = 0; i < cfg.num_samples; ++i) {
      const Cell cell = draw_cell(cfg, *phi, i, s, snrs[s]);
      const double rho = cfg.rho_rule.resolve(phi->phi, cell.system.y, cell.system.sigma);
      const SparseProblem p(phi, cell.system.y, cfg.k(), rho, gram);
      for (std::size_t j = 0; j < cfg.solvers.size(); ++j) {
        const auto t0 = std::chrono::steady_clock::now();
        const ReconResult res = run_solver(cfg.solvers[j], p, cfg.solver_options,
                                           cell.channel.x_real);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ResultRecord rec{std::string(solver_name(cfg.solvers[j])),
                         i,
                         cell.channel.seed,
                         snrs[s],
                         normalized_sq_error(cell.channel.x_real, res.x_hat),
                         res.outer_iters,
                         res.trace.inner_total(),
                         wall};
        if (sink) sink(CellRun{cfg.solvers[j], i, s, cell.channel, cell.system, p, res, rec});
        sorted.emplace(std::make_tuple(j, s, i), std::move(rec));
      }
    }
  }
  for (auto& [key, rec] : sorted) out.records.push_back(std::move(rec));
  out.summary = summarize(out.records);
  return out;
}

}  // namespace detail

/// Noiseless convergence study (snr_grid must be empty).
inline StudyResult run_noiseless_study(const ExperimentConfig& cfg, const CellSink& sink = {}) {
  if (!cfg.snr_grid_db.empty())
    throw ConfigError("snr_grid", "must be empty for the noiseless study");
  return detail::run_cells(cfg, {std::nullopt}, sink);
}

/// Noisy sweep over snr_grid (must be nonempty).
inline StudyResult run_snr_sweep(const ExperimentConfig& cfg, const CellSink& sink = {}) {
  if (cfg.snr_grid_db.empty()) throw ConfigError("snr_grid", "must be nonempty for the SNR sweep");
  std::vector<std::optional<double>> snrs(cfg.snr_grid_db.begin(), cfg.snr_grid_db.end());
  return detail::run_cells(cfg, snrs, sink);
}

/// Dispatches on whether snr_grid is empty.
inline StudyResult run_experiment(const ExperimentConfig& cfg, const CellSink& sink = {}) {
  return cfg.snr_grid_db.empty() ? run_noiseless_study(cfg, sink) : run_snr_sweep(cfg, sink);
}

// ---- persistence -----------------------------------------------------------

enum class OutputFormat { csv, json };

inline std::string snr_field(const std::optional<double>& snr) {
  return snr ? io::format_double(*snr) : std::string();
}

inline void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "solver,sample,seed,snr_db,nse,outer_iters,inner_iters,wall_s\n";
  for (const auto& r : records)
    out << r.solver << ',' << r.sample << ',' << r.seed << ',' << snr_field(r.snr_db) << ','
        << io::format_double(r.nse) << ',' << r.outer_iters << ',' << r.inner_iters << ','
        << io::format_double(r.wall_s) << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "solver,snr_db,nmse\n";
  for (const auto& r : rows)
    out << r.solver << ',' << snr_field(r.snr_db) << ',' << io::format_double(r.nmse) << '\n';
}

inline io::json records_json(const std::vector<ResultRecord>& records) {
  io::json arr = io::json::array();
  for (const auto& r : records) {
    io::json j{{"solver", r.solver}, {"sample", r.sample}, {"seed", r.seed}};
    j["snr_db"] = r.snr_db ? io::json(*r.snr_db) : io::json(nullptr);
    j["nse"] = r.nse;
    j["outer_iters"] = r.outer_iters;
    j["inner_iters"] = r.inner_iters;
    j["wall_s"] = r.wall_s;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline io::json summary_json(const std::vector<SummaryRow>& rows) {
  io::json arr = io::json::array();
  for (const auto& r : rows) {
    io::json j{{"solver", r.solver}};
    j["snr_db"] = r.snr_db ? io::json(*r.snr_db) : io::json(nullptr);
    j["nmse"] = r.nmse;
    j["samples"] = r.samples;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline io::json config_json(const ExperimentConfig& cfg, std::uint64_t matrix_seed_value) {
  io::json solvers = io::json::array();
  for (auto s : cfg.solvers) solvers.push_back(std::string(solver_name(s)));
  io::json j{{"n_antennas", cfg.n_antennas},
             {"sparsity", cfg.sparsity},
             {"m", cfg.m_measurements},
             {"k", cfg.k()}};
  j["rho"] = cfg.rho_rule.fixed ? io::json(*cfg.rho_rule.fixed) : io::json("auto");
  j["rho_fraction"] = cfg.rho_rule.fraction;
  j["rho_noise_factor"] = cfg.rho_rule.noise_factor;
  j["snr_grid"] = cfg.snr_grid_db;
  j["samples"] = cfg.num_samples;
  j["seed"] = cfg.base_seed;
  j["matrix_seed"] = matrix_seed_value;
  j["solvers"] = solvers;
  const SolverOptions& o = cfg.solver_options;
  j["solver_options"] = io::json{{"outer_tol", o.outer_tol},   {"outer_max", o.outer_max},
                                 {"inner_tol", o.inner_tol},   {"inner_max", o.inner_max},
                                 {"alpha_min", o.alpha_min},   {"alpha_max", o.alpha_max},
                                 {"lipschitz_margin", o.lipschitz_margin}};
  return j;
}

/// File stem shared by the trace and vector files of one cell.
inline std::string cell_stem(const std::optional<double>& snr_db, std::size_t snr_index,
                             int sample) {
  char buf[64];
  if (snr_db)
    std::snprintf(buf, sizeof buf, "snr%zu_s%04d", snr_index, sample);
  else
    std::snprintf(buf, sizeof buf, "noiseless_s%04d", sample);
  return buf;
}

/// Sink writing traces/<solver>/<stem>.{csv|json} and, when enabled,
/// vectors/x_true/<stem>.csv and vectors/<solver>/<stem>.csv.
inline CellSink file_sink(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                          OutputFormat format) {
  return [dir, cfg, format](const CellRun& run) {
    const std::string stem = cell_stem(run.record.snr_db, run.snr_index, run.sample);
    const std::string solver(solver_name(run.solver));
    if (cfg.write_traces) {
      if (format == OutputFormat::json) {
        io::json j = io::result_json(run.result, run.problem, run.record.nse);
        j["trace"] = io::trace_json(run.result.trace);
        io::save_json(dir / "traces" / solver / (stem + ".json"), j);
      } else {
        auto out = io::open_out(dir / "traces" / solver / (stem + ".csv"));
        io::write_trace_csv(out, run.result.trace);
      }
    }
    if (cfg.write_vectors) {
      if (run.solver == cfg.solvers.front())
        io::save_vector(dir / "vectors" / "x_true" / (stem + ".csv"), "x_true",
                        run.channel.x_real);
      io::save_vector(dir / "vectors" / solver / (stem + ".csv"), "x_hat", run.result.x_hat);
    }
  };
}

/// records.csv, summary.csv and config.json (plus records.json and
/// summary.json for the json format).
inline void write_study(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                        const StudyResult& study, OutputFormat format) {
  {
    auto out = io::open_out(dir / "records.csv");
    write_records_csv(out, study.records);
  }
  {
    auto out = io::open_out(dir / "summary.csv");
    write_summary_csv(out, study.summary);
  }
  io::save_json(dir / "config.json", config_json(cfg, study.matrix_seed));
  if (format == OutputFormat::json) {
    io::save_json(dir / "records.json", records_json(study.records));
    io::save_json(dir / "summary.json", summary_json(study.summary));
  }
}

}  // namespace dcgpsr
