// dcgpsr: generate instances, solve them, run benchmarks and the l0 oracle.
//
// Exit status: 0 success, 1 invalid input/usage, 2 numerical failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dcgpsr/harness.hpp"

namespace fs = std::filesystem;
using namespace dcgpsr;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";

  OutputFormat output_format() const {
    return format == "json" ? OutputFormat::json : OutputFormat::csv;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config file (key=value)");
  cmd->add_option("--seed", c.seed, "Base seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig load_common_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.base_seed = *c.seed;
  return cfg;
}

void print(const io::json& j, OutputFormat fmt) {
  if (fmt == OutputFormat::json) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : j.items())
    std::cout << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::optional<int> n, sparsity, m;
  std::optional<double> snr_db;
};

int run_generate(const GenerateArgs& a) {
  ExperimentConfig cfg = load_common_config(a.common);
  if (a.n) cfg.n_antennas = *a.n;
  if (a.sparsity) cfg.sparsity = *a.sparsity;
  if (a.m) cfg.m_measurements = *a.m;
  cfg.validate();
  if (a.common.out.empty()) throw InvalidInput("generate: --out is required");
  const fs::path dir = a.common.out;

  const MeasurementMatrix phi = experiment_matrix(cfg);
  Rng rng(cell_seed(cfg.base_seed, 0, 0));
  const ChannelSample ch = sample_sparse_channel(cfg.n_antennas, cfg.sparsity, rng);
  const Eigen::VectorXd clean = measure(phi, ch.x_real);
  const double sigma = a.snr_db ? snr_to_sigma(ch.x_real, phi.m(), *a.snr_db) : 0.0;
  const NoisySystem sys = add_noise(clean, sigma, rng, a.snr_db);

  io::save_channel(dir, ch);
  io::save_matrix(dir / "phi", phi);
  io::save_vector(dir / "y.csv", "y", sys.y);
  io::json info{{"seed", cfg.base_seed},
                {"channel_seed", ch.seed},
                {"matrix_seed", phi.seed},
                {"n_antennas", cfg.n_antennas},
                {"sparsity", cfg.sparsity},
                {"m", cfg.m_measurements},
                {"k", cfg.k()},
                {"sigma", sys.sigma}};
  info["snr_db"] = sys.snr_db ? io::json(*sys.snr_db) : io::json(nullptr);
  info["out"] = dir.string();
  io::save_json(dir / "instance.json", info);
  print(info, a.common.output_format());
  return 0;
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
  Common common;
  std::string phi_path, y_path, truth_path;
  std::string solver = "dc_gpsr";
  std::string rho = "auto";
  std::optional<int> k;
  double sigma = 0.0;
};

int run_solve(const SolveArgs& a) {
  ExperimentConfig cfg = load_common_config(a.common);
  const auto kind = parse_solver(a.solver);
  if (!kind) throw InvalidInput("solve: unknown solver '" + a.solver + "'");

  auto phi = std::make_shared<const MeasurementMatrix>(io::load_matrix(a.phi_path));
  const Eigen::VectorXd y = io::load_vector(a.y_path);
  if (y.size() != phi->m())
    throw InvalidDimension("solve: y has length " + std::to_string(y.size()) +
                           " but Phi is " + std::to_string(phi->m()) + "x" +
                           std::to_string(phi->n()) + " (needs length " +
                           std::to_string(phi->m()) + ")");
  std::optional<Eigen::VectorXd> truth;
  if (!a.truth_path.empty()) {
    truth = io::load_vector(a.truth_path);
    if (truth->size() != phi->n())
      throw InvalidDimension("solve: truth has length " + std::to_string(truth->size()) +
                             " but Phi has " + std::to_string(phi->n()) + " columns");
  }

  double rho = 0.0;
  if (a.rho == "auto") {
    rho = auto_rho(phi->phi, y, a.sigma, cfg.rho_rule.fraction, cfg.rho_rule.noise_factor);
  } else {
    rho = detail::parse_real("rho", a.rho);
  }
  const int k = a.k ? *a.k : cfg.k();
  const SparseProblem p(phi, y, k, rho);
  const ReconResult res = run_solver(*kind, p, cfg.solver_options, truth);

  std::optional<double> nse;
  if (truth) nse = normalized_sq_error(*truth, res.x_hat);
  io::json summary{{"solver", a.solver}, {"m", p.m()}, {"n", p.n()}};
  summary.update(io::result_json(res, p, nse));

  if (!a.common.out.empty()) {
    const fs::path dir = a.common.out;
    io::save_vector(dir / "x_hat.csv", "x_hat", res.x_hat);
    io::save_json(dir / "result.json", summary);
    if (a.common.output_format() == OutputFormat::json) {
      io::save_json(dir / "trace.json", io::trace_json(res.trace));
    } else {
      auto out = io::open_out(dir / "trace.csv");
      io::write_trace_csv(out, res.trace);
    }
  }
  print(summary, a.common.output_format());
  return 0;
}

// ---- bench -----------------------------------------------------------------

int run_bench(const Common& c) {
  if (c.config.empty()) throw InvalidInput("bench: --config is required");
  const ExperimentConfig cfg = load_common_config(c);
  const OutputFormat fmt = c.output_format();
  CellSink sink;
  if (!c.out.empty()) sink = file_sink(c.out, cfg, fmt);
  const StudyResult study = run_experiment(cfg, sink);
  if (!c.out.empty()) write_study(c.out, cfg, study, fmt);
  if (fmt == OutputFormat::json)
    std::cout << summary_json(study.summary).dump(2) << '\n';
  else
    write_summary_csv(std::cout, study.summary);
  return 0;
}

// ---- oracle ----------------------------------------------------------------

struct OracleArgs {
  Common common;
  std::string phi_path, y_path;
  int k = 2;
  int n = 12, m = 8, trials = 50;
};

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& x) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) != 0.0) s.push_back(i);
  return s;
}

int run_oracle(const OracleArgs& a) {
  const OutputFormat fmt = a.common.output_format();
  if (!a.phi_path.empty() || !a.y_path.empty()) {
    if (a.phi_path.empty() || a.y_path.empty())
      throw InvalidInput("oracle: --phi and --y must be given together");
    const MeasurementMatrix phi = io::load_matrix(a.phi_path);
    const Eigen::VectorXd y = io::load_vector(a.y_path);
    const Eigen::VectorXd x = brute_force_l0(y, phi, a.k);
    io::json j{{"k", a.k}, {"support", support_of(x)},
               {"residual", (y - phi.phi * x).norm()}};
    if (!a.common.out.empty()) io::save_vector(fs::path(a.common.out) / "x_l0.csv", "x_l0", x);
    print(j, fmt);
    return 0;
  }

  // Random tiny noiseless instances: DC-GPSR support against the oracle.
  if (a.n < 1 || a.m < 1 || a.trials < 1) throw InvalidInput("oracle: n, m and trials must be >= 1");
  if (a.k < 1 || a.k > a.n) throw InvalidInput("oracle: k must lie in [1, n]");
  const std::uint64_t base = a.common.seed.value_or(42);
  int agree = 0;
  for (int t = 0; t < a.trials; ++t) {
    const RandomInstance inst =
        random_sparse_instance(a.m, a.n, a.k, hash64(base, static_cast<std::uint64_t>(t), 0));
    const SparseProblem p(inst.phi, inst.y, a.k, default_rho(inst.phi->phi, inst.y));
    const ReconResult dc = dc_gpsr(p);
    const Eigen::VectorXd l0 = brute_force_l0(inst.y, *inst.phi, a.k);
    if (support_of(dc.x_hat) == support_of(l0)) ++agree;
  }
  io::json j{{"trials", a.trials}, {"n", a.n}, {"m", a.m}, {"k", a.k}, {"seed", base},
             {"support_agreement", agree}};
  print(j, fmt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DC-GPSR sparse recovery toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a channel sample, matrix and measurements");
  add_common(generate, gen.common);
  generate->add_option("--n", gen.n, "Antennas (complex length)");
  generate->add_option("--sparsity", gen.sparsity, "Nonzero complex angular entries");
  generate->add_option("--m", gen.m, "Measurements");
  generate->add_option("--snr", gen.snr_db, "SNR in dB (noiseless when absent)");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Solve one instance read from files");
  add_common(solve, sol.common);
  solve->add_option("--phi", sol.phi_path, "Matrix CSV")->required();
  solve->add_option("--y", sol.y_path, "Measurement vector CSV")->required();
  solve->add_option("--truth", sol.truth_path, "Ground-truth vector CSV");
  solve->add_option("--solver", sol.solver, "dc_gpsr|dc_proximal|gpsr|ista|omp");
  solve->add_option("--k", sol.k, "Sparsity bound K");
  solve->add_option("--rho", sol.rho, "auto or a positive number");
  solve->add_option("--sigma", sol.sigma, "Noise level used by rho=auto");

  Common bench_args;
  auto* bench = app.add_subcommand("bench", "Run a configured experiment end to end");
  add_common(bench, bench_args);

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive l0 search on tiny instances");
  add_common(oracle, orc.common);
  oracle->add_option("--phi", orc.phi_path, "Matrix CSV");
  oracle->add_option("--y", orc.y_path, "Measurement vector CSV");
  oracle->add_option("--k", orc.k, "Sparsity bound");
  oracle->add_option("--n", orc.n, "Signal length for random trials");
  oracle->add_option("--m", orc.m, "Measurements for random trials");
  oracle->add_option("--trials", orc.trials, "Random trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    const auto subs = app.get_subcommands();
    std::cerr << '\n' << (subs.empty() ? app.help() : subs.back()->help());
    return 1;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*solve) return run_solve(sol);
    if (*bench) return run_bench(bench_args);
    if (*oracle) return run_oracle(orc);
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
