#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <string>

#include "stopdet/bench.hpp"
#include "stopdet/bounds.hpp"
#include "stopdet/cholesky.hpp"
#include "stopdet/data.hpp"
#include "stopdet/errors.hpp"
#include "stopdet/kernels.hpp"
#include "stopdet/pivoted.hpp"
#include "stopdet/rng.hpp"
#include "stopdet/simd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct EstimateArgs {
  std::string data;
  std::string schema;
  bool header = false;
  bool pre_clean = false;
  std::string kernel = "rbf";
  double theta = 1.0;
  double lengthscale = 1.0;
  double sigma2 = 0.001;
  double delta = 0.1;
  double r = 0.1;
  std::string algo = "blocked";
  std::size_t block_size = 0;
  std::size_t threads = 0;
  double pivot_tol = 0.01;
  std::uint64_t seed = 0;
};

int run_estimate(const EstimateArgs& args) {
  using namespace stopdet;

  const auto schema = load_schema(args.schema);
  CsvOptions csv_opts;
  csv_opts.header = args.header;
  csv_opts.pre_clean = args.pre_clean;
  Dataset ds = standardize(one_hot(load_csv(args.data, schema, csv_opts)));
  ds = permute(ds, args.seed);

  KernelSpec spec;
  spec.family = args.kernel == "ou" ? KernelFamily::ou : KernelFamily::rbf;
  spec.theta = args.theta;
  spec.lengthscale = args.lengthscale;

  const std::size_t n = ds.points.size();
  const BlockPlan plan{args.block_size, args.threads};
  AssembleOptions assemble_opts;
  assemble_opts.threads = plan.resolved_threads();
  SymMatrix a = assemble_matrix(ds.points, spec, args.sigma2, assemble_opts);

  nlohmann::ordered_json out;
  out["algo"] = args.algo;
  out["n"] = n;
  out["dim"] = ds.points.dim();
  out["kernel"] = args.kernel;
  out["theta"] = args.theta;
  out["lengthscale"] = args.lengthscale;
  out["sigma2"] = args.sigma2;
  out["delta"] = args.delta;
  out["r"] = args.r;
  out["seed"] = args.seed;
  out["simd"] = std::string(simd::isa_name(simd::active_isa()));

  const auto wall0 = std::chrono::steady_clock::now();
  if (args.algo == "full") {
    cholesky_full(a, plan);
    out["outcome"] = "completed";
    out["log_det"] = stopdet::log_det_from_factor(a);
    out["stop_index"] = n;
  } else if (args.algo == "pivoted") {
    PivotedOptions opts;
    opts.diag_tol = args.pivot_tol;
    const PivotedOutcome outcome = pivoted_cholesky(a, args.sigma2, opts);
    out["outcome"] = outcome.reason == PivotStopReason::completed ? "completed" : "stopped";
    out["stop_index"] = outcome.rank;
    out["estimate"] = outcome.estimate;
    out["lower"] = outcome.lower;
    out["upper"] = outcome.upper;
    const GuaranteedPrecision gp = guaranteed_precision_at_stop(outcome);
    out["guaranteed_r"] = gp.value;
    out["guaranteed_r_defined"] = gp.defined;
    out["pivot_tol"] = args.pivot_tol;
  } else {
    const StoppingConfig cfg = make_config(n, args.sigma2, args.delta, args.r,
                                           kappa_plus(spec, args.sigma2));
    if (cfg.r_exceeds_unity) out["warn_r_ge_1"] = true;
    const StopOutcome outcome = args.algo == "rowwise"
                                    ? stopped_cholesky_rowwise(a, cfg)
                                    : stopped_cholesky_blocked(a, plan, cfg);
    if (const auto* s = std::get_if<Stopped>(&outcome)) {
      out["outcome"] = "stopped";
      out["stop_index"] = s->tau;
      out["estimate"] = s->estimate;
      out["lower"] = s->lower;
      out["upper"] = s->upper;
    } else {
      const auto& c = std::get<Completed>(outcome);
      out["outcome"] = "completed";
      out["stop_index"] = c.rows_processed;
      out["log_det"] = c.log_det;
    }
  }
  out["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-determinant estimation for kernel matrices via stopped Cholesky"};
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand("estimate", "Run one factorization on a CSV dataset");
  estimate->add_option("--data", est.data, "CSV input file")->required();
  estimate->add_option("--schema", est.schema, "Schema file (numeric|categorical per line)")
      ->required();
  estimate->add_flag("--header", est.header, "CSV has a header row");
  estimate->add_flag("--pre-clean", est.pre_clean, "Strip quotes and collapse blanks");
  estimate->add_option("--kernel", est.kernel, "Kernel family")
      ->check(CLI::IsMember({"rbf", "ou"}));
  estimate->add_option("--theta", est.theta, "Signal variance");
  estimate->add_option("--lengthscale", est.lengthscale, "Kernel lengthscale");
  estimate->add_option("--sigma2", est.sigma2, "Noise variance");
  estimate->add_option("--delta", est.delta, "Failure probability");
  estimate->add_option("--r", est.r, "Target relative precision");
  estimate->add_option("--algo", est.algo, "Algorithm")
      ->check(CLI::IsMember({"full", "rowwise", "blocked", "pivoted"}));
  estimate->add_option("--block-size", est.block_size, "Block size (0 = auto)");
  estimate->add_option("--threads", est.threads, "Worker threads (0 = hardware)");
  estimate->add_option("--pivot-tol", est.pivot_tol, "Pivoted diagonal tolerance");
  estimate->add_option("--seed", est.seed, "Permutation seed");

  std::string bench_config;
  std::string bench_out;
  std::string bench_format = "csv";
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a parameter sweep from a config file");
  bench_cmd->add_option("--config", bench_config, "key=value config file")->required();
  bench_cmd->add_option("--out", bench_out, "Report output path")->required();
  bench_cmd->add_option("--format", bench_format, "Report format")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) return run_estimate(est);
    if (bench_cmd->parsed()) {
      const auto cfg = stopdet::bench::parse_config_file(bench_config);
      const auto records = stopdet::bench::run_sweep(cfg);
      stopdet::bench::emit_report(records, bench_out,
                                  bench_format == "csv"
                                      ? stopdet::bench::ReportFormat::csv
                                      : stopdet::bench::ReportFormat::jsonl);
      std::cout << records.size() << " records written to " << bench_out << '\n';
      return kExitOk;
    }
  } catch (const stopdet::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const stopdet::FactorizationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
