#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stopdet/kernels.hpp"

namespace stopdet::bench {

enum class Algo { full, rowwise, blocked, pivoted };

std::string algo_name(Algo a);
Algo parse_algo(const std::string& name);

struct RunConfig {
  // Dataset source: a CSV path plus schema, or synthetic Gaussian inputs
  // when data_path is empty.
  std::string data_path;
  std::string schema_path;
  bool header = false;
  bool pre_clean = false;
  std::size_t synth_n = 0;
  std::size_t synth_dim = 0;

  KernelFamily kernel = KernelFamily::rbf;
  double theta = 1.0;
  std::vector<double> lengthscales{1.0};
  double sigma2 = 0.001;
  double delta = 0.1;
  std::vector<double> r_grid;          // stopped-run targets (unpaired mode)
  std::vector<double> d_grid;          // pivoted diagonal tolerances
  std::size_t permutations = 10;
  std::size_t block_size = 0;          // 0 = auto
  std::size_t threads = 0;             // 0 = hardware
  std::vector<Algo> algos{Algo::full};
  std::uint64_t seed = 0;
};

struct RunRecord {
  std::string dataset;
  std::string algo;
  std::string kernel;
  double theta = 0.0;
  double lengthscale = 0.0;
  double sigma2 = 0.0;
  double delta = 0.0;
  double r_target = 0.0;               // NaN when not applicable
  double d_tol = 0.0;                  // NaN unless pivoted
  std::size_t permutation = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t block_size = 0;
  bool stopped = false;
  std::size_t stop_index = 0;
  double estimate = 0.0;
  std::optional<double> reference;     // exact log-det from the paired full run
  std::optional<double> rel_error;
  double wall_seconds = 0.0;
  double cpu_seconds = 0.0;
  double m = 0.0;                      // wall / mean(full wall), NaN without full runs
  std::optional<double> paired_r;      // pivoted guaranteed precision (paired runs)
  bool warn_r_ge_1 = false;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

std::vector<RunRecord> run_sweep(const RunConfig& cfg);

enum class ReportFormat { csv, jsonl };

// Documented column order; see report_columns().
const std::vector<std::string>& report_columns();

void emit_report(const std::vector<RunRecord>& records, const std::string& path,
                 ReportFormat format);

// Reads back a JSON-lines report (round-trip helper).
std::vector<RunRecord> parse_jsonl(const std::string& path);

}  // namespace stopdet::bench
