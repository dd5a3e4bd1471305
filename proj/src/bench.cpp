#include "stopdet/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stopdet/bounds.hpp"
#include "stopdet/cholesky.hpp"
#include "stopdet/data.hpp"
#include "stopdet/errors.hpp"
#include "stopdet/pivoted.hpp"
#include "stopdet/rng.hpp"

namespace stopdet::bench {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Timed {
  double wall = 0.0;
  double cpu = 0.0;
};

template <typename Fn>
auto timed(Timed& t, Fn&& fn) {
  const auto wall0 = std::chrono::steady_clock::now();
  const std::clock_t cpu0 = std::clock();
  auto result = fn();
  t.cpu = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
  t.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return result;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

bool contains(const std::vector<Algo>& algos, Algo a) {
  return std::find(algos.begin(), algos.end(), a) != algos.end();
}

std::vector<double> parse_grid(const std::string& value) {
  std::vector<double> grid;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    grid.push_back(std::stod(item));
  }
  return grid;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config: expected boolean, got '" + value + "'");
}

}  // namespace

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::full:
      return "full";
    case Algo::rowwise:
      return "rowwise";
    case Algo::blocked:
      return "blocked";
    case Algo::pivoted:
      return "pivoted";
  }
  return "unknown";
}

Algo parse_algo(const std::string& name) {
  if (name == "full") return Algo::full;
  if (name == "rowwise") return Algo::rowwise;
  if (name == "blocked") return Algo::blocked;
  if (name == "pivoted") return Algo::pivoted;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  cfg.lengthscales.clear();
  cfg.algos.clear();
  std::stringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = true;
      for (const char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
      }
      if (blank) continue;
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    auto strip = [](std::string s) {
      const auto lo = s.find_first_not_of(" \t\r");
      const auto hi = s.find_last_not_of(" \t\r");
      return lo == std::string::npos ? std::string() : s.substr(lo, hi - lo + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) continue;

    if (key == "data") {
      cfg.data_path = value;
    } else if (key == "schema") {
      cfg.schema_path = value;
    } else if (key == "header") {
      cfg.header = parse_bool(value);
    } else if (key == "pre_clean") {
      cfg.pre_clean = parse_bool(value);
    } else if (key == "n") {
      cfg.synth_n = std::stoull(value);
    } else if (key == "dim") {
      cfg.synth_dim = std::stoull(value);
    } else if (key == "kernel") {
      if (value == "rbf") {
        cfg.kernel = KernelFamily::rbf;
      } else if (value == "ou") {
        cfg.kernel = KernelFamily::ou;
      } else {
        throw std::invalid_argument("config: unknown kernel '" + value + "'");
      }
    } else if (key == "theta") {
      cfg.theta = std::stod(value);
    } else if (key == "lengthscale") {
      cfg.lengthscales = parse_grid(value);
    } else if (key == "sigma2") {
      cfg.sigma2 = std::stod(value);
    } else if (key == "delta") {
      cfg.delta = std::stod(value);
    } else if (key == "r") {
      cfg.r_grid = parse_grid(value);
    } else if (key == "d") {
      cfg.d_grid = parse_grid(value);
    } else if (key == "permutations") {
      cfg.permutations = std::stoull(value);
    } else if (key == "block_size") {
      cfg.block_size = std::stoull(value);
    } else if (key == "threads") {
      cfg.threads = std::stoull(value);
    } else if (key == "algos") {
      std::stringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        if (!item.empty()) cfg.algos.push_back(parse_algo(item));
      }
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (cfg.lengthscales.empty()) cfg.lengthscales.push_back(1.0);
  if (cfg.algos.empty()) cfg.algos.push_back(Algo::full);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

// The pivoted baseline's default diagonal-tolerance sweep.
const std::vector<double> kDefaultDiagGrid{0.001, 0.005, 0.01, 0.05, 0.1, 0.5};

struct SweepContext {
  const RunConfig& cfg;
  std::string dataset_label;
  std::size_t n = 0;
  std::size_t dim = 0;
  BlockPlan plan;
};

RunRecord base_record(const SweepContext& ctx, double lengthscale, std::size_t perm,
                      std::uint64_t perm_seed) {
  RunRecord rec;
  rec.dataset = ctx.dataset_label;
  rec.kernel = ctx.cfg.kernel == KernelFamily::rbf ? "rbf" : "ou";
  rec.theta = ctx.cfg.theta;
  rec.lengthscale = lengthscale;
  rec.sigma2 = ctx.cfg.sigma2;
  rec.delta = ctx.cfg.delta;
  rec.r_target = kNan;
  rec.d_tol = kNan;
  rec.permutation = perm;
  rec.seed = perm_seed;
  rec.n = ctx.n;
  rec.dim = ctx.dim;
  rec.block_size = ctx.plan.resolved_block();
  rec.m = kNan;
  return rec;
}

RunRecord run_stopped(const SweepContext& ctx, const SymMatrix& a, Algo algo,
                      const StoppingConfig& stop_cfg, RunRecord rec) {
  rec.algo = algo_name(algo);
  rec.r_target = stop_cfg.r;
  rec.warn_r_ge_1 = stop_cfg.r_exceeds_unity;
  SymMatrix work(a);
  Timed t;
  const StopOutcome outcome = timed(t, [&] {
    return algo == Algo::rowwise ? stopped_cholesky_rowwise(work, stop_cfg)
                                 : stopped_cholesky_blocked(work, ctx.plan, stop_cfg);
  });
  rec.wall_seconds = t.wall;
  rec.cpu_seconds = t.cpu;
  if (const auto* s = std::get_if<Stopped>(&outcome)) {
    rec.stopped = true;
    rec.stop_index = s->tau;
    rec.estimate = s->estimate;
  } else {
    const auto& c = std::get<Completed>(outcome);
    rec.stopped = false;
    rec.stop_index = c.rows_processed;
    rec.estimate = c.log_det;
  }
  return rec;
}

}  // namespace

std::vector<RunRecord> run_sweep(const RunConfig& cfg) {
  if (cfg.permutations == 0) {
    throw std::invalid_argument("run_sweep: permutation count must be positive");
  }
  if (cfg.algos.empty()) throw std::invalid_argument("run_sweep: no algorithms selected");

  Dataset base;
  std::string label;
  if (cfg.data_path.empty()) {
    if (cfg.synth_n == 0 || cfg.synth_dim == 0) {
      throw std::invalid_argument("run_sweep: synthetic source needs n and dim");
    }
    base = synth_gaussian(cfg.synth_n, cfg.synth_dim, cfg.seed);
    label = "synthetic";
  } else {
    if (cfg.schema_path.empty()) {
      throw std::invalid_argument("run_sweep: CSV source needs a schema");
    }
    const auto schema = load_schema(cfg.schema_path);
    CsvOptions opts;
    opts.header = cfg.header;
    opts.pre_clean = cfg.pre_clean;
    base = standardize(one_hot(load_csv(cfg.data_path, schema, opts)));
    label = cfg.data_path;
  }

  SweepContext ctx{cfg, label, base.points.size(), base.points.dim(),
                   BlockPlan{cfg.block_size, cfg.threads}};

  const bool paired = contains(cfg.algos, Algo::pivoted);
  const std::vector<double>& tolerances =
      paired ? (cfg.d_grid.empty() ? kDefaultDiagGrid : cfg.d_grid) : cfg.r_grid;
  const bool has_stopped =
      contains(cfg.algos, Algo::rowwise) || contains(cfg.algos, Algo::blocked);
  if (!paired && has_stopped && tolerances.empty()) {
    throw std::invalid_argument("run_sweep: stopped algorithms need an r grid");
  }

  const double kplus = [&] {
    KernelSpec probe{cfg.kernel, cfg.theta, cfg.lengthscales.front()};
    return kappa_plus(probe, cfg.sigma2);
  }();

  std::vector<RunRecord> records;
  for (const double lengthscale : cfg.lengthscales) {
    const KernelSpec spec{cfg.kernel, cfg.theta, lengthscale};
    const std::size_t group_begin = records.size();
    std::vector<std::size_t> full_index(cfg.permutations, static_cast<std::size_t>(-1));

    for (std::size_t perm = 0; perm < cfg.permutations; ++perm) {
      const std::uint64_t perm_seed = derive_seed(cfg.seed, perm);
      const Dataset ds = permute(base, perm_seed);
      AssembleOptions assemble_opts;
      assemble_opts.threads = ctx.plan.resolved_threads();
      const SymMatrix a = assemble_matrix(ds.points, spec, cfg.sigma2, assemble_opts);

      if (perm == 0) {
        // Warm-up, excluded from every timing in this group.
        SymMatrix warm(a);
        cholesky_full(warm, ctx.plan);
      }

      if (contains(cfg.algos, Algo::full)) {
        RunRecord rec = base_record(ctx, lengthscale, perm, perm_seed);
        rec.algo = algo_name(Algo::full);
        SymMatrix work(a);
        Timed t;
        timed(t, [&] {
          cholesky_full(work, ctx.plan);
          return 0;
        });
        rec.wall_seconds = t.wall;
        rec.cpu_seconds = t.cpu;
        rec.stopped = false;
        rec.stop_index = ctx.n;
        rec.estimate = log_det_from_factor(work);
        full_index[perm] = records.size();
        records.push_back(rec);
      }

      for (const double tol : tolerances) {
        std::optional<double> paired_r;
        if (paired) {
          RunRecord rec = base_record(ctx, lengthscale, perm, perm_seed);
          rec.algo = algo_name(Algo::pivoted);
          rec.d_tol = tol;
          PivotedOptions opts;
          opts.diag_tol = tol;
          Timed t;
          const PivotedOutcome outcome =
              timed(t, [&] { return pivoted_cholesky(a, cfg.sigma2, opts); });
          rec.wall_seconds = t.wall;
          rec.cpu_seconds = t.cpu;
          rec.stopped = outcome.reason != PivotStopReason::completed;
          rec.stop_index = outcome.rank;
          rec.estimate = outcome.estimate;
          const GuaranteedPrecision gp = guaranteed_precision_at_stop(outcome);
          paired_r = gp.value;
          rec.paired_r = gp.value;
          rec.warn_r_ge_1 = gp.value >= 1.0;
          records.push_back(rec);
        }

        if (has_stopped) {
          const double r_target = paired ? std::max(*paired_r, 1e-12) : tol;
          const StoppingConfig stop_cfg =
              make_config(ctx.n, cfg.sigma2, cfg.delta, r_target, kplus);
          for (const Algo algo : {Algo::rowwise, Algo::blocked}) {
            if (!contains(cfg.algos, algo)) continue;
            RunRecord rec = run_stopped(ctx, a, algo, stop_cfg,
                                        base_record(ctx, lengthscale, perm, perm_seed));
            rec.paired_r = paired_r;
            records.push_back(rec);
          }
        }
      }
    }

    // Metric m against the mean full-Cholesky time of this group, plus the
    // exact reference for every record whose permutation has a full run.
    double full_sum = 0.0;
    std::size_t full_count = 0;
    for (std::size_t i = group_begin; i < records.size(); ++i) {
      if (records[i].algo == "full") {
        full_sum += records[i].wall_seconds;
        ++full_count;
      }
    }
    const double mean_full = full_count > 0 ? full_sum / full_count : kNan;
    for (std::size_t i = group_begin; i < records.size(); ++i) {
      RunRecord& rec = records[i];
      rec.m = rec.wall_seconds / mean_full;
      const std::size_t fi = full_index[rec.permutation];
      if (fi != static_cast<std::size_t>(-1) && rec.algo != "full") {
        rec.reference = records[fi].estimate;
        rec.rel_error = std::abs(*rec.reference - rec.estimate) / std::abs(*rec.reference);
      }
    }
  }
  return records;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> columns{
      "dataset",    "algo",       "kernel",     "theta",      "lengthscale",
      "sigma2",     "delta",      "r_target",   "d_tol",      "permutation",
      "seed",       "n",          "dim",        "block_size", "stopped",
      "stop_index", "estimate",   "reference",  "rel_error",  "wall_seconds",
      "cpu_seconds", "m",         "paired_r",   "warn_r_ge_1"};
  return columns;
}

namespace {

nlohmann::ordered_json record_to_json(const RunRecord& rec) {
  nlohmann::ordered_json j;
  j["dataset"] = rec.dataset;
  j["algo"] = rec.algo;
  j["kernel"] = rec.kernel;
  j["theta"] = rec.theta;
  j["lengthscale"] = rec.lengthscale;
  j["sigma2"] = rec.sigma2;
  j["delta"] = rec.delta;
  j["r_target"] = rec.r_target;
  j["d_tol"] = rec.d_tol;
  j["permutation"] = rec.permutation;
  j["seed"] = rec.seed;
  j["n"] = rec.n;
  j["dim"] = rec.dim;
  j["block_size"] = rec.block_size;
  j["stopped"] = rec.stopped;
  j["stop_index"] = rec.stop_index;
  j["estimate"] = rec.estimate;
  if (rec.reference.has_value()) {
    j["reference"] = *rec.reference;
  } else {
    j["reference"] = nullptr;
  }
  if (rec.rel_error.has_value()) {
    j["rel_error"] = *rec.rel_error;
  } else {
    j["rel_error"] = nullptr;
  }
  j["wall_seconds"] = rec.wall_seconds;
  j["cpu_seconds"] = rec.cpu_seconds;
  j["m"] = rec.m;
  if (rec.paired_r.has_value()) {
    j["paired_r"] = *rec.paired_r;
  } else {
    j["paired_r"] = nullptr;
  }
  j["warn_r_ge_1"] = rec.warn_r_ge_1;
  return j;
}

std::string csv_cell(double v) { return std::isnan(v) ? "nan" : fmt(v); }

}  // namespace

void emit_report(const std::vector<RunRecord>& records, const std::string& path,
                 ReportFormat format) {
  if (records.empty()) throw std::invalid_argument("emit_report: no records");
  std::ofstream out(path);
  if (!out) throw IoError("emit_report: cannot open " + path + " for writing");

  if (format == ReportFormat::csv) {
    const auto& columns = report_columns();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    }
    for (const RunRecord& rec : records) {
      out << rec.dataset << ',' << rec.algo << ',' << rec.kernel << ',' << fmt(rec.theta)
          << ',' << fmt(rec.lengthscale) << ',' << fmt(rec.sigma2) << ',' << fmt(rec.delta)
          << ',' << csv_cell(rec.r_target) << ',' << csv_cell(rec.d_tol) << ','
          << rec.permutation << ',' << rec.seed << ',' << rec.n << ',' << rec.dim << ','
          << rec.block_size << ',' << (rec.stopped ? "true" : "false") << ','
          << rec.stop_index << ',' << fmt(rec.estimate) << ','
          << (rec.reference ? fmt(*rec.reference) : "") << ','
          << (rec.rel_error ? fmt(*rec.rel_error) : "") << ',' << fmt(rec.wall_seconds)
          << ',' << fmt(rec.cpu_seconds) << ',' << csv_cell(rec.m) << ','
          << (rec.paired_r ? fmt(*rec.paired_r) : "") << ','
          << (rec.warn_r_ge_1 ? "true" : "false") << '\n';
    }
  } else {
    for (const RunRecord& rec : records) out << record_to_json(rec).dump() << '\n';
  }
  if (!out) throw IoError("emit_report: write to " + path + " failed");
}

std::vector<RunRecord> parse_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_jsonl: cannot open " + path);
  std::vector<RunRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    RunRecord rec;
    rec.dataset = j.at("dataset").get<std::string>();
    rec.algo = j.at("algo").get<std::string>();
    rec.kernel = j.at("kernel").get<std::string>();
    rec.theta = j.at("theta").get<double>();
    rec.lengthscale = j.at("lengthscale").get<double>();
    rec.sigma2 = j.at("sigma2").get<double>();
    rec.delta = j.at("delta").get<double>();
    auto as_double = [&](const char* key) {
      return j.at(key).is_null() ? kNan : j.at(key).get<double>();
    };
    rec.r_target = as_double("r_target");
    rec.d_tol = as_double("d_tol");
    rec.permutation = j.at("permutation").get<std::size_t>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.n = j.at("n").get<std::size_t>();
    rec.dim = j.at("dim").get<std::size_t>();
    rec.block_size = j.at("block_size").get<std::size_t>();
    rec.stopped = j.at("stopped").get<bool>();
    rec.stop_index = j.at("stop_index").get<std::size_t>();
    rec.estimate = j.at("estimate").get<double>();
    if (!j.at("reference").is_null()) rec.reference = j.at("reference").get<double>();
    if (!j.at("rel_error").is_null()) rec.rel_error = j.at("rel_error").get<double>();
    rec.wall_seconds = j.at("wall_seconds").get<double>();
    rec.cpu_seconds = j.at("cpu_seconds").get<double>();
    rec.m = as_double("m");
    if (!j.at("paired_r").is_null()) rec.paired_r = j.at("paired_r").get<double>();
    rec.warn_r_ge_1 = j.at("warn_r_ge_1").get<bool>();
    records.push_back(rec);
  }
  return records;
}

}  // namespace stopdet::bench
