#ifndef PHASERET_BENCHMARK_HPP
#define PHASERET_BENCHMARK_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "phaseret/file_util.hpp"
#include "phaseret/initializers.hpp"
#include "phaseret/metrics.hpp"
#include "phaseret/operators.hpp"
#include "phaseret/solvers.hpp"

namespace phaseret {

enum class Axis { sampling_ratio, snr_db, iterations, time_budget };

inline std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::sampling_ratio: return "sampling_ratio";
    case Axis::snr_db: return "snr_db";
    case Axis::iterations: return "iterations";
    case Axis::time_budget: return "time_budget";
  }
  return "?";
}

inline Axis parse_axis(std::string_view s) {
  if (s == "sampling_ratio" || s == "ratio") return Axis::sampling_ratio;
  if (s == "snr_db" || s == "snr") return Axis::snr_db;
  if (s == "iterations" || s == "iters") return Axis::iterations;
  if (s == "time_budget" || s == "time") return Axis::time_budget;
  throw ArgumentError("unknown axis '" + std::string(s) + "' (valid: ratio, snr, iters, time)");
}

struct AlgorithmEntry {
  std::string name;
  SolveOptions opts;
  AlgorithmParams params;
};

struct BenchmarkGrid {
  Axis axis = Axis::sampling_ratio;
  std::vector<double> axis_values;
  Index n = 64;
  int trials = 1;
  std::uint64_t seed_base = 0;
  std::vector<AlgorithmEntry> algorithms;
  InitializerSpec initializer;
  EigOptions eig;
  /// m / n on the axes other than sampling_ratio.
  double base_ratio = 8.0;
  /// Noise level on the axes other than snr_db; unset means noiseless.
  std::optional<double> base_snr_db;
  int jobs = 1;
};

struct BenchmarkRecord {
  std::string algorithm;
  double axis_value = 0.0;
  int trial_index = 0;
  std::uint64_t seed = 0;
  double phase_aligned_error = 0.0;
  double rel_measurement_error = 0.0;
  int iterations_used = 0;
  double wall_time_s = 0.0;
  std::string status;
};

/// Seed of one (axis_value, trial) cell.
inline std::uint64_t cell_seed(std::uint64_t seed_base, double axis_value, int trial) {
  const auto bits = std::bit_cast<std::uint64_t>(axis_value);
  return seed_base ^ detail::splitmix64(bits ^ detail::splitmix64(static_cast<std::uint64_t>(trial)));
}

namespace detail {

inline void validate(const BenchmarkGrid& grid) {
  require(!grid.axis_values.empty(), "benchmark needs at least one axis value");
  for (std::size_t i = 1; i < grid.axis_values.size(); ++i)
    require(grid.axis_values[i] > grid.axis_values[i - 1], "axis values must be strictly increasing");
  require(grid.trials >= 1, "trials must be >= 1");
  require(grid.n >= 1, "signal dimension must be >= 1");
  require(!grid.algorithms.empty(), "benchmark needs at least one algorithm");
  for (const auto& a : grid.algorithms)
    if (!is_algorithm_name(a.name))
      throw ArgumentError("unknown algorithm '" + a.name + "' (valid: " + valid_algorithm_list() + ")");
  if (!is_initializer_name(grid.initializer.name))
    throw ArgumentError("unknown initializer '" + grid.initializer.name + "'");
  for (double v : grid.axis_values) {
    require(std::isfinite(v), "axis values must be finite");
    if (grid.axis == Axis::sampling_ratio) require(v > 0.0, "sampling ratios must be positive");
    if (grid.axis == Axis::iterations) require(v >= 0.0, "iteration counts must be nonnegative");
    if (grid.axis == Axis::time_budget) require(v > 0.0, "time budgets must be positive");
  }
  require(grid.jobs >= 1, "jobs must be >= 1");
}

/// All records of one (axis_value, trial) cell, in algorithm order. Every
/// algorithm sees the same instance and the same initializer output.
inline std::vector<BenchmarkRecord> run_cell(const BenchmarkGrid& grid, double value, int trial) {
  const std::uint64_t seed = cell_seed(grid.seed_base, value, trial);
  const double ratio = grid.axis == Axis::sampling_ratio ? value : grid.base_ratio;
  GaussianSpec spec;
  spec.n = grid.n;
  spec.m = std::max<Index>(1, static_cast<Index>(std::llround(ratio * static_cast<double>(grid.n))));
  spec.seed = seed;
  spec.snr_db = grid.axis == Axis::snr_db ? std::optional<double>(value) : grid.base_snr_db;

  std::vector<BenchmarkRecord> out;
  auto error_row = [&](const std::string& alg) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return BenchmarkRecord{alg, value, trial, seed, nan, nan, 0, 0.0, "error"};
  };

  std::optional<Instance> inst;
  std::optional<InitResult> init;
  try {
    inst.emplace(make_gaussian_instance(spec));
    EigOptions eig = grid.eig;
    eig.seed = seed;
    init.emplace(run_initializer(*inst, grid.initializer, eig));
  } catch (const std::exception&) {
    for (const auto& a : grid.algorithms) out.push_back(error_row(a.name));
    return out;
  }

  for (const auto& a : grid.algorithms) {
    SolveOptions opts = a.opts;
    opts.seed = seed;
    opts.record_trace = false;
    if (grid.axis == Axis::iterations) opts.max_iters = static_cast<int>(std::llround(value));
    if (grid.axis == Axis::time_budget) opts.time_budget_s = value;
    try {
      Stopwatch clock;
      SolveResult res = solve(a.name, *inst, *init, opts, a.params);
      const double elapsed = clock.seconds();
      if (!all_finite(res.x_hat)) throw NumericError("non-finite estimate", res.trace.iterations);
      out.push_back({a.name, value, trial, seed, phase_aligned_error(*inst->x_true(), res.x_hat),
                     rel_measurement_error(*inst, res.x_hat), res.trace.iterations, elapsed,
                     std::string(to_string(res.trace.status))});
    } catch (const std::exception&) {
      out.push_back(error_row(a.name));
    }
  }
  return out;
}

}  // namespace detail

/// Runs every algorithm on every (axis_value, trial) cell. Output order is
/// (algorithm as listed, axis_value, trial) regardless of `jobs`.
inline std::vector<BenchmarkRecord> run_benchmark(const BenchmarkGrid& grid) {
  detail::validate(grid);
  const std::size_t nvals = grid.axis_values.size();
  const auto trials = static_cast<std::size_t>(grid.trials);
  const std::size_t ncells = nvals * trials;
  std::vector<std::vector<BenchmarkRecord>> cells(ncells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < ncells; c = next++)
      cells[c] = detail::run_cell(grid, grid.axis_values[c / trials], static_cast<int>(c % trials));
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(grid.jobs), ncells);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<BenchmarkRecord> records;
  records.reserve(ncells * grid.algorithms.size());
  for (std::size_t a = 0; a < grid.algorithms.size(); ++a)
    for (std::size_t c = 0; c < ncells; ++c) records.push_back(cells[c][a]);
  return records;
}

struct SummaryRow {
  std::string algorithm;
  double axis_value = 0.0;
  int runs = 0;
  int errors = 0;
  double median_phase_err = 0.0;
  double mean_phase_err = 0.0;
  double median_meas_err = 0.0;
  double mean_meas_err = 0.0;
  double success_rate = 0.0;
  double median_iters = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Per-(algorithm, axis_value) aggregates, sorted by that key. Error rows
/// count as failures in the success rate and are left out of the statistics.
inline std::vector<SummaryRow> summarize(const std::vector<BenchmarkRecord>& records, double threshold = 1e-5) {
  require(!records.empty(), "summarize needs at least one record");
  std::map<std::pair<std::string, double>, std::vector<const BenchmarkRecord*>> groups;
  for (const auto& r : records) groups[{r.algorithm, r.axis_value}].push_back(&r);

  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    SummaryRow row;
    row.algorithm = key.first;
    row.axis_value = key.second;
    row.runs = static_cast<int>(group.size());
    std::vector<double> pe, me, it;
    int successes = 0;
    for (const auto* r : group) {
      if (r->status == "error") {
        ++row.errors;
        continue;
      }
      pe.push_back(r->phase_aligned_error);
      me.push_back(r->rel_measurement_error);
      it.push_back(r->iterations_used);
      if (r->phase_aligned_error <= threshold) ++successes;
    }
    row.median_phase_err = detail::median(pe);
    row.mean_phase_err = detail::mean(pe);
    row.median_meas_err = detail::median(me);
    row.mean_meas_err = detail::mean(me);
    row.median_iters = detail::median(it);
    row.success_rate = static_cast<double>(successes) / static_cast<double>(row.runs);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline constexpr std::string_view kRecordsHeader =
    "algorithm,axis,axis_value,trial,seed,phase_err,meas_err,iters,time_s,status";

inline std::string records_csv(const std::vector<BenchmarkRecord>& records, Axis axis) {
  std::ostringstream os;
  os << kRecordsHeader << '\n';
  for (const auto& r : records) {
    os << r.algorithm << ',' << to_string(axis) << ',' << format_double(r.axis_value) << ',' << r.trial_index << ','
       << r.seed << ',' << format_double(r.phase_aligned_error) << ',' << format_double(r.rel_measurement_error)
       << ',' << r.iterations_used << ',' << format_double(r.wall_time_s) << ',' << r.status << '\n';
  }
  return os.str();
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows, Axis axis) {
  std::ostringstream os;
  os << "algorithm,axis,axis_value,runs,errors,median_phase_err,mean_phase_err,median_meas_err,mean_meas_err,"
        "success_rate,median_iters\n";
  for (const auto& r : rows) {
    os << r.algorithm << ',' << to_string(axis) << ',' << format_double(r.axis_value) << ',' << r.runs << ','
       << r.errors << ',' << format_double(r.median_phase_err) << ',' << format_double(r.mean_phase_err) << ','
       << format_double(r.median_meas_err) << ',' << format_double(r.mean_meas_err) << ','
       << format_double(r.success_rate) << ',' << format_double(r.median_iters) << '\n';
  }
  return os.str();
}

/// gnuplot script: median phase-aligned error against the axis, one series
/// per algorithm, read from the summary CSV.
inline std::string plot_script(std::string_view summary_path, const std::vector<std::string>& algorithms,
                               Axis axis) {
  std::ostringstream os;
  os << "# median reconstruction error per algorithm\n"
     << "set datafile separator ','\n"
     << "set key top right\n"
     << "set logscale y\n"
     << "set xlabel '" << to_string(axis) << "'\n"
     << "set ylabel 'median phase-aligned error'\n"
     << "set terminal pngcairo size 800,600\n"
     << "set output '" << summary_path << ".png'\n"
     << "plot \\\n";
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    os << "  '" << summary_path << "' every ::1 using 3:(strcol(1) eq '" << algorithms[i] << "' ? $6 : 1/0) with linespoints title '"
       << algorithms[i] << "'" << (i + 1 < algorithms.size() ? ", \\\n" : "\n");
  }
  return os.str();
}

}  // namespace phaseret

#endif  // PHASERET_BENCHMARK_HPP
