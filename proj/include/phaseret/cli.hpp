#ifndef PHASERET_CLI_HPP
#define PHASERET_CLI_HPP

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "phaseret/benchmark.hpp"
#include "phaseret/datasets_io.hpp"
#include "phaseret/file_util.hpp"
#include "phaseret/initializers.hpp"
#include "phaseret/metrics.hpp"
#include "phaseret/operators.hpp"
#include "phaseret/solvers.hpp"

namespace phaseret::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kNumeric = 2;

struct SyntheticSource {
  std::optional<Index> n;
  std::optional<Index> m;
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;
};

/// Parses "n=64,m=512,seed=1,snr=20". Unknown keys are rejected.
inline SyntheticSource parse_synthetic(std::string_view text) {
  SyntheticSource s;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ArgumentError("synthetic spec entry '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      if (key == "n")
        s.n = std::stoll(val);
      else if (key == "m")
        s.m = std::stoll(val);
      else if (key == "seed")
        s.seed = std::stoull(val);
      else if (key == "snr")
        s.snr_db = std::stod(val);
      else
        throw ArgumentError("unknown synthetic key '" + key + "' (valid: n, m, seed, snr)");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ArgumentError*>(&e)) throw;
      throw ArgumentError("bad value for synthetic key '" + key + "': " + val);
    }
  }
  return s;
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::vector<double> parse_values(std::string_view text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
      throw ArgumentError("bad axis value '" + s + "'");
    }
  }
  return out;
}

/// Flat "key = value" lines; '#' starts a comment. Keys are long flag names.
inline std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(lineno) + " is not key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

struct Config {
  std::string subcommand;
  std::string alg;
  std::string init = "spectral-optimal";
  std::string rescale = "unit_mean_square";
  double fraction = 0.5;
  double beta = 0.9;
  std::string synthetic;
  std::string dataset;
  std::string axis = "ratio";
  std::string values;
  int trials = 1;
  double tol = 1e-7;
  int max_iters = 1000;
  int window = 10;
  std::string out;
  int jobs = 1;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string image;
  std::string image_out;
  std::string shape;
  bool real_matrix = false;
};

namespace detail {

inline std::uint64_t resolve_seed(const Config& cfg, const SyntheticSource& syn) {
  if (cfg.seed) return *cfg.seed;
  if (syn.seed) return *syn.seed;
  if (const char* env = std::getenv("PHASEREPO_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::logic_error&) {
      throw ArgumentError(std::string("PHASEREPO_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

inline std::string synthetic_echo(const SyntheticSource& s) {
  std::string out;
  auto add = [&out](const std::string& kv) { out += (out.empty() ? "" : ",") + kv; };
  if (s.n) add("n=" + std::to_string(*s.n));
  if (s.m) add("m=" + std::to_string(*s.m));
  if (s.snr_db) add("snr=" + format_double(*s.snr_db));
  return out;
}

/// First output line: flags that reproduce this run.
inline std::string config_echo(const Config& cfg, const SyntheticSource& syn, std::uint64_t seed) {
  std::ostringstream os;
  os << "# phaseret " << cfg.subcommand;
  if (!cfg.alg.empty()) os << " --alg " << cfg.alg;
  if (cfg.subcommand != "dataset-info" && cfg.subcommand != "make-synthetic")
    os << " --init " << cfg.init << " --rescale " << cfg.rescale << " --fraction " << format_double(cfg.fraction);
  if (!cfg.synthetic.empty()) os << " --synthetic " << synthetic_echo(syn);
  if (!cfg.dataset.empty()) os << " --dataset " << cfg.dataset;
  if (!cfg.image.empty()) os << " --image " << cfg.image;
  if (cfg.subcommand == "benchmark")
    os << " --axis " << cfg.axis << " --values " << cfg.values << " --trials " << cfg.trials << " --jobs "
       << cfg.jobs;
  if (cfg.subcommand == "solve" || cfg.subcommand == "benchmark")
    os << " --tol " << format_double(cfg.tol) << " --max-iters " << cfg.max_iters << " --window " << cfg.window
       << " --beta " << format_double(cfg.beta);
  if (cfg.real_matrix) os << " --real";
  os << " --seed " << seed;
  return os.str();
}

inline Instance build_instance(const Config& cfg, const SyntheticSource& syn, std::uint64_t seed) {
  const bool has_syn = !cfg.synthetic.empty();
  const bool has_ds = !cfg.dataset.empty();
  if (has_syn == has_ds) throw ArgumentError("exactly one of --synthetic or --dataset is required");
  if (has_ds) return load_tm(cfg.dataset);
  if (!syn.n || !syn.m) throw ArgumentError("--synthetic needs n and m");
  GaussianSpec spec;
  spec.n = *syn.n;
  spec.m = *syn.m;
  spec.seed = seed;
  spec.snr_db = syn.snr_db;
  return make_gaussian_instance(spec);
}

inline InitializerSpec init_spec(const Config& cfg, const std::string& name) {
  InitializerSpec s;
  s.name = name;
  s.rescale = parse_rescale_mode(cfg.rescale);
  s.fraction = cfg.fraction;
  return s;
}

inline void check_initializer(const std::string& name) {
  if (!is_initializer_name(name)) {
    std::string valid;
    for (auto n : initializer_names()) valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw ArgumentError("unknown initializer '" + name + "' (valid: " + valid + ")");
  }
}

inline void check_algorithm(const std::string& name) {
  if (!is_algorithm_name(name))
    throw ArgumentError("unknown algorithm '" + name + "' (valid: " + valid_algorithm_list() + ")");
}

inline SolveOptions solve_options(const Config& cfg, std::uint64_t seed) {
  SolveOptions o;
  o.tol = cfg.tol;
  o.max_iters = cfg.max_iters;
  o.window_w = cfg.window;
  o.seed = seed;
  return o;
}

inline std::pair<int, int> parse_shape(const std::string& shape) {
  const auto x = shape.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(shape);
    return {std::stoi(shape.substr(0, x)), std::stoi(shape.substr(x + 1))};
  } catch (const std::logic_error&) {
    throw ArgumentError("--shape expects WIDTHxHEIGHT, got '" + shape + "'");
  }
}

inline std::string trace_csv(const Trace& trace) {
  std::ostringstream os;
  os << "iter,objective,grad_norm,stepsize,backtracks,time_s,accepted\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    os << i << ',' << format_double(r.objective) << ',' << format_double(r.grad_norm) << ','
       << format_double(r.stepsize) << ',' << r.backtracks << ',' << format_double(r.time_s) << ','
       << (r.accepted ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string signal_csv(const Vec& x) {
  std::ostringstream os;
  os << "index,re,im\n";
  for (Index i = 0; i < x.size(); ++i)
    os << i << ',' << format_double(x[i].real()) << ',' << format_double(x[i].imag()) << '\n';
  return os.str();
}

inline int cmd_solve(const Config& cfg, std::ostream& out) {
  check_algorithm(cfg.alg);
  check_initializer(cfg.init);
  const SyntheticSource syn = parse_synthetic(cfg.synthetic);
  const std::uint64_t seed = resolve_seed(cfg, syn);
  out << config_echo(cfg, syn, seed) << '\n';

  const Instance inst = build_instance(cfg, syn, seed);
  EigOptions eig;
  eig.seed = seed;
  const InitResult init = run_initializer(inst, init_spec(cfg, cfg.init), eig);
  AlgorithmParams params;
  params.fienup_beta = cfg.beta;
  phaseret::detail::Stopwatch clock;
  const SolveResult res = solve(cfg.alg, inst, init, solve_options(cfg, seed), params);
  const double elapsed = clock.seconds();

  out << "instance: " << inst.label() << '\n'
      << "algorithm: " << res.algorithm << '\n'
      << "initializer: " << init.diagnostics << '\n'
      << "status: " << to_string(res.trace.status) << '\n'
      << "iterations: " << res.trace.iterations << '\n'
      << "wall_time_s: " << format_double(elapsed) << '\n'
      << "rel_measurement_error: " << format_double(rel_measurement_error(inst, res.x_hat)) << '\n';
  if (inst.x_true()) out << "phase_aligned_error: " << format_double(phase_aligned_error(*inst.x_true(), res.x_hat)) << '\n';
  if (!res.diagnostics.empty()) out << "diagnostics: " << res.diagnostics << '\n';

  if (!cfg.out.empty()) {
    write_file_atomic(cfg.out + "_trace.csv", trace_csv(res.trace));
    write_file_atomic(cfg.out + "_signal.csv", signal_csv(res.x_hat));
  }
  if (!cfg.image_out.empty()) {
    if (cfg.shape.empty()) throw ArgumentError("--image-out needs --shape WIDTHxHEIGHT");
    const auto [w, h] = parse_shape(cfg.shape);
    save_image_signal(res.x_hat, w, h, cfg.image_out);
  }
  return kOk;
}

inline int cmd_benchmark(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto algs = split_list(cfg.alg);
  if (algs.empty()) throw ArgumentError("--alg needs at least one algorithm");
  for (const auto& a : algs) check_algorithm(a);
  check_initializer(cfg.init);
  const SyntheticSource syn = parse_synthetic(cfg.synthetic);
  if (!cfg.dataset.empty()) throw ArgumentError("benchmark sweeps synthetic instances only; use --synthetic");
  const std::uint64_t seed = resolve_seed(cfg, syn);
  out << config_echo(cfg, syn, seed) << '\n';

  BenchmarkGrid grid;
  grid.axis = parse_axis(cfg.axis);
  grid.axis_values = parse_values(cfg.values);
  grid.n = syn.n.value_or(64);
  if (syn.m) grid.base_ratio = static_cast<double>(*syn.m) / static_cast<double>(grid.n);
  grid.base_snr_db = syn.snr_db;
  grid.trials = cfg.trials;
  grid.seed_base = seed;
  grid.jobs = cfg.jobs;
  grid.initializer = init_spec(cfg, cfg.init);
  for (const auto& a : algs) {
    AlgorithmEntry e{a, solve_options(cfg, seed), {}};
    e.params.fienup_beta = cfg.beta;
    grid.algorithms.push_back(std::move(e));
  }

  const auto records = run_benchmark(grid);
  const auto summary = summarize(records);
  const std::string prefix = cfg.out.empty() ? std::string("benchmark") : cfg.out;
  write_file_atomic(prefix + "_records.csv", records_csv(records, grid.axis));
  write_file_atomic(prefix + "_summary.csv", summary_csv(summary, grid.axis));
  write_file_atomic(prefix + "_plot.gp", plot_script(prefix + "_summary.csv", algs, grid.axis));

  out << std::left << std::setw(10) << "algorithm" << std::setw(25) << to_string(grid.axis) << std::setw(25)
      << "median_err" << std::setw(10) << "success" << "errors\n";
  for (const auto& r : summary)
    out << std::setw(10) << r.algorithm << std::setw(25) << format_double(r.axis_value) << std::setw(25)
        << format_double(r.median_phase_err) << std::setw(10) << format_double(r.success_rate) << r.errors << '\n';
  out << "wrote " << prefix << "_records.csv, " << prefix << "_summary.csv, " << prefix << "_plot.gp\n";

  std::size_t ok = 0;
  for (const auto& r : records) ok += r.status != "error";
  if (ok == 0) {
    err << "error: every benchmark run failed\n";
    return kNumeric;
  }
  return kOk;
}

inline int cmd_init_eval(const Config& cfg, std::ostream& out) {
  const std::string list = cfg.init.empty() || cfg.init == "all" ? std::string() : cfg.init;
  std::vector<std::string> names;
  if (list.empty())
    for (auto n : initializer_names()) names.emplace_back(n);
  else
    names = split_list(list);
  for (const auto& n : names) check_initializer(n);
  const SyntheticSource syn = parse_synthetic(cfg.synthetic);
  const std::uint64_t seed = resolve_seed(cfg, syn);
  out << config_echo(cfg, syn, seed) << '\n';

  const Instance inst = build_instance(cfg, syn, seed);
  if (!inst.x_true())
    throw ArgumentError("init-eval needs ground truth; the dataset '" + cfg.dataset + "' has none");

  std::ostringstream csv;
  csv << "initializer,alignment,alpha,eig_value,converged,phase_err\n";
  out << std::left << std::setw(20) << "initializer" << std::setw(25) << "alignment" << std::setw(25) << "alpha"
      << std::setw(25) << "eig_value" << "converged\n";
  for (const auto& n : names) {
    EigOptions eig;
    eig.seed = seed;
    const InitResult r = run_initializer(inst, init_spec(cfg, n), eig);
    const double al = alignment(*inst.x_true(), r.raw_direction);
    out << std::setw(20) << n << std::setw(25) << format_double(al) << std::setw(25) << format_double(r.alpha)
        << std::setw(25) << format_double(r.eig_value) << (r.eig_converged ? "yes" : "no") << '\n';
    csv << n << ',' << format_double(al) << ',' << format_double(r.alpha) << ',' << format_double(r.eig_value) << ','
        << (r.eig_converged ? 1 : 0) << ',' << format_double(phase_aligned_error(*inst.x_true(), r.x0)) << '\n';
  }
  if (!cfg.out.empty()) write_file_atomic(cfg.out + "_init.csv", csv.str());
  return kOk;
}

inline int cmd_dataset_info(const Config& cfg, std::ostream& out) {
  if (cfg.dataset.empty()) throw ArgumentError("dataset-info needs --dataset PATH");
  out << "# phaseret dataset-info --dataset " << cfg.dataset << '\n';
  const TmDataset ds = load_tm_dataset(cfg.dataset);
  const Instance inst = to_instance(ds);
  out << "m: " << ds.m << '\n'
      << "n: " << ds.n << '\n'
      << "matrix: " << (ds.is_complex ? "complex" : "real") << '\n'
      << "ground_truth: " << (ds.x_true ? "yes" : "no") << '\n'
      << "b_norm: " << format_double(inst.b().norm()) << '\n'
      << "sampling_ratio: " << format_double(static_cast<double>(ds.m) / ds.n) << '\n';
  if (inst.x_true() && inst.b().norm() > 0.0)
    out << "ground_truth_rel_measurement_error: " << format_double(rel_measurement_error(inst, *inst.x_true()))
        << '\n';
  return kOk;
}

/// Writes a .tmds file from a Gaussian instance; with --image the ground
/// truth is the image (pixels in [0, 1]) instead of a random signal.
inline int cmd_make_synthetic(const Config& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw ArgumentError("make-synthetic needs --out PATH.tmds");
  SyntheticSource syn = parse_synthetic(cfg.synthetic);
  const std::uint64_t seed = resolve_seed(cfg, syn);
  std::optional<Vec> x;
  if (!cfg.image.empty()) {
    const ImageSignal img = load_image_signal(cfg.image);
    if (syn.n && *syn.n != img.x.size())
      throw ArgumentError("image has " + std::to_string(img.x.size()) + " pixels but n=" + std::to_string(*syn.n));
    syn.n = img.x.size();
    x = img.x.cast<Complex>();
  }
  if (!syn.n || !syn.m) throw ArgumentError("make-synthetic needs n and m in --synthetic (n may come from --image)");
  out << config_echo(cfg, syn, seed) << " --out " << cfg.out << '\n';

  const Index n = *syn.n;
  const Index m = *syn.m;
  const double variance = 1.0 / static_cast<double>(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(cfg.real_matrix ? variance : variance / 2.0));
  Mat a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      const double re = dist(rng);
      const double im = cfg.real_matrix ? 0.0 : dist(rng);
      a(i, j) = Complex(re, im);
    }
  // Round to float32 first so b is consistent with the stored matrix.
  a = a.cast<std::complex<float>>().cast<Complex>();
  if (!x) {
    Vec v = phaseret::detail::complex_gaussian(n, 1.0, rng);
    x = v / v.norm();
  }
  *x = x->cast<std::complex<float>>().cast<Complex>();
  RVec b = (a * *x).cwiseAbs();
  if (syn.snr_db) b = add_noise(b, *syn.snr_db, phaseret::detail::splitmix64(seed ^ 0x6E6F697365ull));
  save_tm(make_tm_dataset(a, b, x, !cfg.real_matrix), cfg.out);
  out << "wrote " << cfg.out << " (m=" << m << ", n=" << n << ", " << (cfg.real_matrix ? "real" : "complex")
      << ")\n";
  return kOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // Config-file values are spliced in right after the subcommand, so any
  // flag given on the command line (parsed later, last one wins) overrides them.
  std::vector<std::string> argv_s{"phaseret"};
  std::vector<std::string> rest = args;
  try {
    std::string config_path;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == "--config" && i + 1 < rest.size()) config_path = rest[i + 1];
      if (rest[i].rfind("--config=", 0) == 0) config_path = rest[i].substr(9);
    }
    if (!config_path.empty() && !rest.empty()) {
      const auto entries = parse_config_file(read_file(config_path));
      std::vector<std::string> injected;
      for (const auto& [k, v] : entries) {
        if (k == "config") continue;
        injected.push_back("--" + k);
        injected.push_back(v);
      }
      rest.insert(rest.begin() + 1, injected.begin(), injected.end());
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  argv_s.insert(argv_s.end(), rest.begin(), rest.end());

  CLI::App app{"phaseret: phase retrieval solvers, initializers and benchmarks"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  Config cfg;

  auto common = [&cfg](CLI::App* sub) {
    sub->add_option("--config", cfg.config, "flat key=value file; command-line flags take precedence");
    sub->add_option("--seed", cfg.seed, "seed (fallback: synthetic seed, then PHASEREPO_SEED, then 0)");
  };
  auto source = [&cfg](CLI::App* sub) {
    sub->add_option("--synthetic", cfg.synthetic, "n=..,m=..,seed=..[,snr=..]");
    sub->add_option("--dataset", cfg.dataset, ".tmds dataset path");
  };
  auto init_opts = [&cfg](CLI::App* sub) {
    sub->add_option("--rescale", cfg.rescale, "none | paper | unit_mean_square");
    sub->add_option("--fraction", cfg.fraction, "orthogonality-promoting fraction of smallest measurements");
  };
  auto solver_opts = [&cfg](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "stopping tolerance");
    sub->add_option("--max-iters", cfg.max_iters, "iteration cap");
    sub->add_option("--window", cfg.window, "non-monotone line-search window");
    sub->add_option("--beta", cfg.beta, "fienup relaxation");
  };

  auto* solve_cmd = app.add_subcommand("solve", "run one initializer + solver");
  solve_cmd->add_option("--alg", cfg.alg, "algorithm")->required();
  solve_cmd->add_option("--init", cfg.init, "initializer");
  solve_cmd->add_option("--out", cfg.out, "prefix for <prefix>_trace.csv and <prefix>_signal.csv");
  solve_cmd->add_option("--image-out", cfg.image_out, "write |x| as 8-bit PGM");
  solve_cmd->add_option("--shape", cfg.shape, "WIDTHxHEIGHT for --image-out");
  common(solve_cmd);
  source(solve_cmd);
  init_opts(solve_cmd);
  solver_opts(solve_cmd);

  auto* bench_cmd = app.add_subcommand("benchmark", "sweep algorithms over an axis");
  cfg.alg = "";
  bench_cmd->add_option("--alg", cfg.alg, "comma-separated algorithms")->required();
  bench_cmd->add_option("--init", cfg.init, "initializer");
  bench_cmd->add_option("--axis", cfg.axis, "ratio | snr | iters | time");
  bench_cmd->add_option("--values", cfg.values, "comma-separated, strictly increasing")->required();
  bench_cmd->add_option("--trials", cfg.trials, "trials per axis value");
  bench_cmd->add_option("--jobs", cfg.jobs, "worker threads");
  bench_cmd->add_option("--out", cfg.out, "output prefix");
  common(bench_cmd);
  source(bench_cmd);
  init_opts(bench_cmd);
  solver_opts(bench_cmd);

  auto* init_cmd = app.add_subcommand("init-eval", "compare initializers by alignment with the ground truth");
  init_cmd->add_option("--init", cfg.init, "comma-separated initializers or 'all'");
  init_cmd->add_option("--out", cfg.out, "prefix for <prefix>_init.csv");
  common(init_cmd);
  source(init_cmd);
  init_opts(init_cmd);

  auto* info_cmd = app.add_subcommand("dataset-info", "describe a .tmds dataset");
  info_cmd->add_option("--dataset", cfg.dataset, ".tmds dataset path")->required();
  info_cmd->add_option("--config", cfg.config, "flat key=value file");

  auto* make_cmd = app.add_subcommand("make-synthetic", "write a Gaussian transmission-matrix dataset");
  make_cmd->add_option("--synthetic", cfg.synthetic, "n=..,m=..,seed=..[,snr=..]");
  make_cmd->add_option("--image", cfg.image, "8-bit PGM used as the ground-truth signal");
  make_cmd->add_option("--out", cfg.out, "output .tmds path")->required();
  make_cmd->add_flag("--real", cfg.real_matrix, "store a real-valued matrix");
  common(make_cmd);

  std::vector<char*> argv;
  argv.reserve(argv_s.size());
  for (auto& s : argv_s) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) {
      cfg.subcommand = "solve";
      return detail::cmd_solve(cfg, out);
    }
    if (*bench_cmd) {
      cfg.subcommand = "benchmark";
      return detail::cmd_benchmark(cfg, out, err);
    }
    if (*init_cmd) {
      cfg.subcommand = "init-eval";
      if (cfg.init == "spectral-optimal" && init_cmd->count("--init") == 0) cfg.init = "all";
      return detail::cmd_init_eval(cfg, out);
    }
    if (*info_cmd) {
      cfg.subcommand = "dataset-info";
      return detail::cmd_dataset_info(cfg, out);
    }
    if (*make_cmd) {
      cfg.subcommand = "make-synthetic";
      return detail::cmd_make_synthetic(cfg, out);
    }
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace phaseret::cli

#endif  // PHASERET_CLI_HPP
