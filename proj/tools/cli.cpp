#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "convreg/format.hpp"
#include "convreg/penalty.hpp"
#include "convreg/rng.hpp"
#include "convreg/spectrum.hpp"
#include "convreg/transform_matrix.hpp"

namespace convreg::cli {

namespace {

constexpr const char* kCsvHeader = "iter,lambda,penalty,grad_fro,sigma_max,sigma_min";

std::string optional_field(const std::optional<double>& v) { return v ? format_g17(*v) : std::string(); }

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  return out;
}

void warn_geometry(const ExperimentSpec& spec, std::ostream& log) {
  if (spec.n < spec.k) {
    log << "warning: input size N=" << spec.n << " is smaller than the filter size k=" << spec.k << '\n';
  }
}

std::string describe(const ExperimentSpec& spec) {
  return std::to_string(spec.k) + "x" + std::to_string(spec.k) + "x" + std::to_string(spec.g) + "x" +
         std::to_string(spec.h);
}

struct OptimizeOutcome {
  int code = kSuccess;
  std::vector<IterationRecord> trajectory;
  std::string message;
};

// Runs one experiment and writes its CSV and final kernel.
OptimizeOutcome optimize_to_files(const ExperimentSpec& spec, std::ostream* progress) {
  const Kernel initial = spec.initial_kernel();
  const RunConfig cfg = spec.run_config();
  const StepSchedule schedule = StepSchedule::parse(spec.schedule);

  RecordObserver observer;
  if (progress) {
    observer = [progress](const IterationRecord& rec) {
      if (!rec.sigma_max) return;
      *progress << "iter " << rec.iter << "  penalty " << format_g17(rec.penalty) << "  sigma_max "
                << format_g17(*rec.sigma_max) << "  sigma_min " << format_g17(*rec.sigma_min) << '\n';
    };
  }

  OptimizeOutcome outcome;
  Kernel final_kernel;
  try {
    auto result = descend(initial, cfg, schedule, observer);
    outcome.code = result.reason == StopReason::converged ? kSuccess : kMaxIter;
    outcome.trajectory = std::move(result.trajectory);
    final_kernel = std::move(result.kernel);
    outcome.message = result.reason == StopReason::converged ? "converged" : "reached max-iter";
  } catch (const DivergenceError& e) {
    outcome.code = kDiverged;
    outcome.trajectory = e.trajectory();
    final_kernel = e.kernel();
    outcome.message = std::string("diverged: ") + e.what();
  }

  if (!spec.output_path.empty()) {
    auto csv = open_output(spec.output_path);
    write_trajectory_csv(csv, outcome.trajectory);
    if (!csv) throw std::ios_base::failure("failed writing " + spec.output_path);
  }
  const std::string kernel_path =
      !spec.kernel_output_path.empty() ? spec.kernel_output_path
                                       : (spec.output_path.empty() ? "" : kernel_path_for(spec.output_path));
  if (!kernel_path.empty()) save_kernel(kernel_path, final_kernel);
  return outcome;
}

}  // namespace

Kernel ExperimentSpec::initial_kernel() const {
  if (!init_path.empty()) {
    Kernel kernel = load_kernel(init_path);
    if (kernel.k() != k || kernel.g() != g || kernel.h() != h) {
      throw ConfigError("kernel in " + init_path + " is " + std::to_string(kernel.k()) + "x" +
                        std::to_string(kernel.k()) + "x" + std::to_string(kernel.g()) + "x" +
                        std::to_string(kernel.h()) + ", flags ask for " + std::to_string(k) + "x" +
                        std::to_string(k) + "x" + std::to_string(g) + "x" + std::to_string(h));
    }
    return kernel;
  }
  if (init_delta) return Kernel::delta(k, g, h);
  return random_kernel(k, g, h, seed);
}

RunConfig ExperimentSpec::run_config() const {
  RunConfig cfg = RunConfig::experiment_defaults();
  cfg.alpha = alpha;
  cfg.n = n;
  cfg.max_iter = max_iter;
  cfg.stop_tol = stop_tol;
  cfg.spectrum_every = spectrum_every;
  cfg.seed = seed;
  cfg.gradient_scale = gradient_scale;
  cfg.validate();
  return cfg;
}

void write_trajectory_csv(std::ostream& out, const std::vector<IterationRecord>& trajectory) {
  out << kCsvHeader << '\n';
  for (const auto& rec : trajectory) {
    out << rec.iter << ',' << format_g17(rec.lambda) << ',' << format_g17(rec.penalty) << ','
        << format_g17(rec.grad_fro) << ',' << optional_field(rec.sigma_max) << ','
        << optional_field(rec.sigma_min) << '\n';
  }
}

std::vector<IterationRecord> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("trajectory CSV: unexpected header");
  }
  auto number = [](const std::string& field) {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::runtime_error("trajectory CSV: bad number '" + field + "'");
    return v;
  };
  std::vector<IterationRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 6) throw std::runtime_error("trajectory CSV: expected 6 fields in '" + line + "'");
    IterationRecord rec;
    rec.iter = std::stoi(fields[0]);
    rec.lambda = number(fields[1]);
    rec.penalty = number(fields[2]);
    rec.grad_fro = number(fields[3]);
    if (!fields[4].empty()) rec.sigma_max = number(fields[4]);
    if (!fields[5].empty()) rec.sigma_min = number(fields[5]);
    records.push_back(rec);
  }
  return records;
}

std::string kernel_path_for(const std::string& csv_path) {
  std::string stem = csv_path;
  if (stem.size() >= 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
  return stem + ".kernel.json";
}

int cmd_optimize(const ExperimentSpec& spec, std::ostream& log) {
  warn_geometry(spec, log);
  const auto outcome = optimize_to_files(spec, spec.quiet ? nullptr : &log);
  const auto& last = outcome.trajectory.back();
  log << describe(spec) << " N=" << spec.n << ": " << outcome.message << " after " << last.iter
      << " iterations, penalty " << format_g17(last.penalty);
  if (last.sigma_max) log << ", sigma_max " << format_g17(*last.sigma_max) << ", sigma_min " << format_g17(*last.sigma_min);
  log << '\n';
  return outcome.code;
}

double CheckGradReport::worst() const { return std::max({fast_vs_direct, fast_vs_fd, direct_vs_fd}); }

CheckGradReport check_grad(const ExperimentSpec& spec, double fd_step, bool corrupt) {
  const Kernel kernel = spec.initial_kernel();
  const RegularizerConfig cfg{spec.alpha, spec.n};
  auto fast = gradient_fast(kernel, cfg);
  const auto direct = gradient_direct(kernel, cfg);
  const auto fd = gradient_fd(kernel, cfg, fd_step);
  if (corrupt) {
    double scale = 1.0;
    for (double v : fast.values.values()) scale = std::max(scale, std::abs(v));
    fast.values.values()[0] += 1e-3 * scale;
  }
  // Errors are relative to the largest gradient entry, floored at 1 so that
  // an all-zero gradient compares against finite-difference round-off.
  CheckGradReport report;
  report.fast_vs_direct = relative_error(fast.values.values(), direct.values.values(), 1.0);
  report.fast_vs_fd = relative_error(fast.values.values(), fd.values.values(), 1.0);
  report.direct_vs_fd = relative_error(direct.values.values(), fd.values.values(), 1.0);
  return report;
}

int cmd_check_grad(const ExperimentSpec& spec, double fd_step, bool corrupt, std::ostream& out) {
  warn_geometry(spec, out);
  if (static_cast<long long>(spec.g) * spec.n * spec.n > 500) {
    out << "warning: g*N^2 = " << spec.g * spec.n * spec.n << " makes the direct gradient slow\n";
  }
  const auto report = check_grad(spec, fd_step, corrupt);
  out << "fast vs direct: " << format_g17(report.fast_vs_direct) << '\n'
      << "fast vs fd:     " << format_g17(report.fast_vs_fd) << '\n'
      << "direct vs fd:   " << format_g17(report.direct_vs_fd) << '\n';
  const bool ok = report.worst() <= kCheckGradThreshold;
  out << (ok ? "PASS" : "FAIL") << " (threshold " << kCheckGradThreshold << ")\n";
  return ok ? kSuccess : kCheckFailed;
}

int cmd_dump_matrix(const ExperimentSpec& spec, std::ostream& out) {
  const auto m = build_transform(spec.initial_kernel(), spec.n);
  if (spec.output_path.empty() || spec.output_path == "-") {
    write_coordinate(out, m.csr());
  } else {
    save_coordinate(spec.output_path, m.csr());
  }
  return kSuccess;
}

std::string figure_csv_name(int g, int h) {
  return "figure1_3x3x" + std::to_string(g) + "x" + std::to_string(h) + ".csv";
}

int cmd_reproduce_figure1(const ExperimentSpec& base, const std::string& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  std::vector<ExperimentSpec> specs;
  for (const auto& shape : kFigureShapes) {
    ExperimentSpec spec = base;
    spec.k = 3;
    spec.g = shape[0];
    spec.h = shape[1];
    spec.output_path = (std::filesystem::path(out_dir) / figure_csv_name(spec.g, spec.h)).string();
    spec.kernel_output_path.clear();
    spec.init_path.clear();
    specs.push_back(spec);
  }

  std::vector<std::future<OptimizeOutcome>> runs;
  for (const auto& spec : specs) {
    runs.push_back(std::async(std::launch::async, [&spec] { return optimize_to_files(spec, nullptr); }));
  }

  int code = kSuccess;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto outcome = runs[i].get();
    const auto& last = outcome.trajectory.back();
    log << describe(specs[i]) << ": " << outcome.message << " after " << last.iter << " iterations";
    if (last.sigma_max) log << ", sigma_max " << format_g17(*last.sigma_max) << ", sigma_min " << format_g17(*last.sigma_min);
    log << " -> " << specs[i].output_path << '\n';
    code = std::max(code, outcome.code);
  }
  return code;
}

namespace {

void add_geometry_flags(CLI::App& cmd, ExperimentSpec& spec) {
  cmd.add_option("--k", spec.k, "Filter size k")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--g", spec.g, "Input channels g")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--h", spec.h, "Output channels h")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--n", spec.n, "Input spatial size N")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--alpha", spec.alpha, "Target Gram scale alpha")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--seed", spec.seed, "Seed for the normal initial kernel")->capture_default_str();
  cmd.add_flag("--init-delta", spec.init_delta, "Start from the delta kernel instead of a random draw");
  cmd.add_option("--init", spec.init_path, "Start from a kernel JSON file")->check(CLI::ExistingFile);
}

void add_run_flags(CLI::App& cmd, ExperimentSpec& spec) {
  cmd.add_option("--max-iter", spec.max_iter, "Maximum gradient steps")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--stop-tol", spec.stop_tol, "Stop once max(|smax-1|,|smin-1|) <= this")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_option("--schedule", spec.schedule, "Step sizes \"t1:l1,t2:l2,default:l3\" (lambda while iter < t)")
      ->capture_default_str();
  cmd.add_option("--spectrum-every", spec.spectrum_every,
                 "Record singular values every j-th step (0: 1 if N <= 12, else 5)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_option("--gradient-scale", spec.gradient_scale,
                 "Update K -= lambda * scale * dR/dK; 0.5 steps along the half-derivative Omega sums")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_flag("--quiet", spec.quiet, "Suppress per-step progress");
}

constexpr const char* kExitCodes =
    "Exit codes: 0 success, 1 gradient check failed, 2 max-iter reached before stop-tol, "
    "3 divergence, 4 I/O error, 64 usage error.";

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Frobenius-norm orthogonality regularizer for convolution kernels"};
  app.footer(kExitCodes);
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  app.require_subcommand(1);

  ExperimentSpec spec;
  double fd_step = 1e-6;
  bool corrupt = false;
  std::string out_dir = "figure1";

  auto* optimize = app.add_subcommand("optimize", "Run gradient descent on one kernel; write trajectory CSV and final kernel JSON");
  add_geometry_flags(*optimize, spec);
  add_run_flags(*optimize, spec);
  optimize->add_option("--out", spec.output_path, "Trajectory CSV path")->required();
  optimize->add_option("--kernel-out", spec.kernel_output_path, "Final kernel JSON (default: <out>.kernel.json)");

  auto* check = app.add_subcommand("check-grad", "Compare fast, direct and finite-difference gradients");
  add_geometry_flags(*check, spec);
  check->add_option("--fd-step", fd_step, "Central-difference step")->check(CLI::PositiveNumber)->capture_default_str();
  check->add_flag("--corrupt-gradient", corrupt, "Test hook: perturb the fast gradient so the check must fail");

  auto* dump = app.add_subcommand("dump-matrix", "Write M in coordinate format (\"rows cols nnz\", then \"i j value\")");
  add_geometry_flags(*dump, spec);
  dump->add_option("--out", spec.output_path, "Output path, - for stdout")->capture_default_str();

  auto* figure = app.add_subcommand("reproduce-figure1",
                                    "Run 3x3x3x1, 3x3x1x3, 3x3x3x6 and 3x3x6x3 kernels at N=20 and write one CSV each");
  figure->add_option("--n", spec.n, "Input spatial size N")->check(CLI::PositiveNumber)->capture_default_str();
  figure->add_option("--alpha", spec.alpha, "Target Gram scale alpha")->check(CLI::NonNegativeNumber)->capture_default_str();
  figure->add_option("--seed", spec.seed, "Seed for the normal initial kernels")->capture_default_str();
  add_run_flags(*figure, spec);
  figure->add_option("--out-dir", out_dir, "Directory for the CSV and kernel files")->capture_default_str();

  for (auto* sub : {optimize, check, dump, figure}) sub->footer(kExitCodes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*optimize) return cmd_optimize(spec, std::cerr);
    if (*check) return cmd_check_grad(spec, fd_step, corrupt, std::cout);
    if (*dump) return cmd_dump_matrix(spec, std::cout);
    if (*figure) return cmd_reproduce_figure1(spec, out_dir, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kUsageError;
}

}  // namespace convreg::cli
