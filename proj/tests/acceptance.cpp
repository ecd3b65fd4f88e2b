// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. All tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "cli.hpp"
#include "convreg/optimizer.hpp"
#include "convreg/penalty.hpp"
#include "convreg/rng.hpp"
#include "convreg/spectrum.hpp"
#include "convreg/transform_matrix.hpp"
#include "oracles.hpp"

using namespace convreg;

namespace {

constexpr double kConvTol = 1e-12;
constexpr double kConvSeconds = 10.0;
constexpr double kFastDirectTol = 1e-10;
constexpr double kFdTol = 1e-6;
constexpr double kFdStep = 1e-6;
constexpr double kGradSeconds = 60.0;
constexpr double kSigmaTol = 0.05;
constexpr int kFigureMaxIter = 500;
constexpr int kEarlyRecords = 20;
constexpr double kDescentLambda = 1e-6;
constexpr int kDescentIters = 50;
constexpr double kDescentSlack = 1e-12;
constexpr double kFloorSlack = 1e-6;
constexpr double kSpectrumTol = 1e-8;
constexpr double kFlattenTol = 1e-10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& outcome) {
  std::printf("criterion %d: %s  %s: %s\n", id, outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str());
  std::fflush(stdout);
  if (!outcome.pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

int pick(SeededGaussian& rng, int count) { return static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(count)); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Eigen::VectorXd oracle_singular_values(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

Outcome conv_equivalence() {
  const int ks[] = {1, 3, 5};
  const int ns[] = {3, 5, 8, 12};
  SeededGaussian rng(101);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int k = ks[pick(rng, 3)], n = ns[pick(rng, 4)], g = 1 + pick(rng, 3), h = 1 + pick(rng, 3);
    const auto kernel = random_kernel(k, g, h, 1000 + i);
    const auto x = random_feature_map(n, g, 2000 + i);
    const auto direct = vec(conv_multi(kernel, x));
    const auto via_matrix = matvec(build_transform(kernel, n), vec(x));
    worst = std::max(worst, max_abs_diff(direct, via_matrix));
  }
  const double elapsed = seconds_since(start);
  return {worst <= kConvTol && elapsed < kConvSeconds,
          fmt("50 instances, max |diff| %.3g (tol %.0e), %.2f s (limit 10 s)", worst, kConvTol, elapsed)};
}

Outcome structure_oracle() {
  SeededGaussian rng(202);
  int mismatched = 0;
  for (int i = 0; i < 20; ++i) {
    const int k = 1 + pick(rng, 5), n = 2 + pick(rng, 6), g = 1 + pick(rng, 3), h = 1 + pick(rng, 3);
    const auto kernel = random_kernel(k, g, h, 3000 + i);
    const Eigen::MatrixXd built = build_transform(kernel, n).csr().to_dense();
    if (built != oracle::basis_matrix(kernel, n)) ++mismatched;
  }

  int omega_bad = 0, omega_checked = 0;
  for (int k : {1, 3, 5})
    for (int n : {4, 7, 10}) {
      const int g = 2, h = 2;
      const auto m = build_transform(random_kernel(k, g, h, 17), n);
      for (int p = 0; p < k; ++p)
        for (int q = 0; q < k; ++q)
          for (int z = 0; z < g; ++z)
            for (int y = 0; y < h; ++y) {
              auto got = m.omega_lookup(p, q, z, y);
              std::sort(got.begin(), got.end());
              const auto expected = oracle::enumerate_omega(k, n, g, h, p, q, z, y);
              const auto formula = omega_cardinality(k, n, p + 1, q + 1);
              ++omega_checked;
              if (got != expected || static_cast<std::int64_t>(got.size()) != formula) ++omega_bad;
            }
    }
  std::ostringstream detail;
  detail << "20 geometries, " << mismatched << " differ from basis construction; " << omega_checked
         << " omega sets, " << omega_bad << " disagree with enumeration or formula";
  return {mismatched == 0 && omega_bad == 0, detail.str()};
}

Outcome gradient_correctness() {
  SeededGaussian rng(303);
  const auto start = Clock::now();
  double worst_direct = 0.0, worst_fd = 0.0;
  int instances = 0;
  while (instances < 24) {
    const int k = 1 + pick(rng, 5), g = 1 + pick(rng, 3), h = 1 + pick(rng, 3), n = 2 + pick(rng, 12);
    if (g * n * n > 400) continue;
    const auto kernel = random_kernel(k, g, h, 4000 + instances);
    const RegularizerConfig cfg{1.0, n};
    const auto fast = gradient_fast(kernel, cfg);
    const auto direct = gradient_direct(kernel, cfg);
    const auto fd = gradient_fd(kernel, cfg, kFdStep);
    worst_direct = std::max(worst_direct, relative_error(fast.values.values(), direct.values.values()));
    worst_fd = std::max({worst_fd, relative_error(fast.values.values(), fd.values.values()),
                         relative_error(direct.values.values(), fd.values.values())});
    ++instances;
  }
  const double elapsed = seconds_since(start);
  return {worst_direct <= kFastDirectTol && worst_fd <= kFdTol && elapsed < kGradSeconds,
          fmt("24 instances, fast vs direct %.3g (tol 1e-10), vs FD %.3g (tol 1e-6), %.1f s (limit 60 s)", worst_direct,
              worst_fd, elapsed)};
}

struct FigureRun {
  int g = 0, h = 0;
  RunResult result;
  double seconds = 0.0;
};

std::vector<FigureRun> run_figure_configs() {
  std::vector<FigureRun> runs;
  for (const auto& shape : cli::kFigureShapes) {
    cli::ExperimentSpec spec;  // N = 20, alpha = 1, seed 1, warm-up schedule
    spec.k = 3;
    spec.g = shape[0];
    spec.h = shape[1];
    spec.max_iter = kFigureMaxIter;
    spec.stop_tol = kSigmaTol;
    const auto start = Clock::now();
    FigureRun run{spec.g, spec.h, descend(spec.initial_kernel(), spec.run_config(), StepSchedule::parse(spec.schedule)),
                  0.0};
    run.seconds = seconds_since(start);
    std::printf("  3x3x%dx%d: %s after %d iterations in %.1f s\n", run.g, run.h,
                run.result.reason == StopReason::converged ? "converged" : "stopped", run.result.trajectory.back().iter,
                run.seconds);
    std::fflush(stdout);
    runs.push_back(std::move(run));
  }
  return runs;
}

Outcome figure_reproduction(const std::vector<FigureRun>& runs) {
  bool pass = true;
  std::ostringstream detail;
  for (const auto& run : runs) {
    const auto& last = run.result.trajectory.back();
    const double gap = std::max(std::abs(*last.sigma_max - 1.0), std::abs(*last.sigma_min - 1.0));
    std::vector<const IterationRecord*> early;
    for (const auto& rec : run.result.trajectory)
      if (rec.sigma_max && static_cast<int>(early.size()) < kEarlyRecords) early.push_back(&rec);
    bool decreasing = static_cast<int>(early.size()) == kEarlyRecords;
    int first_rise = -1;
    for (std::size_t i = 1; i < early.size(); ++i) {
      if (*early[i]->sigma_max < *early[i - 1]->sigma_max) continue;
      decreasing = false;
      if (first_rise < 0) first_rise = early[i]->iter;
    }
    const bool ok = gap <= kSigmaTol && last.iter <= kFigureMaxIter && decreasing;
    pass = pass && ok;
    char buf[240];
    std::snprintf(buf, sizeof buf, "3x3x%dx%d gap %.4f (tol 0.05) at iter %d, sigma_max %s over first %d records",
                  run.g, run.h, gap, last.iter, decreasing ? "decreasing" : "NOT decreasing", kEarlyRecords);
    if (first_rise >= 0) std::snprintf(buf + std::strlen(buf), sizeof buf - std::strlen(buf), " (first rise at iter %d)", first_rise);
    detail << (&run == &runs.front() ? "" : "; ") << buf;
  }
  return {pass, detail.str()};
}

Outcome descent_property() {
  bool pass = true;
  std::ostringstream detail;
  for (const auto& shape : cli::kFigureShapes) {
    RunConfig cfg;
    cfg.n = 20;
    cfg.max_iter = kDescentIters;
    cfg.stop_tol = 0.0;
    cfg.spectrum_every = kDescentIters + 1;
    const auto result = descend(random_kernel(3, shape[0], shape[1], 1), cfg, StepSchedule::constant(kDescentLambda));
    int violations = 0;
    const auto& traj = result.trajectory;
    for (std::size_t i = 1; i < traj.size(); ++i)
      if (!(traj[i].penalty < traj[i - 1].penalty + kDescentSlack * std::abs(traj[i - 1].penalty))) ++violations;
    const bool ok = violations == 0 && static_cast<int>(traj.size()) == kDescentIters + 1;
    pass = pass && ok;
    detail << (&shape == &cli::kFigureShapes[0] ? "" : "; ") << "3x3x" << shape[0] << "x" << shape[1] << " "
           << fmt("%.6g -> %.6g", traj.front().penalty, traj.back().penalty) << ", " << violations << " increases";
  }
  return {pass, detail.str()};
}

Outcome penalty_floor(const std::vector<FigureRun>& runs) {
  const auto& run = runs.front();  // 3x3x3x1
  const double floor = (run.g - run.h) * 20.0 * 20.0;
  double lowest = INFINITY;
  for (const auto& rec : run.result.trajectory) lowest = std::min(lowest, rec.penalty);
  return {run.g == 3 && run.h == 1 && lowest >= floor - kFloorSlack,
          fmt("3x3x3x1 lowest penalty %.10g, floor %.0f (slack 1e-6)", lowest, floor)};
}

Outcome spectrum_oracle() {
  SeededGaussian rng(707);
  double worst = 0.0, worst_flat = 0.0;
  int instances = 0;
  while (instances < 30) {
    const int k = 1 + pick(rng, 5), g = 1 + pick(rng, 4), h = 1 + pick(rng, 4), n = 2 + pick(rng, 13);
    if (g * n * n > 400) continue;
    const auto kernel = random_kernel(k, g, h, 5000 + instances);
    const auto dense = oracle_singular_values(oracle::basis_matrix(kernel, n));
    const auto est = singular_extrema(build_transform(kernel, n));
    worst = std::max(worst, std::abs(est.sigma_max - dense(0)) / dense(0));
    const auto flat = oracle_singular_values(oracle::basis_matrix_colmajor(kernel, n));
    worst_flat = std::max(worst_flat, (dense - flat).cwiseAbs().maxCoeff() / dense(0));
    ++instances;
  }
  return {worst <= kSpectrumTol && worst_flat <= kFlattenTol,
          fmt("30 instances, iterative sigma_max rel err %.3g (tol 1e-8), flattening rel diff %.3g (tol 1e-10)", worst,
              worst_flat)};
}

Outcome stationary_point() {
  bool pass = true;
  const int shapes[][2] = {{1, 1}, {3, 1}, {3, 2}, {5, 3}};
  for (const auto& shape : shapes) {
    const auto delta = Kernel::delta(shape[0], shape[1], shape[1]);
    const RegularizerConfig cfg{1.0, 6};
    const auto fast = gradient_fast(delta, cfg);
    const auto direct = gradient_direct(delta, cfg);
    for (std::size_t i = 0; i < delta.size(); ++i)
      pass = pass && fast.values.values()[i] == 0.0 && direct.values.values()[i] == 0.0;
    pass = pass && fast.penalty == 0.0 && penalty(delta, cfg) == 0.0;

    // Twenty explicit steps must leave every iterate and record unchanged.
    PenaltyEvaluator evaluator(delta, cfg);
    Kernel iterate = delta;
    for (int step = 0; step < 20; ++step) {
      const auto grad = evaluator.evaluate(iterate);
      pass = pass && grad.penalty == 0.0 && grad.frobenius_norm() == 0.0;
      for (std::size_t i = 0; i < iterate.size(); ++i) iterate.values()[i] -= 1e-3 * grad.values.values()[i];
      pass = pass && iterate == delta;
    }
    RunConfig run_cfg;
    run_cfg.n = 6;
    run_cfg.max_iter = 20;
    const auto result = descend(delta, run_cfg, StepSchedule::warmup());
    pass = pass && result.kernel == delta && result.trajectory.front().penalty == 0.0 &&
           *result.trajectory.front().sigma_max == 1.0 && *result.trajectory.front().sigma_min == 1.0;
  }
  return {pass, "delta kernels 1x1x1x1, 3x3x1x1, 3x3x2x2, 5x5x3x3 at N=6: gradient, penalty and 20-step trajectory "
                "exactly zero / unchanged"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("convreg_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  cli::ExperimentSpec spec;
  spec.k = 3;
  spec.g = 3;
  spec.h = 6;
  spec.n = 10;
  spec.max_iter = 80;
  spec.quiet = true;
  std::ostringstream log;
  spec.output_path = (dir / "first.csv").string();
  const int first = cli::cmd_optimize(spec, log);
  spec.output_path = (dir / "second.csv").string();
  const int second = cli::cmd_optimize(spec, log);
  const auto a = slurp((dir / "first.csv").string());
  const auto b = slurp((dir / "second.csv").string());
  const bool kernels_equal = slurp((dir / "first.kernel.json").string()) == slurp((dir / "second.kernel.json").string());
  std::filesystem::remove_all(dir);
  const bool pass = first == second && !a.empty() && a == b && kernels_equal;
  return {pass, "two 3x3x3x6 N=10 runs, 80 iterations: CSV (" + std::to_string(a.size()) + " bytes) and kernel " +
                    (pass ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  report(1, "convolution-matrix equivalence", conv_equivalence());
  report(2, "structure oracle", structure_oracle());
  report(3, "gradient correctness", gradient_correctness());
  const auto runs = run_figure_configs();
  report(4, "four-configuration convergence", figure_reproduction(runs));
  report(5, "descent property", descent_property());
  report(6, "wide-matrix penalty floor", penalty_floor(runs));
  report(7, "spectrum oracle", spectrum_oracle());
  report(8, "stationary point", stationary_point());
  report(9, "determinism", determinism());
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
