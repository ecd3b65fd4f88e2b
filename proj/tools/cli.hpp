#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "convreg/optimizer.hpp"
#include "convreg/tensor.hpp"

namespace convreg::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,        ///< converged / check passed / file written
  kCheckFailed = 1,    ///< check-grad error above threshold
  kMaxIter = 2,        ///< optimize hit --max-iter before --stop-tol
  kDiverged = 3,       ///< optimize aborted on a non-finite or exploding penalty
  kIoError = 4,        ///< a file could not be read or written
  kUsageError = 64,    ///< bad flags or inconsistent geometry
};

struct ExperimentSpec {
  int k = 3;
  int g = 3;
  int h = 1;
  int n = 20;
  double alpha = 1.0;
  std::uint64_t seed = 1;
  std::string schedule = "10:1e-5,20:1e-4,default:1e-3";
  int max_iter = 500;
  double stop_tol = 0.05;
  int spectrum_every = 0;
  double gradient_scale = 0.5;
  bool init_delta = false;
  std::string init_path;  ///< kernel JSON to start from instead of a random draw
  std::string output_path;
  std::string kernel_output_path;
  bool quiet = false;

  /// Initial kernel: --init file, delta, or seeded normal draw (in that order).
  Kernel initial_kernel() const;
  RunConfig run_config() const;
};

/// Trajectory CSV: header "iter,lambda,penalty,grad_fro,sigma_max,sigma_min",
/// one row per record, 17 significant digits, empty sigma fields when the
/// spectrum was not computed for that step.
void write_trajectory_csv(std::ostream& out, const std::vector<IterationRecord>& trajectory);
std::vector<IterationRecord> read_trajectory_csv(std::istream& in);

/// Default kernel output next to the trajectory: "<csv minus .csv>.kernel.json".
std::string kernel_path_for(const std::string& csv_path);

int cmd_optimize(const ExperimentSpec& spec, std::ostream& log);

struct CheckGradReport {
  double fast_vs_direct = 0.0;
  double fast_vs_fd = 0.0;
  double direct_vs_fd = 0.0;
  double worst() const;
};
inline constexpr double kCheckGradThreshold = 1e-5;

/// `corrupt` perturbs the fast gradient before comparing (negative control).
CheckGradReport check_grad(const ExperimentSpec& spec, double fd_step, bool corrupt = false);
int cmd_check_grad(const ExperimentSpec& spec, double fd_step, bool corrupt, std::ostream& out);

int cmd_dump_matrix(const ExperimentSpec& spec, std::ostream& out);

/// The four 3x3 kernel shapes (g, h) run by reproduce-figure1.
inline constexpr int kFigureShapes[4][2] = {{3, 1}, {1, 3}, {3, 6}, {6, 3}};
std::string figure_csv_name(int g, int h);
int cmd_reproduce_figure1(const ExperimentSpec& base, const std::string& out_dir, std::ostream& log);

/// Parses argv and dispatches to a subcommand. Returns the exit code.
int run(int argc, char** argv);

}  // namespace convreg::cli
