#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "convreg/tensor.hpp"

namespace convreg {

/// Piecewise-constant step size: the first stage with iter < threshold wins,
/// otherwise `fallback`.
class StepSchedule {
 public:
  struct Stage {
    int threshold;
    double lambda;
  };

  StepSchedule(std::vector<Stage> stages, double fallback);

  /// 1e-5 while iter < 10, 1e-4 while iter < 20, then 1e-3.
  static StepSchedule warmup();
  static StepSchedule constant(double lambda);
  /// Parses "t1:l1,t2:l2,default:l3". A lone number is a constant schedule.
  static StepSchedule parse(const std::string& text);

  double lambda(int iter) const;

  const std::vector<Stage>& stages() const { return stages_; }
  double fallback() const { return fallback_; }
  std::string to_string() const;

 private:
  std::vector<Stage> stages_;
  double fallback_;
};

double schedule_lambda(const StepSchedule& schedule, int iter);

struct RunConfig {
  double alpha = 1.0;
  int n = 20;
  int max_iter = 500;
  double stop_tol = 0.05;  ///< on objective_gap; stop once gap <= stop_tol
  /// Spectra are recorded every j-th step (and always on the last one).
  /// 0 picks 1 for N <= 12 and 5 otherwise.
  int spectrum_every = 0;
  std::uint64_t seed = 1;
  double spectrum_tol = 1e-10;
  /// Abort when the penalty grows by more than this factor between steps.
  double divergence_factor = 10.0;
  /// The update is K <- K - lambda * gradient_scale * dR/dK. 1 steps along
  /// the full derivative; 0.5 steps along the half-derivative Omega sums,
  /// the scale the warm-up schedule is tuned for.
  double gradient_scale = 1.0;

  /// N = 20, alpha = 1, half-derivative steps, 500 iterations, stop at gap 0.05.
  static RunConfig experiment_defaults();

  int effective_spectrum_every() const;
  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double lambda = 0.0;
  double penalty = 0.0;
  double grad_fro = 0.0;
  std::optional<double> sigma_max;
  std::optional<double> sigma_min;
};

enum class StopReason { converged, max_iter };

struct RunResult {
  Kernel kernel;
  std::vector<IterationRecord> trajectory;
  StopReason reason = StopReason::max_iter;
};

/// Non-finite or exploding penalty. Carries everything recorded so far.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Kernel kernel, std::vector<IterationRecord> trajectory)
      : std::runtime_error(what), kernel_(std::move(kernel)), trajectory_(std::move(trajectory)) {}

  const Kernel& kernel() const { return kernel_; }
  const std::vector<IterationRecord>& trajectory() const { return trajectory_; }

 private:
  Kernel kernel_;
  std::vector<IterationRecord> trajectory_;
};

using RecordObserver = std::function<void(const IterationRecord&)>;

/// Gradient descent K <- K - lambda(iter) * dR/dK.
///
/// Iterate `iter` is evaluated and recorded before its update, so a run that
/// exhausts max_iter records iterates 0..max_iter. The run stops early once
/// a recorded objective gap is <= stop_tol.
RunResult descend(const Kernel& initial, const RunConfig& cfg, const StepSchedule& schedule,
                  const RecordObserver& observer = {});

}  // namespace convreg
