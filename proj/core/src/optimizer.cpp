#include "convreg/optimizer.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "convreg/format.hpp"
#include "convreg/penalty.hpp"
#include "convreg/spectrum.hpp"

namespace convreg {

StepSchedule::StepSchedule(std::vector<Stage> stages, double fallback)
    : stages_(std::move(stages)), fallback_(fallback) {
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (!(stages_[i].lambda > 0.0)) throw ConfigError("step sizes must be positive");
    if (i > 0 && stages_[i].threshold <= stages_[i - 1].threshold) {
      throw ConfigError("schedule thresholds must be strictly increasing");
    }
  }
  if (!(fallback_ > 0.0)) throw ConfigError("step sizes must be positive");
}

StepSchedule StepSchedule::warmup() { return StepSchedule({{10, 1e-5}, {20, 1e-4}}, 1e-3); }

StepSchedule StepSchedule::constant(double lambda) { return StepSchedule({}, lambda); }

namespace {

double parse_number(const std::string& text) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError("schedule: '" + text + "' is not a number");
  }
  return value;
}

}  // namespace

StepSchedule StepSchedule::parse(const std::string& text) {
  std::vector<Stage> stages;
  std::optional<double> fallback;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      if (fallback) throw ConfigError("schedule: more than one default step");
      fallback = parse_number(item);
      continue;
    }
    const std::string key = item.substr(0, colon);
    const double lambda = parse_number(item.substr(colon + 1));
    if (key == "default") {
      if (fallback) throw ConfigError("schedule: more than one default step");
      fallback = lambda;
    } else {
      const double threshold = parse_number(key);
      if (threshold != std::floor(threshold)) throw ConfigError("schedule: thresholds must be integers");
      stages.push_back({static_cast<int>(threshold), lambda});
    }
  }
  if (!fallback) throw ConfigError("schedule: missing 'default:<lambda>'");
  return StepSchedule(std::move(stages), *fallback);
}

double StepSchedule::lambda(int iter) const {
  for (const auto& stage : stages_) {
    if (iter < stage.threshold) return stage.lambda;
  }
  return fallback_;
}

std::string StepSchedule::to_string() const {
  std::string out;
  for (const auto& stage : stages_) out += std::to_string(stage.threshold) + ":" + format_g17(stage.lambda) + ",";
  return out + "default:" + format_g17(fallback_);
}

double schedule_lambda(const StepSchedule& schedule, int iter) {
  if (iter < 0) throw ConfigError("iteration index must be non-negative");
  return schedule.lambda(iter);
}

RunConfig RunConfig::experiment_defaults() {
  RunConfig cfg;
  cfg.gradient_scale = 0.5;
  return cfg;
}

int RunConfig::effective_spectrum_every() const {
  if (spectrum_every > 0) return spectrum_every;
  return n <= 12 ? 1 : 5;
}

void RunConfig::validate() const {
  RegularizerConfig{alpha, n}.validate();
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (spectrum_every < 0) throw ConfigError("spectrum_every must be at least 1 (or 0 for automatic)");
  if (!(stop_tol >= 0.0)) throw ConfigError("stop_tol must be non-negative");
  if (!(spectrum_tol > 0.0)) throw ConfigError("spectrum_tol must be positive");
  if (!(divergence_factor > 1.0)) throw ConfigError("divergence_factor must exceed 1");
  if (!(gradient_scale > 0.0) || !std::isfinite(gradient_scale)) {
    throw ConfigError("gradient_scale must be a positive finite value");
  }
}

RunResult descend(const Kernel& initial, const RunConfig& cfg, const StepSchedule& schedule,
                  const RecordObserver& observer) {
  cfg.validate();
  const int every = cfg.effective_spectrum_every();

  RunResult result;
  result.kernel = initial;
  PenaltyEvaluator evaluator(initial, RegularizerConfig{cfg.alpha, cfg.n});

  auto diverged = [&](const std::string& why) {
    return DivergenceError(why, result.kernel, std::move(result.trajectory));
  };

  for (int iter = 0;; ++iter) {
    const PenaltyGradient grad = evaluator.evaluate(result.kernel);

    IterationRecord rec;
    rec.iter = iter;
    rec.lambda = schedule.lambda(iter);
    rec.penalty = grad.penalty;
    rec.grad_fro = grad.frobenius_norm();
    if (!std::isfinite(rec.penalty) || !std::isfinite(rec.grad_fro)) {
      result.trajectory.push_back(rec);
      throw diverged("non-finite penalty or gradient at iteration " + std::to_string(iter));
    }
    const bool blew_up = !result.trajectory.empty() &&
                         rec.penalty > cfg.divergence_factor * result.trajectory.back().penalty &&
                         rec.penalty > 0.0;

    const bool last = iter == cfg.max_iter;
    bool converged = false;
    if (!blew_up && (last || iter % every == 0)) {
      const auto est = singular_extrema(evaluator.matrix(), cfg.spectrum_tol);
      rec.sigma_max = est.sigma_max;
      rec.sigma_min = est.sigma_min;
      converged = objective_gap(est) <= cfg.stop_tol;
    }
    result.trajectory.push_back(rec);
    if (observer) observer(rec);

    if (blew_up) {
      throw diverged("penalty grew more than " + format_g17(cfg.divergence_factor) +
                     "x at iteration " + std::to_string(iter));
    }
    if (converged) {
      result.reason = StopReason::converged;
      return result;
    }
    if (last) {
      result.reason = StopReason::max_iter;
      return result;
    }

    auto k = result.kernel.values();
    const auto g = grad.values.values();
    const double step = rec.lambda * cfg.gradient_scale;
    for (std::size_t i = 0; i < k.size(); ++i) k[i] -= step * g[i];
  }
}

}  // namespace convreg
