#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flockmeter {

/// Output of one replicate: a fixed number of series (each a fixed-length
/// vector) and scalars. Every replicate of a run must have the same shape.
struct ReplicateSample {
  std::vector<std::vector<double>> series;
  std::vector<double> scalars;
};

struct ReplicateFailure {
  std::size_t replicate = 0;
  std::string message;
  bool numerical = false;
};

/// Per-element mean and standard error (sample std / sqrt(M); 0 for M = 1).
struct Statistic {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

struct MonteCarloOptions {
  /// 0 selects hardware concurrency, capped by FLOCKMETER_THREADS.
  std::size_t threads = 0;
  /// Keep going past failed replicates and list them instead of aborting.
  bool continue_on_failure = false;
};

struct MonteCarloResult {
  std::vector<Statistic> series;
  Statistic scalars;
  std::vector<ReplicateSample> samples;  // completed replicates, index order
  std::vector<std::size_t> completed;    // replicate index of each sample
  std::vector<ReplicateFailure> failures;
  std::size_t threads_used = 1;
};

/// Thrown when a replicate fails and continue_on_failure is off. Carries
/// the lowest failing replicate.
class ReplicateError : public std::runtime_error {
 public:
  explicit ReplicateError(ReplicateFailure f)
      : std::runtime_error("replicate " + std::to_string(f.replicate) + " failed: " + f.message),
        failure_(std::move(f)) {}
  const ReplicateFailure& failure() const noexcept { return failure_; }

 private:
  ReplicateFailure failure_;
};

using ReplicateTask = std::function<ReplicateSample(std::size_t replicate, std::uint64_t master_seed)>;

/// Runs M replicates, in parallel when allowed, and folds them in
/// replicate-index order, so the result does not depend on scheduling.
MonteCarloResult monte_carlo(const ReplicateTask& task, std::size_t M, std::uint64_t master_seed,
                             const MonteCarloOptions& options = {});

/// Mean and standard error of one column of values, folded in order.
void mean_and_stderr(const std::vector<double>& values, double& mean, double& stderr_);

/// Thread count from FLOCKMETER_THREADS (unset or invalid: no cap).
std::size_t resolve_thread_count(std::size_t requested, std::size_t M);

}  // namespace flockmeter
