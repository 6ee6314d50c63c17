#include "flockmeter/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <thread>

#include "flockmeter/error.hpp"

namespace flockmeter {

void mean_and_stderr(const std::vector<double>& values, double& mean, double& stderr_) {
  const std::size_t m = values.size();
  mean = 0.0;
  stderr_ = 0.0;
  if (m == 0) return;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);
  if (m == 1) return;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  stderr_ = std::sqrt(ss / static_cast<double>(m - 1)) / std::sqrt(static_cast<double>(m));
}

std::size_t resolve_thread_count(std::size_t requested, std::size_t M) {
  std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FLOCKMETER_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(M, 1));
}

namespace {

Statistic fold(const std::vector<ReplicateSample>& samples, auto&& column_of, std::size_t length) {
  Statistic s{std::vector<double>(length), std::vector<double>(length)};
  std::vector<double> column(samples.size());
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t r = 0; r < samples.size(); ++r) column[r] = column_of(samples[r])[i];
    mean_and_stderr(column, s.mean[i], s.stderr_[i]);
  }
  return s;
}

}  // namespace

MonteCarloResult monte_carlo(const ReplicateTask& task, std::size_t M, std::uint64_t master_seed,
                             const MonteCarloOptions& options) {
  if (M == 0) throw InvalidArgument("monte_carlo: M must be >= 1");
  std::vector<std::optional<ReplicateSample>> slots(M);
  std::vector<std::optional<ReplicateFailure>> errors(M);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t r = next.fetch_add(1);
      if (r >= M) return;
      try {
        slots[r] = task(r, master_seed);
      } catch (const NumericalBlowUp& e) {
        errors[r] = ReplicateFailure{r, e.what(), true};
      } catch (const std::exception& e) {
        errors[r] = ReplicateFailure{r, e.what(), false};
      }
      if (errors[r] && !options.continue_on_failure) stop.store(true);
    }
  };

  const std::size_t n_threads = resolve_thread_count(options.threads, M);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  MonteCarloResult out;
  out.threads_used = n_threads;
  for (std::size_t r = 0; r < M; ++r) {
    if (errors[r]) {
      if (!options.continue_on_failure) throw ReplicateError(*errors[r]);
      out.failures.push_back(*errors[r]);
    } else if (slots[r]) {
      out.samples.push_back(std::move(*slots[r]));
      out.completed.push_back(r);
    }
  }
  if (out.samples.empty()) throw Error("monte_carlo: every replicate failed");

  const auto& first = out.samples.front();
  for (const auto& s : out.samples) {
    if (s.series.size() != first.series.size() || s.scalars.size() != first.scalars.size()) {
      throw Error("monte_carlo: replicates returned differently shaped samples");
    }
    for (std::size_t k = 0; k < s.series.size(); ++k) {
      if (s.series[k].size() != first.series[k].size()) throw Error("monte_carlo: series length differs");
    }
  }
  for (std::size_t k = 0; k < first.series.size(); ++k) {
    out.series.push_back(fold(out.samples, [k](const ReplicateSample& s) -> const auto& { return s.series[k]; },
                              first.series[k].size()));
  }
  out.scalars = fold(out.samples, [](const ReplicateSample& s) -> const auto& { return s.scalars; },
                     first.scalars.size());
  return out;
}

}  // namespace flockmeter
