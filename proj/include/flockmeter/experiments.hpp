#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flockmeter/dynamics.hpp"
#include "flockmeter/monte_carlo.hpp"
#include "flockmeter/rate.hpp"
#include "flockmeter/theory.hpp"

namespace flockmeter {

/// One experiment definition. Defaults are the reference flocking setup:
/// d = 2, K = 5, psi(r) = (1 + r^2)^(-1/2), x ~ U[-3, 3]^2, v ~ U[-1, 1]^2,
/// dt = 0.05, T = 10, J_inf = 1000, M = 400.
struct ExperimentConfig {
  std::size_t dim = 2;
  double K = 5.0;
  RateSpec rate = RateSpec::gamma_family(0.5);
  std::vector<double> x_halfwidths{3.0, 3.0};
  std::vector<double> v_halfwidths{1.0, 1.0};
  double dt = 0.05;
  double T = 10.0;
  std::vector<std::size_t> J_list{10, 50, 100, 250, 500};
  std::size_t J_inf = 1000;
  std::size_t M = 400;
  std::uint64_t seed = 1;
  std::size_t record_every = 1;

  /// Throws ConfigError naming the first offending key.
  void validate() const;
  /// round(T / dt); validate() checks T is a whole number of steps.
  std::size_t n_steps() const;
  ModelParams model() const;
  InitialLaw initial_law() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// A time series aggregated over replicates. J = 0 when not tied to a size.
struct SeriesSummary {
  std::string name;
  std::size_t J = 0;
  std::vector<double> mean;
  std::vector<double> stderr_;
};

struct ExperimentReport {
  std::string kind;  // coupling | w2rate | stability | telescope
  ExperimentConfig config;
  std::vector<std::uint64_t> replicate_seeds;
  std::vector<double> times;  // recorded times (t_n for telescope increments)
  std::vector<SeriesSummary> series;
  std::map<std::string, double> scalars;
  /// Per-replicate diagnostics, indexed like replicate_seeds minus failures.
  std::map<std::string, std::vector<double>> replicate_values;
  std::vector<ReplicateFailure> failures;
  std::vector<std::string> notes;
  double wall_seconds = 0.0;
  std::string code_version;
  std::string generator;

  const SeriesSummary& find(const std::string& name, std::size_t J = 0) const;
};

namespace experiments {

/// Synchronous coupling: a J_inf-particle system stands in for the
/// mean-field law; for each J the first J of its initial particles are
/// evolved as their own system. Series "errX"/"errV" per J hold
/// sum_{j<=J} |Delta x_j^J - Delta x_j^inf|^2 (velocities likewise), with
/// both configurations recentred by the mean over their first J particles.
ExperimentReport run_coupling(const ExperimentConfig& config, const MonteCarloOptions& options = {});

/// E[W2^2(R mu^J_t, R mu^ref_t)] for each J against an independent
/// reference sample of size J_inf; scalar "slope_t0" is the least-squares
/// slope of log E[W2^2] against log J at t = 0.
ExperimentReport run_w2_rate(const ExperimentConfig& config, const MonteCarloOptions& options = {});

/// Two J-systems (J = J_list.front()) with zero mean velocity, one a
/// uniform perturbation of the other; tracks their distance, the Lyapunov
/// pair (L_X, L_V) and sup_t dist(t) / dist(0) against c_stab.
ExperimentReport run_stability(const ExperimentConfig& config, double perturbation_scale,
                               const MonteCarloOptions& options = {});

/// Restarts a J-system (J = J_list.front()) from the recentred proxy state
/// at each integer time t_n and evolves it to T. Series "increment" holds
/// E_n = rms |Z^{n-1}_T - Z^n_T| for n = 1..T.
ExperimentReport run_telescope(const ExperimentConfig& config, const MonteCarloOptions& options = {});

/// Least-squares slope of ys against xs.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace experiments
}  // namespace flockmeter
