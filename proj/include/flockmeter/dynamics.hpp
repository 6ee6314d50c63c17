#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "flockmeter/rate.hpp"

namespace flockmeter {

/// Positions and velocities of J particles in R^d at one time. Coordinates
/// are stored row-major: particle j occupies [j*d, (j+1)*d).
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;
  /// J particles at the origin with zero velocity.
  ParticleEnsemble(std::size_t dim, std::size_t count, double time = 0.0);
  /// Throws InvalidArgument unless both arrays hold count*dim finite values.
  ParticleEnsemble(std::size_t dim, std::vector<double> positions, std::vector<double> velocities,
                   double time = 0.0);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  std::span<const double> x(std::size_t j) const { return {positions_.data() + j * dim_, dim_}; }
  std::span<const double> v(std::size_t j) const { return {velocities_.data() + j * dim_, dim_}; }
  std::span<double> x(std::size_t j) { return {positions_.data() + j * dim_, dim_}; }
  std::span<double> v(std::size_t j) { return {velocities_.data() + j * dim_, dim_}; }

  const std::vector<double>& positions() const noexcept { return positions_; }
  const std::vector<double>& velocities() const noexcept { return velocities_; }
  std::vector<double>& positions() noexcept { return positions_; }
  std::vector<double>& velocities() noexcept { return velocities_; }

  /// The first n particles, same time.
  ParticleEnsemble head(std::size_t n) const;
  /// Particles reordered so that result particle j is this particle perm[j].
  ParticleEnsemble permuted(std::span<const std::size_t> perm) const;

  bool all_finite() const;

  friend bool operator==(const ParticleEnsemble&, const ParticleEnsemble&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> positions_;
  std::vector<double> velocities_;
  double time_ = 0.0;
};

/// Communication strength K and rate psi.
struct ModelParams {
  double K = 5.0;
  CommunicationRate rate;

  ModelParams(double K, CommunicationRate rate);
};

/// Product of coordinate-wise uniforms U[-a_i, a_i] (positions) and
/// U[-b_i, b_i] (velocities).
struct InitialLaw {
  std::vector<double> x_halfwidths;
  std::vector<double> v_halfwidths;

  InitialLaw(std::vector<double> x_halfwidths, std::vector<double> v_halfwidths);
  std::size_t dim() const noexcept { return x_halfwidths.size(); }
  /// Support diameters 2|a|_2 and 2|b|_2.
  double support_diameter_x() const;
  double support_diameter_v() const;
};

struct Derivative {
  std::vector<double> dx;
  std::vector<double> dv;
};

struct Diameters {
  double x = 0.0;
  double v = 0.0;
};

struct ConservedQuantities {
  std::vector<double> mean_velocity;
  std::vector<double> barycenter;
};

/// Recorded snapshots of an Euler integration, with per-snapshot
/// observables aligned to `states`.
struct Trajectory {
  ModelParams params;
  double dt = 0.0;
  std::vector<ParticleEnsemble> states;
  std::vector<Diameters> diameters;
  std::vector<ConservedQuantities> conserved;
  std::vector<std::string> warnings;

  std::vector<double> times() const;
  const ParticleEnsemble& final_state() const { return states.back(); }
};

namespace dynamics {

/// dx_j = v_j, dv_j = -(K/J) sum_k psi(|x_j - x_k|) (v_j - v_k).
Derivative rhs(const ParticleEnsemble& state, const ModelParams& params);

/// True when dt K > 1, where an Euler update may leave the convex hull of
/// the current velocities.
bool step_size_exceeds_hull_bound(double dt, const ModelParams& params);

/// One explicit Euler step. Throws NumericalBlowUp(step_index) on a
/// non-finite result.
ParticleEnsemble step(const ParticleEnsemble& state, const ModelParams& params, double dt,
                      std::size_t step_index = 0);

/// n_steps Euler steps, recording every record_every-th state and the final one.
Trajectory simulate(const ParticleEnsemble& init, const ModelParams& params, double dt,
                    std::size_t n_steps, std::size_t record_every = 1);

/// Euler integration calling observe(state, step) at step 0, at every
/// record_every-th step and at the last step. Snapshot times are t0 + k dt.
void integrate(const ParticleEnsemble& init, const ModelParams& params, double dt, std::size_t n_steps,
               std::size_t record_every,
               const std::function<void(const ParticleEnsemble&, std::size_t)>& observe);

/// Same integration, keeping only the final state.
ParticleEnsemble evolve(const ParticleEnsemble& init, const ModelParams& params, double dt,
                        std::size_t n_steps);

Diameters diameters(const ParticleEnsemble& state);
ConservedQuantities conserved(const ParticleEnsemble& state);

/// Each particle repeated N times consecutively.
ParticleEnsemble duplicate(const ParticleEnsemble& state, std::size_t N);

/// J i.i.d. draws from `law`; each particle draws its position coordinates
/// then its velocity coordinates, so the first n particles of a J-sample
/// equal an n-sample from the same stream state.
/// Throws InvalidArgument when dim differs from the law's dimension.
ParticleEnsemble sample_initial(const InitialLaw& law, std::size_t J, std::size_t dim, std::mt19937_64& rng);

}  // namespace dynamics
}  // namespace flockmeter
