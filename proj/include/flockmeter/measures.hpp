#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flockmeter/dynamics.hpp"

namespace flockmeter {

/// Equal-weight point cloud of n points in R^dim, stored row-major.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::size_t dim, std::vector<double> points);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return points_.size() / dim_; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
  const std::vector<double>& points() const noexcept { return points_; }
  std::vector<double> mean() const;

 private:
  std::size_t dim_;
  std::vector<double> points_;
};

struct AssignmentResult {
  double cost = 0.0;                     // (1/n) sum_j |p_j - q_sigma(j)|^2
  std::vector<std::size_t> permutation;  // sigma, on the (cloned) common size
  double distance() const;               // sqrt(cost)
};

namespace measures {

inline constexpr std::size_t kDefaultSizeCap = 4096;

/// Points (x_j, v_j) in R^{2d}.
EmpiricalMeasure empirical(const ParticleEnsemble& state);

/// Every point shifted by minus the mean.
EmpiricalMeasure recenter_measure(const EmpiricalMeasure& mu);

/// Positions and velocities each shifted by their own ensemble mean
/// (Delta x_j, Delta v_j). empirical(recenter_config(s)) equals
/// recenter_measure(empirical(s)).
ParticleEnsemble recenter_config(const ParticleEnsemble& state);

/// Velocities shifted to zero mean; positions untouched.
ParticleEnsemble recenter_velocities(const ParticleEnsemble& state);

/// Each point repeated N times consecutively.
EmpiricalMeasure clone(const EmpiricalMeasure& mu, std::size_t N);

/// Exact squared W2 between equal-weight empirical measures, by linear
/// assignment on the squared-distance matrix. Unequal sizes n, m are
/// cloned to lcm(n, m) points first; throws SizeCapExceeded above
/// size_cap and InvalidArgument on dimension mismatch.
AssignmentResult w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                    std::size_t size_cap = kDefaultSizeCap);

/// Minimum over all n! matchings; equal sizes, n <= 8.
AssignmentResult w2_bruteforce(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

enum class Normalization {
  Rms,           // (1/n sum |a_j - b_j|^2)^(1/2)
  PaperLiteral,  // (1/n) (sum |a_j - b_j|^2)^(1/2)
};

/// Distance between two configurations of n vectors in R^dim (row-major).
double normalized_config_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                                  Normalization normalization = Normalization::Rms);

/// sum_j |a_j - b_j|^2 over all coordinates.
double squared_config_distance(std::span<const double> a, std::span<const double> b);

}  // namespace measures
}  // namespace flockmeter
