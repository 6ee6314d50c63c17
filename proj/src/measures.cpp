#include "flockmeter/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "flockmeter/assignment.hpp"
#include "flockmeter/error.hpp"

namespace flockmeter {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> points)
    : dim_(dim), points_(std::move(points)) {
  if (dim_ == 0) throw InvalidArgument("EmpiricalMeasure: dim must be positive");
  if (points_.empty() || points_.size() % dim_ != 0) {
    throw InvalidArgument("EmpiricalMeasure: need n >= 1 points of dimension dim");
  }
  if (!std::ranges::all_of(points_, [](double c) { return std::isfinite(c); })) {
    throw InvalidArgument("EmpiricalMeasure: points must be finite");
  }
}

std::vector<double> EmpiricalMeasure::mean() const {
  std::vector<double> m(dim_, 0.0);
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim_; ++c) m[c] += points_[i * dim_ + c];
  }
  for (double& c : m) c /= static_cast<double>(n);
  return m;
}

double AssignmentResult::distance() const { return std::sqrt(cost); }

namespace measures {
namespace {

// Neumaier-compensated sum, used for long cost sums.
double compensated_sum(std::span<const double> terms) {
  double sum = 0.0;
  double comp = 0.0;
  for (double t : terms) {
    const double s = sum + t;
    comp += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
    sum = s;
  }
  return sum + comp;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double e = a[c] - b[c];
    s += e * e;
  }
  return s;
}

AssignmentResult matched_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t mu_clones,
                              std::size_t nu_clones, std::vector<std::size_t> perm) {
  const std::size_t n = mu.size() * mu_clones;
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = squared_distance(mu.point(i / mu_clones), nu.point(perm[i] / nu_clones));
  const double total = n > 1024 ? compensated_sum(terms) : std::accumulate(terms.begin(), terms.end(), 0.0);
  return {total / static_cast<double>(n), std::move(perm)};
}

}  // namespace

EmpiricalMeasure empirical(const ParticleEnsemble& state) {
  const std::size_t d = state.dim();
  std::vector<double> pts(state.count() * 2 * d);
  for (std::size_t j = 0; j < state.count(); ++j) {
    std::ranges::copy(state.x(j), pts.begin() + static_cast<std::ptrdiff_t>(j * 2 * d));
    std::ranges::copy(state.v(j), pts.begin() + static_cast<std::ptrdiff_t>(j * 2 * d + d));
  }
  return EmpiricalMeasure(2 * d, std::move(pts));
}

EmpiricalMeasure recenter_measure(const EmpiricalMeasure& mu) {
  const auto m = mu.mean();
  std::vector<double> pts = mu.points();
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] -= m[i % mu.dim()];
  return EmpiricalMeasure(mu.dim(), std::move(pts));
}

ParticleEnsemble recenter_config(const ParticleEnsemble& state) {
  const auto c = dynamics::conserved(state);
  ParticleEnsemble out = state;
  const std::size_t d = state.dim();
  for (std::size_t i = 0; i < out.positions().size(); ++i) {
    out.positions()[i] -= c.barycenter[i % d];
    out.velocities()[i] -= c.mean_velocity[i % d];
  }
  return out;
}

ParticleEnsemble recenter_velocities(const ParticleEnsemble& state) {
  const auto c = dynamics::conserved(state);
  ParticleEnsemble out = state;
  const std::size_t d = state.dim();
  for (std::size_t i = 0; i < out.velocities().size(); ++i) out.velocities()[i] -= c.mean_velocity[i % d];
  return out;
}

EmpiricalMeasure clone(const EmpiricalMeasure& mu, std::size_t N) {
  if (N == 0) throw InvalidArgument("clone: N must be >= 1");
  std::vector<double> pts;
  pts.reserve(mu.points().size() * N);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t r = 0; r < N; ++r) pts.insert(pts.end(), mu.point(i).begin(), mu.point(i).end());
  }
  return EmpiricalMeasure(mu.dim(), std::move(pts));
}

AssignmentResult w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t size_cap) {
  if (mu.dim() != nu.dim()) throw InvalidArgument("w2: dimension mismatch");
  const std::size_t n = mu.size();
  const std::size_t m = nu.size();
  const std::size_t common = std::lcm(n, m);
  if (common > size_cap) throw SizeCapExceeded(common, size_cap);
  const std::size_t mu_clones = common / n;
  const std::size_t nu_clones = common / m;

  // One stored row per distinct point of mu, spanning all cloned columns.
  std::vector<double> rows(n * common);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = rows.data() + i * common;
    for (std::size_t k = 0; k < m; ++k) {
      const double c = squared_distance(mu.point(i), nu.point(k));
      std::fill_n(row + k * nu_clones, nu_clones, c);
    }
  }
  std::vector<std::size_t> row_index(common);
  for (std::size_t r = 0; r < common; ++r) row_index[r] = r / mu_clones;

  auto sol = assignment::solve_shared_rows(rows, row_index, common);
  return matched_cost(mu, nu, mu_clones, nu_clones, std::move(sol.row_to_col));
}

AssignmentResult w2_bruteforce(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() != nu.dim()) throw InvalidArgument("w2_bruteforce: dimension mismatch");
  if (mu.size() != nu.size()) throw InvalidArgument("w2_bruteforce: sizes must be equal");
  const std::size_t n = mu.size();
  if (n > 8) throw InvalidArgument("w2_bruteforce: n must be <= 8");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_sum = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += squared_distance(mu.point(i), nu.point(perm[i]));
    if (s < best_sum) {
      best_sum = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best_sum / static_cast<double>(n), std::move(best)};
}

double squared_config_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("config distance: length mismatch");
  return squared_distance(a, b);
}

double normalized_config_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                                  Normalization normalization) {
  if (dim == 0 || a.size() % dim != 0) throw InvalidArgument("config distance: bad dimension");
  if (a.size() != b.size()) throw InvalidArgument("config distance: length mismatch");
  const double n = static_cast<double>(a.size() / dim);
  const double s = squared_distance(a, b);
  return normalization == Normalization::Rms ? std::sqrt(s / n) : std::sqrt(s) / n;
}

}  // namespace measures
}  // namespace flockmeter
