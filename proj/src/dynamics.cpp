#include "flockmeter/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flockmeter/error.hpp"
#include "flockmeter/rng.hpp"

namespace flockmeter {

ParticleEnsemble::ParticleEnsemble(std::size_t dim, std::size_t count, double time)
    : dim_(dim), count_(count), positions_(dim * count, 0.0), velocities_(dim * count, 0.0), time_(time) {
  if (dim == 0) throw InvalidArgument("ParticleEnsemble: dim must be positive");
}

ParticleEnsemble::ParticleEnsemble(std::size_t dim, std::vector<double> positions,
                                   std::vector<double> velocities, double time)
    : dim_(dim), positions_(std::move(positions)), velocities_(std::move(velocities)), time_(time) {
  if (dim == 0) throw InvalidArgument("ParticleEnsemble: dim must be positive");
  if (positions_.size() % dim != 0 || positions_.size() != velocities_.size()) {
    throw InvalidArgument("ParticleEnsemble: positions and velocities must both hold J*d coordinates");
  }
  count_ = positions_.size() / dim;
  if (!all_finite()) throw InvalidArgument("ParticleEnsemble: coordinates must be finite");
  if (!std::isfinite(time_) || time_ < 0.0) throw InvalidArgument("ParticleEnsemble: time must be finite, >= 0");
}

ParticleEnsemble ParticleEnsemble::head(std::size_t n) const {
  if (n > count_) throw InvalidArgument("ParticleEnsemble::head: n exceeds particle count");
  ParticleEnsemble out(dim_, n, time_);
  std::copy_n(positions_.begin(), n * dim_, out.positions_.begin());
  std::copy_n(velocities_.begin(), n * dim_, out.velocities_.begin());
  return out;
}

ParticleEnsemble ParticleEnsemble::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != count_) throw InvalidArgument("ParticleEnsemble::permuted: wrong permutation length");
  ParticleEnsemble out(dim_, count_, time_);
  for (std::size_t j = 0; j < count_; ++j) {
    std::ranges::copy(x(perm[j]), out.x(j).begin());
    std::ranges::copy(v(perm[j]), out.v(j).begin());
  }
  return out;
}

bool ParticleEnsemble::all_finite() const {
  auto finite = [](double c) { return std::isfinite(c); };
  return std::ranges::all_of(positions_, finite) && std::ranges::all_of(velocities_, finite);
}

ModelParams::ModelParams(double K_, CommunicationRate rate_) : K(K_), rate(std::move(rate_)) {
  if (!(K > 0.0) || !std::isfinite(K)) throw InvalidArgument("ModelParams: K must be positive and finite");
}

InitialLaw::InitialLaw(std::vector<double> xh, std::vector<double> vh)
    : x_halfwidths(std::move(xh)), v_halfwidths(std::move(vh)) {
  if (x_halfwidths.empty() || x_halfwidths.size() != v_halfwidths.size()) {
    throw InvalidArgument("InitialLaw: need d position and d velocity halfwidths");
  }
  auto positive = [](double h) { return std::isfinite(h) && h > 0.0; };
  if (!std::ranges::all_of(x_halfwidths, positive) || !std::ranges::all_of(v_halfwidths, positive)) {
    throw InvalidArgument("InitialLaw: halfwidths must be > 0");
  }
}

namespace {
double two_norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}
}  // namespace

double InitialLaw::support_diameter_x() const { return 2.0 * two_norm(x_halfwidths); }
double InitialLaw::support_diameter_v() const { return 2.0 * two_norm(v_halfwidths); }

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(states.size());
  for (const auto& s : states) t.push_back(s.time());
  return t;
}

namespace dynamics {
namespace {

// Pairwise alignment sum, each unordered pair visited once and applied with
// opposite signs to both rows. `acc` receives sum_k w_jk (v_k - v_j).
template <typename Weight>
void accumulate_alignment(const ParticleEnsemble& s, Weight&& weight, std::vector<double>& acc) {
  const std::size_t d = s.dim();
  const std::size_t n = s.count();
  const double* x = s.positions().data();
  const double* v = s.velocities().data();
  double* a = acc.data();
  for (std::size_t j = 0; j < n; ++j) {
    const double* xj = x + j * d;
    const double* vj = v + j * d;
    double* aj = a + j * d;
    for (std::size_t k = j + 1; k < n; ++k) {
      const double* xk = x + k * d;
      const double* vk = v + k * d;
      double r2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double dx = xj[c] - xk[c];
        r2 += dx * dx;
      }
      const double w = weight(r2);
      double* ak = a + k * d;
      for (std::size_t c = 0; c < d; ++c) {
        const double f = w * (vk[c] - vj[c]);
        aj[c] += f;
        ak[c] -= f;
      }
    }
  }
}

void alignment(const ParticleEnsemble& s, const CommunicationRate& rate, std::vector<double>& acc) {
  if (rate.kind() == CommunicationRate::Kind::GammaFamily) {
    const double g = rate.gamma();
    if (g == 0.5) return accumulate_alignment(s, [](double r2) { return 1.0 / std::sqrt(1.0 + r2); }, acc);
    if (g == 1.0) return accumulate_alignment(s, [](double r2) { return 1.0 / (1.0 + r2); }, acc);
    if (g == 0.0) return accumulate_alignment(s, [](double) { return 1.0; }, acc);
    return accumulate_alignment(s, [g](double r2) { return std::pow(1.0 + r2, -g); }, acc);
  }
  accumulate_alignment(s, [&rate](double r2) { return rate.from_squared(r2); }, acc);
}

}  // namespace

Derivative rhs(const ParticleEnsemble& state, const ModelParams& params) {
  Derivative out{state.velocities(), std::vector<double>(state.velocities().size(), 0.0)};
  alignment(state, params.rate, out.dv);
  const double scale = params.K / static_cast<double>(state.count());
  for (double& c : out.dv) c *= scale;
  return out;
}

bool step_size_exceeds_hull_bound(double dt, const ModelParams& params) { return dt * params.K > 1.0; }

ParticleEnsemble step(const ParticleEnsemble& state, const ModelParams& params, double dt,
                      std::size_t step_index) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  const Derivative d = rhs(state, params);
  ParticleEnsemble next = state;
  auto& x = next.positions();
  auto& v = next.velocities();
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] += dt * d.dx[i];
    v[i] += dt * d.dv[i];
  }
  next.set_time(state.time() + dt);
  if (!next.all_finite()) throw NumericalBlowUp(step_index);
  return next;
}

Trajectory simulate(const ParticleEnsemble& init, const ModelParams& params, double dt, std::size_t n_steps,
                    std::size_t record_every) {
  if (!(dt > 0.0)) throw InvalidArgument("simulate: dt must be positive");
  if (record_every == 0) throw InvalidArgument("simulate: record_every must be positive");
  Trajectory traj{params, dt, {}, {}, {}, {}};
  if (step_size_exceeds_hull_bound(dt, params)) {
    std::ostringstream msg;
    msg << "dt*K = " << dt * params.K << " > 1: velocity diameter is not guaranteed to contract";
    traj.warnings.push_back(msg.str());
  }
  integrate(init, params, dt, n_steps, record_every, [&traj](const ParticleEnsemble& s, std::size_t) {
    traj.states.push_back(s);
    traj.diameters.push_back(diameters(s));
    traj.conserved.push_back(conserved(s));
  });
  return traj;
}

void integrate(const ParticleEnsemble& init, const ModelParams& params, double dt, std::size_t n_steps,
               std::size_t record_every,
               const std::function<void(const ParticleEnsemble&, std::size_t)>& observe) {
  if (!(dt > 0.0)) throw InvalidArgument("integrate: dt must be positive");
  if (record_every == 0) throw InvalidArgument("integrate: record_every must be positive");
  const double t0 = init.time();
  ParticleEnsemble current = init;
  observe(current, 0);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    current = step(current, params, dt, n);
    // Times are t0 + n dt, not an accumulated sum of dt.
    current.set_time(t0 + static_cast<double>(n) * dt);
    if (n % record_every == 0 || n == n_steps) observe(current, n);
  }
}

ParticleEnsemble evolve(const ParticleEnsemble& init, const ModelParams& params, double dt, std::size_t n_steps) {
  const double t0 = init.time();
  ParticleEnsemble current = init;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    current = step(current, params, dt, n);
    current.set_time(t0 + static_cast<double>(n) * dt);
  }
  return current;
}

Diameters diameters(const ParticleEnsemble& state) {
  const std::size_t d = state.dim();
  const std::size_t n = state.count();
  double best_x = 0.0;
  double best_v = 0.0;
  const double* x = state.positions().data();
  const double* v = state.velocities().data();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      double rx = 0.0;
      double rv = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double ex = x[j * d + c] - x[k * d + c];
        const double ev = v[j * d + c] - v[k * d + c];
        rx += ex * ex;
        rv += ev * ev;
      }
      best_x = std::max(best_x, rx);
      best_v = std::max(best_v, rv);
    }
  }
  return {std::sqrt(best_x), std::sqrt(best_v)};
}

ConservedQuantities conserved(const ParticleEnsemble& state) {
  const std::size_t d = state.dim();
  const std::size_t n = state.count();
  ConservedQuantities out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  if (n == 0) return out;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      out.mean_velocity[c] += state.v(j)[c];
      out.barycenter[c] += state.x(j)[c];
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    out.mean_velocity[c] /= static_cast<double>(n);
    out.barycenter[c] /= static_cast<double>(n);
  }
  return out;
}

ParticleEnsemble duplicate(const ParticleEnsemble& state, std::size_t N) {
  if (N == 0) throw InvalidArgument("duplicate: N must be >= 1");
  ParticleEnsemble out(state.dim(), state.count() * N, state.time());
  for (std::size_t j = 0; j < state.count(); ++j) {
    for (std::size_t r = 0; r < N; ++r) {
      std::ranges::copy(state.x(j), out.x(j * N + r).begin());
      std::ranges::copy(state.v(j), out.v(j * N + r).begin());
    }
  }
  return out;
}

ParticleEnsemble sample_initial(const InitialLaw& law, std::size_t J, std::size_t dim, std::mt19937_64& rng) {
  if (J == 0) throw InvalidArgument("sample_initial: J must be >= 1");
  if (dim != law.dim()) throw InvalidArgument("sample_initial: dim does not match the initial law");
  ParticleEnsemble out(dim, J);
  for (std::size_t j = 0; j < J; ++j) {
    auto x = out.x(j);
    auto v = out.v(j);
    for (std::size_t c = 0; c < dim; ++c) x[c] = rng::symmetric(rng, law.x_halfwidths[c]);
    for (std::size_t c = 0; c < dim; ++c) v[c] = rng::symmetric(rng, law.v_halfwidths[c]);
  }
  return out;
}

}  // namespace dynamics
}  // namespace flockmeter
