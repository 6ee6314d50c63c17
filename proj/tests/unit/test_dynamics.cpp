#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "flockmeter/dynamics.hpp"
#include "flockmeter/error.hpp"
#include "flockmeter/rng.hpp"

using namespace flockmeter;
using doctest::Approx;

namespace {

ModelParams flat_model(double K) { return ModelParams(K, validate_rate(RateSpec::gamma_family(0.0))); }
ModelParams half_model(double K) { return ModelParams(K, validate_rate(RateSpec::gamma_family(0.5))); }

ParticleEnsemble random_state(std::size_t dim, std::size_t J, std::uint64_t seed) {
  auto g = rng::make_stream(seed, 0, rng::Stream::Initial);
  return dynamics::sample_initial(InitialLaw(std::vector<double>(dim, 3.0), std::vector<double>(dim, 1.0)), J,
                                  dim, g);
}

// Plain double loop without the symmetric pairing.
std::vector<double> brute_dv(const ParticleEnsemble& s, const ModelParams& p) {
  const std::size_t d = s.dim(), J = s.count();
  std::vector<double> dv(J * d, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = 0; k < J; ++k) {
      double r2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) r2 += (s.x(j)[c] - s.x(k)[c]) * (s.x(j)[c] - s.x(k)[c]);
      const double w = p.rate(std::sqrt(r2));
      for (std::size_t c = 0; c < d; ++c) dv[j * d + c] -= p.K / J * w * (s.v(j)[c] - s.v(k)[c]);
    }
  }
  return dv;
}

}  // namespace

TEST_CASE("rhs small cases") {
  ParticleEnsemble one(2, {0.3, -1.0}, {2.0, 5.0});
  auto d1 = dynamics::rhs(one, half_model(5.0));
  CHECK(d1.dx == one.velocities());
  CHECK(d1.dv == std::vector<double>{0.0, 0.0});

  ParticleEnsemble pair(1, {0.0, 4.0}, {1.0, -1.0});
  auto d2 = dynamics::rhs(pair, flat_model(1.0));
  CHECK(d2.dv[0] == Approx(-1.0));
  CHECK(d2.dv[1] == Approx(1.0));

  ParticleEnsemble same(2, {0, 0, 1, 2, -3, 1}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  for (double x : dynamics::rhs(same, half_model(5.0)).dv) CHECK(x == 0.0);
}

TEST_CASE("rhs matches brute-force summation") {
  for (std::size_t d : {1, 2, 3}) {
    const auto s = random_state(d, 37, 100 + d);
    const auto p = half_model(5.0);
    const auto fast = dynamics::rhs(s, p).dv;
    const auto slow = brute_dv(s, p);
    double sum = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i] == Approx(slow[i]).epsilon(1e-12).scale(1.0));
      sum += fast[i];
    }
    CHECK(std::abs(sum) < 1e-12);
  }
}

TEST_CASE("Euler step closed forms") {
  ParticleEnsemble pair(1, {0.0, 4.0}, {1.0, -1.0});
  const auto next = dynamics::step(pair, flat_model(1.0), 0.05, 0);
  CHECK(next.v(0)[0] - next.v(1)[0] == Approx(2.0 * 0.95).epsilon(1e-15));
  CHECK(next.time() == Approx(0.05));

  const auto traj = dynamics::simulate(pair, flat_model(1.0), 0.05, 10, 1);
  CHECK(traj.states.size() == 11);
  const auto& last = traj.final_state();
  CHECK(last.v(0)[0] - last.v(1)[0] == Approx(2.0 * std::pow(0.95, 10)).epsilon(1e-14));

  ParticleEnsemble drift(2, {0, 0, 1, 1}, {0.2, -0.1, 0.2, -0.1});
  const auto moved = dynamics::step(drift, half_model(5.0), 0.5, 0);
  CHECK(moved.x(1)[0] == Approx(1.1));
  CHECK(moved.x(1)[1] == Approx(0.95));
  CHECK(moved.velocities() == drift.velocities());

  ParticleEnsemble coincident(2, {1, 1, 1, 1}, {0.3, 0.3, 0.3, 0.3});
  const auto far = dynamics::evolve(coincident, half_model(5.0), 0.05, 200);
  CHECK(far.x(0)[0] == far.x(1)[0]);
  CHECK(far.v(0)[1] == far.v(1)[1]);
}

TEST_CASE("simulate recording and warnings") {
  const auto s = random_state(2, 8, 3);
  const auto t0 = dynamics::simulate(s, half_model(5.0), 0.05, 0, 1);
  CHECK(t0.states.size() == 1);
  CHECK(t0.states[0] == s);

  const auto t7 = dynamics::simulate(s, half_model(5.0), 0.05, 7, 3);
  CHECK(t7.times().size() == 4);  // 0, 3, 6, 7
  CHECK(t7.times().back() == Approx(0.35));
  CHECK(t7.warnings.empty());

  const auto risky = dynamics::simulate(s, half_model(5.0), 0.5, 1, 1);
  CHECK(risky.warnings.size() == 1);

  ParticleEnsemble single(2, {0.0, 0.0}, {1.0, -2.0});
  const auto lone = dynamics::simulate(single, half_model(5.0), 0.1, 20, 1);
  for (std::size_t n = 0; n < lone.states.size(); ++n) {
    CHECK(lone.states[n].v(0)[0] == 1.0);
    CHECK(lone.states[n].x(0)[1] == Approx(-2.0 * 0.1 * n));
  }
}

TEST_CASE("blow-up reports the step index") {
  ParticleEnsemble pair(1, {0.0, 1.0}, {1e307, -1e307});
  try {
    dynamics::simulate(pair, flat_model(1.0), 10.0, 5, 1);
    FAIL("no blow-up");
  } catch (const NumericalBlowUp& e) {
    CHECK(e.step() <= 5);
  }
}

TEST_CASE("diameters and conserved quantities") {
  CHECK(dynamics::diameters(ParticleEnsemble(2, {1, 2}, {3, 4})).x == 0.0);
  const auto two = dynamics::diameters(ParticleEnsemble(1, {0, 3}, {0, 0}));
  CHECK(two.x == 3.0);
  const auto three = dynamics::diameters(ParticleEnsemble(2, {0, 0, 3, 4, 1, 0}, {0, 0, 0, 0, 0, 0}));
  CHECK(three.x == 5.0);
  const auto c = dynamics::conserved(ParticleEnsemble(2, {0, 0, 2, 2}, {1, 0, -1, 0}));
  CHECK(c.mean_velocity == std::vector<double>{0.0, 0.0});
  CHECK(c.barycenter == std::vector<double>{1.0, 1.0});

  const auto s = random_state(2, 50, 9);
  const auto c0 = dynamics::conserved(s);
  const auto traj = dynamics::simulate(s, half_model(5.0), 0.05, 200, 10);
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const double t = traj.states[n].time();
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(traj.conserved[n].mean_velocity[i] - c0.mean_velocity[i]) < 1e-12);
      CHECK(std::abs(traj.conserved[n].barycenter[i] - (c0.barycenter[i] + t * c0.mean_velocity[i])) < 1e-10);
    }
    if (n > 0) CHECK(traj.diameters[n].v <= traj.diameters[n - 1].v + 1e-12);
  }
}

TEST_CASE("duplication and permutation equivariance") {
  const auto s = random_state(2, 12, 21);
  const auto p = half_model(5.0);
  CHECK(dynamics::duplicate(s, 1) == s);
  const auto triple = dynamics::duplicate(ParticleEnsemble(2, {1, 2}, {3, 4}), 3);
  CHECK(triple.count() == 3);
  CHECK(triple.x(2)[1] == 2.0);

  const auto a = dynamics::evolve(dynamics::duplicate(s, 3), p, 0.05, 60);
  const auto b = dynamics::duplicate(dynamics::evolve(s, p, 0.05, 60), 3);
  for (std::size_t i = 0; i < a.positions().size(); ++i) {
    CHECK(std::abs(a.positions()[i] - b.positions()[i]) < 1e-10);
    CHECK(std::abs(a.velocities()[i] - b.velocities()[i]) < 1e-10);
  }

  std::vector<std::size_t> perm(s.count());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  const auto lhs = dynamics::evolve(s.permuted(perm), p, 0.05, 40);
  const auto rhs = dynamics::evolve(s, p, 0.05, 40).permuted(perm);
  for (std::size_t i = 0; i < lhs.positions().size(); ++i) {
    CHECK(lhs.positions()[i] == Approx(rhs.positions()[i]).epsilon(1e-12).scale(1.0));
    CHECK(lhs.velocities()[i] == Approx(rhs.velocities()[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("initial law sampling") {
  CHECK_THROWS_AS(InitialLaw({0.0, 0.0}, {1.0, 1.0}), InvalidArgument);
  const InitialLaw law({3.0, 3.0}, {1.0, 1.0});
  CHECK(law.support_diameter_x() == Approx(6.0 * std::sqrt(2.0)));
  CHECK(law.support_diameter_v() == Approx(2.0 * std::sqrt(2.0)));

  auto g = rng::make_stream(42, 0, rng::Stream::Initial);
  const std::size_t J = 100000;
  const auto s = dynamics::sample_initial(law, J, 2, g);
  double mean0 = 0.0, mean1 = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    CHECK_UNARY(std::abs(s.x(j)[0]) <= 3.0);
    CHECK_UNARY(std::abs(s.v(j)[1]) <= 1.0);
    mean0 += s.v(j)[0];
    mean1 += s.v(j)[1];
  }
  const double bound = 4.0 * (1.0 / std::sqrt(3.0 * J));
  CHECK(std::abs(mean0 / J) < bound);
  CHECK(std::abs(mean1 / J) < bound);

  auto g1 = rng::make_stream(42, 3, rng::Stream::Initial);
  auto g2 = rng::make_stream(42, 3, rng::Stream::Initial);
  CHECK(dynamics::sample_initial(law, 10, 2, g1) == dynamics::sample_initial(law, 10, 2, g2));
}
