#include "flockmeter/theory.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "flockmeter/error.hpp"

namespace flockmeter::theory {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_interval(double a, double b) {
  if (!(a >= 0.0)) throw InvalidArgument("tail_integral: lower limit must be >= 0");
  if (!(a <= b)) throw InvalidArgument("tail_integral: lower limit exceeds upper limit");
}

// Exact integral of the piecewise-linear interpolant, constant outside the grid.
double tabulated_integral(const RateSpec& s, double a, double b) {
  if (std::isinf(b)) return kInf;  // psi.back() > 0 on an infinite tail
  const auto& xs = s.r;
  const auto& ys = s.psi;
  auto value = [&](double r) {
    if (r <= xs.front()) return ys.front();
    if (r >= xs.back()) return ys.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), r) - xs.begin());
    const double w = (r - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return ys[hi - 1] + w * (ys[hi] - ys[hi - 1]);
  };
  // Breakpoints inside (a, b), plus the ends.
  std::vector<double> knots{a};
  for (double x : xs) {
    if (x > a && x < b) knots.push_back(x);
  }
  knots.push_back(b);
  double total = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    total += 0.5 * (value(knots[i - 1]) + value(knots[i])) * (knots[i] - knots[i - 1]);
  }
  return total;
}

}  // namespace

double tail_integral_quadrature(const CommunicationRate& rate, double a, double b) {
  check_interval(a, b);
  if (rate.kind() != CommunicationRate::Kind::GammaFamily) {
    throw InvalidArgument("tail_integral_quadrature: gamma family only");
  }
  if (a == b) return 0.0;
  const double gamma = rate.gamma();
  if (std::isinf(b) && gamma <= 0.5) return kInf;
  auto f = [gamma](double s) { return std::pow(1.0 + s * s, -gamma); };
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  // Split at 1 so the algebraic tail and the flat head are refined separately.
  const double mid = std::clamp(1.0, a, b);
  double total = 0.0;
  if (mid > a) total += Integrator::integrate(f, a, mid, 30, 1e-12);
  if (b > mid) total += Integrator::integrate(f, mid, b, 30, 1e-12);
  return total;
}

double tail_integral(const CommunicationRate& rate, double a, double b) {
  check_interval(a, b);
  if (a == b) return 0.0;
  if (rate.kind() == CommunicationRate::Kind::Tabulated) return tabulated_integral(rate.spec(), a, b);
  const double gamma = rate.gamma();
  if (gamma == 0.0) return b - a;
  if (gamma == 0.5) return std::isinf(b) ? kInf : std::asinh(b) - std::asinh(a);
  if (gamma == 1.0) return (std::isinf(b) ? M_PI / 2.0 : std::atan(b)) - std::atan(a);
  return tail_integral_quadrature(rate, a, b);
}

bool flocking_condition(double K, double dx0, double dv0, const CommunicationRate& rate) {
  if (!(K > 0.0) || dx0 < 0.0 || dv0 < 0.0) {
    throw InvalidArgument("flocking_condition: need K > 0 and nonnegative diameters");
  }
  if (dv0 == 0.0) return true;
  const double tail = tail_integral(rate, dx0, kInf);
  if (std::isinf(tail)) return true;
  return K > dv0 / tail;
}

double x_infinity(double K, double dx0, double dv0, const CommunicationRate& rate, RootMethod method) {
  if (!flocking_condition(K, dx0, dv0, rate)) {
    throw FlockingViolated("flocking condition violated: K = " + std::to_string(K) +
                           " is not above D_V0 / int_{D_X0}^inf psi");
  }
  const double target = dv0 / K;
  if (target == 0.0) return dx0;

  if (method == RootMethod::Auto && rate.kind() == CommunicationRate::Kind::GammaFamily) {
    const double gamma = rate.gamma();
    if (gamma == 0.0) return dx0 + target;
    if (gamma == 0.5) return std::sinh(std::asinh(dx0) + target);
    if (gamma == 1.0) return std::tan(std::atan(dx0) + target);
  }

  // psi <= 1, so the integral over [dx0, dx0 + target] is at most target.
  double lo = dx0;
  double width = target;
  double hi = dx0 + width;
  while (tail_integral(rate, dx0, hi) < target) {
    lo = hi;
    width *= 2.0;
    hi = dx0 + width;
    if (!std::isfinite(hi)) throw FlockingViolated("x_infinity: bracket diverged");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (tail_integral(rate, dx0, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double c_mf(double K, double lipschitz, double dbar_v0) {
  return std::exp(1.0 + 2.0 * K * lipschitz * dbar_v0 + K);
}

double c_stab(double K, double dx0, double dv0, double dtilde_v0, const CommunicationRate& rate,
              StabVariant variant) {
  const double x_inf = x_infinity(K, dx0, dv0, rate);
  const double alpha = K * rate(x_inf);
  const double g = std::sqrt(2.0) * K * rate.lipschitz() * dtilde_v0;
  const double lead = variant == StabVariant::PaperExplicit ? std::max(K, 1.0 / alpha)
                                                            : std::max(alpha, 1.0 / alpha);
  return std::sqrt(2.0) * lead * std::exp(g / (alpha * alpha));
}

TheoryConstants compute_constants(double K, const CommunicationRate& rate, double dx0, double dv0,
                                  double dtilde_v0, double dbar_v0, StabVariant variant) {
  TheoryConstants out;
  out.c_mf = c_mf(K, rate.lipschitz(), dbar_v0);
  out.flocking_holds = flocking_condition(K, dx0, dv0, rate);
  if (!out.flocking_holds) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.x_inf = out.alpha = out.c_stab = out.decay_rate = nan;
    return out;
  }
  out.x_inf = x_infinity(K, dx0, dv0, rate);
  out.alpha = K * rate(out.x_inf);
  out.c_stab = c_stab(K, dx0, dv0, dtilde_v0, rate, variant);
  out.decay_rate = out.alpha;
  return out;
}

double decay_envelope(const TheoryConstants& constants, double dv0, double t) {
  if (t < 0.0) throw InvalidArgument("decay_envelope: t must be >= 0");
  if (dv0 == 0.0) return 0.0;
  return dv0 * std::exp(-constants.decay_rate * t);
}

}  // namespace flockmeter::theory
