#include "flockmeter/rate.hpp"

#include <algorithm>
#include <string>

#include "flockmeter/error.hpp"

namespace flockmeter {

double gamma_family_lipschitz(double gamma) {
  if (gamma <= 0.0) return 0.0;
  const double s2 = 1.0 / (2.0 * gamma + 1.0);
  return 2.0 * gamma * std::sqrt(s2) * std::pow(1.0 + s2, -gamma - 1.0);
}

double CommunicationRate::operator()(double r) const {
  if (spec_.kind == Kind::GammaFamily) return from_squared(r * r);
  const auto& xs = spec_.r;
  const auto& ys = spec_.psi;
  if (r <= xs.front()) return ys.front();
  if (r >= xs.back()) return ys.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), r) - xs.begin());
  const std::size_t lo = hi - 1;
  const double w = (r - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

CommunicationRate validate_rate(const RateSpec& spec) {
  if (spec.kind == RateSpec::Kind::GammaFamily) {
    // (1 + r^2)^(-gamma) is positive, at most 1 and non-increasing exactly
    // when gamma >= 0.
    if (!std::isfinite(spec.gamma) || spec.gamma < 0.0) {
      throw RateAssumptionViolated("non-increasing", "gamma must be >= 0, got " + std::to_string(spec.gamma));
    }
    return CommunicationRate(spec, gamma_family_lipschitz(spec.gamma));
  }

  const auto& xs = spec.r;
  const auto& ys = spec.psi;
  if (xs.empty() || xs.size() != ys.size()) {
    throw InvalidArgument("tabulated rate needs equally many (r, psi) samples, at least one");
  }
  if (!(xs.front() >= 0.0)) throw InvalidArgument("tabulated rate grid must start at r >= 0");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw InvalidArgument("tabulated rate has a non-finite sample at index " + std::to_string(i));
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw InvalidArgument("tabulated rate grid must be strictly increasing at index " + std::to_string(i));
    }
    if (!(ys[i] > 0.0)) throw RateAssumptionViolated("positive", "psi <= 0 at r = " + std::to_string(xs[i]));
    if (ys[i] > 1.0) throw RateAssumptionViolated("bounded by 1", "psi > 1 at r = " + std::to_string(xs[i]));
  }
  double lipschitz = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (ys[i] > ys[i - 1]) {
      throw RateAssumptionViolated("non-increasing", "psi increases on [" + std::to_string(xs[i - 1]) + ", " +
                                                         std::to_string(xs[i]) + "]");
    }
    lipschitz = std::max(lipschitz, (ys[i - 1] - ys[i]) / (xs[i] - xs[i - 1]));
  }
  if (!std::isfinite(lipschitz)) throw RateAssumptionViolated("Lipschitz", "slope overflows");
  return CommunicationRate(spec, lipschitz);
}

}  // namespace flockmeter
