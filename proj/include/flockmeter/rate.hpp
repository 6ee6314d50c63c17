#pragma once

#include <cmath>
#include <vector>

namespace flockmeter {

/// What the user asks for; validated into a CommunicationRate.
struct RateSpec {
  enum class Kind { GammaFamily, Tabulated };
  Kind kind = Kind::GammaFamily;
  double gamma = 0.5;
  std::vector<double> r;    // tabulated: strictly increasing grid, r[0] >= 0
  std::vector<double> psi;  // tabulated: samples at r

  static RateSpec gamma_family(double gamma) { return {Kind::GammaFamily, gamma, {}, {}}; }
  static RateSpec tabulated(std::vector<double> r, std::vector<double> psi) {
    return {Kind::Tabulated, 0.0, std::move(r), std::move(psi)};
  }

  friend bool operator==(const RateSpec&, const RateSpec&) = default;
};

/// A communication rate psi : [0, inf) -> (0, 1], non-increasing and
/// Lipschitz. Either psi(r) = (1 + r^2)^(-gamma), or a piecewise-linear
/// interpolant of samples held constant outside the grid.
///
/// Instances are only produced by validate_rate(), so the assumptions hold
/// for every value of this type.
class CommunicationRate {
 public:
  using Kind = RateSpec::Kind;

  Kind kind() const noexcept { return spec_.kind; }
  double gamma() const noexcept { return spec_.gamma; }
  const RateSpec& spec() const noexcept { return spec_; }
  /// Cached Lipschitz constant L_psi.
  double lipschitz() const noexcept { return lipschitz_; }

  double operator()(double r) const;

  /// psi evaluated from a squared distance; avoids the sqrt for the gamma
  /// family. This is the form used by the particle kernels.
  double from_squared(double r2) const {
    if (spec_.kind == Kind::GammaFamily) {
      if (spec_.gamma == 0.0) return 1.0;
      if (spec_.gamma == 0.5) return 1.0 / std::sqrt(1.0 + r2);
      if (spec_.gamma == 1.0) return 1.0 / (1.0 + r2);
      return std::pow(1.0 + r2, -spec_.gamma);
    }
    return (*this)(std::sqrt(r2));
  }

 private:
  friend CommunicationRate validate_rate(const RateSpec& spec);
  CommunicationRate(RateSpec spec, double lipschitz) : spec_(std::move(spec)), lipschitz_(lipschitz) {}

  RateSpec spec_;
  double lipschitz_ = 0.0;
};

/// Checks the four standing assumptions and caches L_psi. Throws
/// RateAssumptionViolated naming the first violated assumption.
CommunicationRate validate_rate(const RateSpec& spec);

/// Closed-form L_psi for the gamma family: 2 gamma s (1 + s^2)^(-gamma-1)
/// at s^2 = 1 / (2 gamma + 1).
double gamma_family_lipschitz(double gamma);

}  // namespace flockmeter
