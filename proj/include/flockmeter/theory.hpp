#pragma once

#include "flockmeter/rate.hpp"

namespace flockmeter::theory {

/// Integral of psi over [a, b]; b may be +infinity, in which case the result
/// is +infinity when the tail diverges. Closed forms for gamma in {0, 1/2, 1},
/// exact piecewise integration for tabulated rates, adaptive Gauss-Kronrod
/// otherwise. Throws InvalidArgument when a > b or a < 0.
double tail_integral(const CommunicationRate& rate, double a, double b);

/// Same integral but always by adaptive quadrature (1e-10 relative). Only
/// the gamma family; used to cross-check the closed forms.
double tail_integral_quadrature(const CommunicationRate& rate, double a, double b);

/// K > D_V0 / int_{D_X0}^inf psi. A divergent tail or D_V0 = 0 makes it hold
/// for every K > 0.
bool flocking_condition(double K, double dx0, double dv0, const CommunicationRate& rate);

enum class RootMethod { Auto, Bisection };

/// The x >= D_X0 solving int_{D_X0}^x psi = D_V0 / K. Auto uses a closed
/// form when one exists (gamma in {0, 1/2, 1}) and bisection otherwise.
/// Throws FlockingViolated when no finite root exists.
double x_infinity(double K, double dx0, double dv0, const CommunicationRate& rate,
                  RootMethod method = RootMethod::Auto);

/// exp(1 + 2 K L_psi Dbar_V(0) + K).
double c_mf(double K, double lipschitz, double dbar_v0);

enum class StabVariant { PaperExplicit, Tight };

/// Uniform-in-time stability constant. With alpha = K psi(x_inf) and
/// g = sqrt(2) K L_psi Dtilde_V(0):
///   PaperExplicit: sqrt(2) max{K, 1/alpha} exp(g / alpha^2)
///   Tight:         sqrt(2) max{alpha, 1/alpha} exp(g / alpha^2)
/// (dx0, dv0) should be the larger diameter pair of the two systems. May
/// return +infinity when the exponent overflows.
double c_stab(double K, double dx0, double dv0, double dtilde_v0, const CommunicationRate& rate,
              StabVariant variant = StabVariant::PaperExplicit);

struct TheoryConstants {
  double x_inf = 0.0;
  double alpha = 0.0;       // K psi(x_inf)
  double c_mf = 0.0;
  double c_stab = 0.0;
  double decay_rate = 0.0;  // envelope exponent, taken equal to alpha
  bool flocking_holds = false;
};

/// Evaluates the whole chain for one setup. When the flocking condition
/// fails, flocking_holds is false and x_inf, alpha, c_stab, decay_rate are NaN.
TheoryConstants compute_constants(double K, const CommunicationRate& rate, double dx0, double dv0,
                                  double dtilde_v0, double dbar_v0,
                                  StabVariant variant = StabVariant::PaperExplicit);

/// D_V(0) exp(-decay_rate t).
double decay_envelope(const TheoryConstants& constants, double dv0, double t);

}  // namespace flockmeter::theory
