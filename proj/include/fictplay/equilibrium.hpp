#pragma once

#include "fictplay/dynamics.hpp"
#include "fictplay/game.hpp"

namespace fictplay {

struct EquilibriumReport {
  MixedStrategy rbar1, rbar2;
  double residual = 0.0;  // max-norm defect of r = beta(r)
  double eta0 = 0.0;      // local stability threshold of the mean dynamic
  double spectral_radius_at_eta0 = 0.0;  // eigenvalue cross-check, 1 up to rounding
};

/// The unique Nash equilibrium of a security game (sign assumption plus
/// tau > 0), with the stability threshold attached. Rejects tau <= 0 and
/// sign-structure violations with distinct error types.
inline EquilibriumReport solve_equilibrium(const GameSpec& game,
                                           double tol = 1e-12) {
  require_tau(game);
  require_assumption(game);
  const FixedPoint fp = solve_fixed_point(game, tol);
  const StabilityReport st = stability_threshold(game, fp.r1, fp.r2);
  EquilibriumReport report;
  report.rbar1 = fp.r1;
  report.rbar2 = fp.r2;
  report.residual = fp.residual;
  report.eta0 = st.eta0;
  report.spectral_radius_at_eta0 =
      std::max(st.eigenvalue_moduli[0], st.eigenvalue_moduli[1]);
  return report;
}

}  // namespace fictplay
