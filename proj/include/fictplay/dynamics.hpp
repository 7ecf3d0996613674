#pragma once

#include <optional>
#include <vector>

#include "fictplay/game.hpp"

namespace fictplay {

inline void require_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw InvalidParameter("eta must lie in (0,1)");
}

/// State of the deterministic mean dynamic. r_i are the exponentially
/// smoothed estimates; q_i, when tracked, are the 1/(k+1)-weighted means of
/// the best responses.
struct MeanState {
  MixedStrategy r1, r2;
  std::optional<MixedStrategy> q1, q2;
  std::size_t k = 0;
};

/// One step of the mean dynamic,
///   r_i <- (1-eta) r_i + eta beta_i(r_{-i}),
/// both players updating simultaneously from the old state. Tracked
/// empirical means follow q_i <- (k/(k+1)) q_i + (1/(k+1)) beta_i(r_{-i}).
inline MeanState tifu_mean_step(const GameSpec& game, const MeanState& s,
                                double eta) {
  require_eta(eta);
  const MixedStrategy b1 = best_response(game, 1, s.r2);
  const MixedStrategy b2 = best_response(game, 2, s.r1);
  auto blend = [](const MixedStrategy& x, const MixedStrategy& y, double w) {
    return MixedStrategy{(1.0 - w) * x.first() + w * y.first(),
                         (1.0 - w) * x.second() + w * y.second()};
  };
  MeanState next;
  next.r1 = blend(s.r1, b1, eta);
  next.r2 = blend(s.r2, b2, eta);
  const double kw = 1.0 / static_cast<double>(s.k + 1);
  if (s.q1) next.q1 = blend(*s.q1, b1, kw);
  if (s.q2) next.q2 = blend(*s.q2, b2, kw);
  next.k = s.k + 1;
  return next;
}

struct MeanRun {
  std::vector<MeanState> trajectory;  // recorded states (see stride)
  bool converged = false;
  std::size_t steps_used = 0;
  MixedStrategy rbar1, rbar2;  // fixed point the distance was measured against
};

/// Iterates the mean dynamic until the max-norm distance of (r1^1, r2^1)
/// from the fixed point drops below tol (converged) or max_steps is
/// reached. The initial state counts: starting at the fixed point converges
/// in zero steps. States are recorded every `stride` steps; the initial and
/// final states are always recorded.
inline MeanRun iterate_mean(const GameSpec& game, const MeanState& initial,
                            double eta, std::size_t max_steps,
                            double tol = 1e-8, std::size_t stride = 1) {
  require_eta(eta);
  if (!(tol > 0.0)) throw InvalidParameter("iterate_mean: tol must be positive");
  if (stride == 0) throw InvalidParameter("iterate_mean: stride must be positive");
  const FixedPoint fp = solve_fixed_point(game);
  auto distance = [&fp](const MeanState& s) {
    return std::max(std::abs(s.r1.first() - fp.r1.first()),
                    std::abs(s.r2.first() - fp.r2.first()));
  };
  MeanRun run;
  run.rbar1 = fp.r1;
  run.rbar2 = fp.r2;
  MeanState s = initial;
  run.trajectory.push_back(s);
  std::size_t steps = 0;
  bool converged = distance(s) < tol;
  while (!converged && steps < max_steps) {
    s = tifu_mean_step(game, s, eta);
    ++steps;
    if (steps % stride == 0) run.trajectory.push_back(s);
    converged = distance(s) < tol;
  }
  if (run.trajectory.back().k != s.k) run.trajectory.push_back(s);
  run.converged = converged;
  run.steps_used = steps;
  return run;
}

/// Non-convergence diagnostic: true when the distance to the fixed point
/// exceeds `threshold` at least once among the last `window` recorded
/// states.
inline bool persistent_oscillation(const MeanRun& run, double threshold = 0.01,
                                   std::size_t window = 100) {
  const auto& traj = run.trajectory;
  const std::size_t begin =
      traj.size() > window ? traj.size() - window : std::size_t{0};
  for (std::size_t i = begin; i < traj.size(); ++i) {
    const double d =
        std::max(std::abs(traj[i].r1.first() - run.rbar1.first()),
                 std::abs(traj[i].r2.first() - run.rbar2.first()));
    if (d > threshold) return true;
  }
  return false;
}

enum class Integrator { euler, rk4 };

struct FlowState {
  MixedStrategy p1, p2;
  double t = 0.0;
};

/// Integrates the best-response flow  pdot_i = beta_i(p_{-i}) - p_i  for
/// round(t_end/dt) uniform steps of size dt. The flow preserves the
/// simplex, so the state is carried by the first components only. Euler
/// with step h reproduces the mean dynamic with eta = h step for step.
inline std::vector<FlowState> continuous_flow(const GameSpec& game,
                                              const MixedStrategy& p1,
                                              const MixedStrategy& p2,
                                              double t_end, double dt,
                                              Integrator method) {
  require_tau(game);
  if (!(dt > 0.0)) throw InvalidParameter("continuous_flow: dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidParameter("continuous_flow: t_end must be nonnegative");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  auto deriv = [&game](double x1, double x2, double& d1, double& d2) {
    d1 = best_response(game, 1, MixedStrategy::from_first(x2)).first() - x1;
    d2 = best_response(game, 2, MixedStrategy::from_first(x1)).first() - x2;
  };
  std::vector<FlowState> traj;
  traj.reserve(steps + 1);
  double x1 = p1.first(), x2 = p2.first();
  traj.push_back({p1, p2, 0.0});
  for (std::size_t n = 1; n <= steps; ++n) {
    double d1, d2;
    if (method == Integrator::euler) {
      deriv(x1, x2, d1, d2);
      x1 += dt * d1;
      x2 += dt * d2;
    } else {
      double a1, a2, b1, b2, c1, c2;
      deriv(x1, x2, d1, d2);
      deriv(x1 + 0.5 * dt * d1, x2 + 0.5 * dt * d2, a1, a2);
      deriv(x1 + 0.5 * dt * a1, x2 + 0.5 * dt * a2, b1, b2);
      deriv(x1 + dt * b1, x2 + dt * b2, c1, c2);
      x1 += dt / 6.0 * (d1 + 2.0 * a1 + 2.0 * b1 + c1);
      x2 += dt / 6.0 * (d2 + 2.0 * a2 + 2.0 * b2 + c2);
    }
    traj.push_back({MixedStrategy::from_first(x1),
                    MixedStrategy::from_first(x2),
                    static_cast<double>(n) * dt});
  }
  return traj;
}

struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;
};

/// Moduli of the two eigenvalues of a real 2x2 matrix. A negative
/// discriminant means a conjugate pair with |mu|^2 = det.
inline std::array<double, 2> eigen_moduli(const Mat2& m) {
  const double half_tr = 0.5 * (m.a11 + m.a22);
  const double det = m.a11 * m.a22 - m.a12 * m.a21;
  const double disc = half_tr * half_tr - det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return {std::abs(half_tr + root), std::abs(half_tr - root)};
  }
  const double mod = std::sqrt(det);
  return {mod, mod};
}

inline double spectral_radius(const Mat2& m) {
  const auto mods = eigen_moduli(m);
  return std::max(mods[0], mods[1]);
}

/// Jacobian of the mean-dynamic map with respect to (r1^1, r2^1). The
/// off-diagonal entries use the soft-max derivative
///   d beta_1^1 / d r_2^1 = (1/tau1) [(a-c)+(d-b)] beta_1^1 beta_1^2
/// (and its player-2 counterpart with [(e-f)+(h-g)]), so they are exact at
/// any interior point, not only at the fixed point where beta_i = r_i.
inline Mat2 jacobian_at(const GameSpec& game, const MixedStrategy& r1,
                        const MixedStrategy& r2, double eta) {
  const MixedStrategy b1 = best_response(game, 1, r2);
  const MixedStrategy b2 = best_response(game, 2, r1);
  const double s1 = (game.m1.a - game.m1.c) + (game.m1.d - game.m1.b);
  const double s2 = (game.m2.a - game.m2.c) + (game.m2.d - game.m2.b);
  Mat2 j;
  j.a11 = 1.0 - eta;
  j.a22 = 1.0 - eta;
  j.a12 = eta / game.tau1 * s1 * b1.first() * b1.second();
  j.a21 = eta / game.tau2 * s2 * b2.first() * b2.second();
  return j;
}

struct StabilityReport {
  double eta0 = 0.0;           // closed-form threshold
  double eta0_crossing = 0.0;  // spectral-radius crossing located by bisection
  double eta = 0.0;            // step size the Jacobian below was evaluated at
  Mat2 jacobian;
  std::array<double, 2> eigenvalue_moduli{0.0, 0.0};
  bool stable = false;  // max modulus strictly below one at `eta`
};

/// Local stability threshold of the mean dynamic at a fixed point (solve it
/// to residual <= 1e-10 first). Closed form
///   eta0 = 2 / ( [(c-a)+(b-d)][(e-f)+(h-g)] / (tau1 tau2)
///                * r1bar^1 r1bar^2 r2bar^1 r2bar^2  +  1 ),
/// cross-checked by bisecting the spectral radius of jacobian_at over
/// eta in (0,2); disagreement beyond 1e-4 raises InternalConsistencyError.
/// The Jacobian fields are evaluated at eta_query if given, else at eta0
/// itself (where the radius is one, hence not stable).
inline StabilityReport stability_threshold(
    const GameSpec& game, const MixedStrategy& rbar1,
    const MixedStrategy& rbar2, std::optional<double> eta_query = {}) {
  require_tau(game);
  require_assumption(game);
  const double k1 = (game.m1.c - game.m1.a) + (game.m1.b - game.m1.d);
  const double k2 = (game.m2.a - game.m2.c) + (game.m2.d - game.m2.b);
  const double coupling = k1 * k2 / (game.tau1 * game.tau2) * rbar1.first() *
                          rbar1.second() * rbar2.first() * rbar2.second();
  const double eta0 = 2.0 / (coupling + 1.0);

  // Independent route: under the sign assumption the radius dips below one
  // on (0, eta0) and exceeds it beyond, so [tiny, 2] brackets the crossing.
  double lo = 1e-9, hi = 2.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (spectral_radius(jacobian_at(game, rbar1, rbar2, mid)) < 1.0 ? lo : hi) =
        mid;
  }
  const double crossing = 0.5 * (lo + hi);
  if (std::abs(crossing - eta0) > 1e-4)
    throw InternalConsistencyError(
        "stability threshold: closed form " + std::to_string(eta0) +
        " and spectral-radius crossing " + std::to_string(crossing) +
        " disagree; was the fixed point solved tightly enough?");

  StabilityReport report;
  report.eta0 = eta0;
  report.eta0_crossing = crossing;
  report.eta = eta_query.value_or(eta0);
  report.jacobian = jacobian_at(game, rbar1, rbar2, report.eta);
  report.eigenvalue_moduli = eigen_moduli(report.jacobian);
  report.stable =
      std::max(report.eigenvalue_moduli[0], report.eigenvalue_moduli[1]) < 1.0;
  return report;
}

}  // namespace fictplay
