#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fictplay {

/// Out-of-range or malformed parameter (tau, eta, probabilities, ...).
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The operation needs the attacker/defender payoff sign structure and the
/// given game does not satisfy it.
struct AssumptionViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Two internal computation routes disagreed beyond tolerance.
struct InternalConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

inline constexpr double kSimplexTol = 1e-12;

/// A point of the 2-simplex: two nonnegative weights summing to one
/// (within kSimplexTol). Immutable after construction; default is uniform.
class MixedStrategy {
 public:
  constexpr MixedStrategy() = default;

  MixedStrategy(double first, double second) {
    if (!(std::isfinite(first) && std::isfinite(second)))
      throw InvalidParameter("MixedStrategy: non-finite component");
    if (first < -kSimplexTol || second < -kSimplexTol)
      throw InvalidParameter("MixedStrategy: negative component");
    if (std::abs(first + second - 1.0) > kSimplexTol)
      throw InvalidParameter("MixedStrategy: components must sum to 1");
    // tiny negative rounding residue clamps to zero
    first_ = first < 0.0 ? 0.0 : first;
    second_ = second < 0.0 ? 0.0 : second;
  }

  static MixedStrategy from_first(double p) { return {p, 1.0 - p}; }

  double first() const { return first_; }
  double second() const { return second_; }

  friend bool operator==(const MixedStrategy&, const MixedStrategy&) = default;

 private:
  double first_ = 0.5;
  double second_ = 0.5;
};

inline double max_abs_diff(const MixedStrategy& x, const MixedStrategy& y) {
  return std::max(std::abs(x.first() - y.first()),
                  std::abs(x.second() - y.second()));
}

/// A vertex of the simplex; the CSV encoding uses the enum values.
enum class PureAction : int { action1 = 1, action2 = 2 };

inline MixedStrategy to_mixed(PureAction a) {
  return a == PureAction::action1 ? MixedStrategy{1.0, 0.0}
                                  : MixedStrategy{0.0, 1.0};
}

/// 2x2 payoff matrix stored row-major: entry (own action, opponent action).
/// Player 1's letters are the literal fields; player 2's matrix reads
/// [[e,g],[f,h]] positionally, i.e. a=e, b=g, c=f, d=h.
struct PayoffMatrix {
  double a = 0.0, b = 0.0;  // row 1
  double c = 0.0, d = 0.0;  // row 2

  friend bool operator==(const PayoffMatrix&, const PayoffMatrix&) = default;
};

/// Expected payoff per own action against an opponent mix: (M q)_j.
inline std::array<double, 2> expected_payoffs(const PayoffMatrix& m,
                                              const MixedStrategy& opp) {
  return {m.a * opp.first() + m.b * opp.second(),
          m.c * opp.first() + m.d * opp.second()};
}

/// Static game: both payoff matrices plus the entropy weights that smooth
/// each player's best response. tau_i > 0 is required by every solver path.
struct GameSpec {
  PayoffMatrix m1;  // player 1 (attacker)
  PayoffMatrix m2;  // player 2 (defender), rows (e,g) and (f,h)
  double tau1 = 1.0;
  double tau2 = 1.0;
};

inline const PayoffMatrix& payoff_of(const GameSpec& game, int player) {
  if (player != 1 && player != 2)
    throw InvalidParameter("player index must be 1 or 2");
  return player == 1 ? game.m1 : game.m2;
}

inline double tau_of(const GameSpec& game, int player) {
  if (player != 1 && player != 2)
    throw InvalidParameter("player index must be 1 or 2");
  return player == 1 ? game.tau1 : game.tau2;
}

struct AssumptionCheck {
  bool ok = true;
  std::vector<std::string> violations;  // names of failed inequalities
};

/// Security-game sign structure: attacking pays iff undefended (a<c, b>d),
/// defending pays iff attacked (e>f, g<h). All inequalities are strict.
inline AssumptionCheck check_assumption(const GameSpec& game) {
  AssumptionCheck result;
  auto require = [&result](bool holds, const char* name) {
    if (!holds) {
      result.ok = false;
      result.violations.emplace_back(name);
    }
  };
  require(game.m1.a < game.m1.c, "a<c");
  require(game.m1.b > game.m1.d, "b>d");
  require(game.m2.a > game.m2.c, "e>f");  // e,f are column 1 of [[e,g],[f,h]]
  require(game.m2.b < game.m2.d, "g<h");
  return result;
}

inline void require_tau(const GameSpec& game) {
  if (!(game.tau1 > 0.0 && game.tau2 > 0.0))
    throw InvalidParameter("tau1 and tau2 must be positive");
}

inline void require_assumption(const GameSpec& game) {
  const AssumptionCheck chk = check_assumption(game);
  if (!chk.ok) {
    std::string msg = "payoff sign assumption violated:";
    for (const auto& v : chk.violations) msg += " " + v;
    throw AssumptionViolation(msg);
  }
}

/// Shannon entropy in nats, with the continuous extension 0*ln 0 := 0.
inline double entropy(const MixedStrategy& p) {
  auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  return term(p.first()) + term(p.second());
}

/// Expected payoff plus weighted entropy of the own mix.
inline double utility(const GameSpec& game, int player,
                      const MixedStrategy& own, const MixedStrategy& opp) {
  const auto x = expected_payoffs(payoff_of(game, player), opp);
  return own.first() * x[0] + own.second() * x[1] +
         tau_of(game, player) * entropy(own);
}

/// Two-point soft-max, evaluated after subtracting the larger argument so
/// large inputs cannot overflow (the result is shift-invariant). Both
/// components are strictly positive unless |x1-x2| exceeds ~745, where the
/// smaller one underflows to exactly zero.
inline MixedStrategy soft_max(double x1, double x2) {
  if (!(std::isfinite(x1) && std::isfinite(x2)))
    throw InvalidParameter("soft_max: non-finite input");
  const double m = std::max(x1, x2);
  const double e1 = std::exp(x1 - m);
  const double e2 = std::exp(x2 - m);
  const double s = e1 + e2;
  return {e1 / s, e2 / s};
}

/// Smoothed best response sigma(M q / tau). Takes only the responder's own
/// payoff matrix and entropy weight; this is the whole interface a player
/// needs, so play loops never touch the opponent's payoffs.
inline MixedStrategy smoothed_best_response(const PayoffMatrix& own,
                                            double tau,
                                            const MixedStrategy& opp) {
  if (!(tau > 0.0))
    throw InvalidParameter("smoothed best response requires tau > 0");
  const auto x = expected_payoffs(own, opp);
  return soft_max(x[0] / tau, x[1] / tau);
}

inline MixedStrategy best_response(const GameSpec& game, int player,
                                   const MixedStrategy& opp) {
  return smoothed_best_response(payoff_of(game, player),
                                tau_of(game, player), opp);
}

/// Equilibrium test against a grid: no grid strategy may improve either
/// player's utility by more than 1e-9, and both fixed-point residuals must
/// be at most 1e-9. `grid` is the number of intervals (step 1/grid).
inline bool verify_equilibrium(const GameSpec& game, const MixedStrategy& r1,
                               const MixedStrategy& r2,
                               std::size_t grid = 1000) {
  if (grid == 0) throw InvalidParameter("verify_equilibrium: grid must be positive");
  constexpr double kSlack = 1e-9;
  const double u1 = utility(game, 1, r1, r2);
  const double u2 = utility(game, 2, r2, r1);
  for (std::size_t i = 0; i <= grid; ++i) {
    const MixedStrategy p =
        MixedStrategy::from_first(static_cast<double>(i) / static_cast<double>(grid));
    if (utility(game, 1, p, r2) > u1 + kSlack) return false;
    if (utility(game, 2, p, r1) > u2 + kSlack) return false;
  }
  return max_abs_diff(r1, best_response(game, 1, r2)) <= kSlack &&
         max_abs_diff(r2, best_response(game, 2, r1)) <= kSlack;
}

struct FixedPoint {
  MixedStrategy r1, r2;
  double residual = 0.0;  // max-norm defect of r = beta(r)
};

/// Fixed point of the joint smoothed-best-response map, by bisection on
/// player 1's first component. The composed map x -> beta1^1(beta2(x)) is
/// strictly decreasing under the sign assumption, so the excess g(x)-x has
/// a bracketing sign change on [0,1]; without the assumption the bisection
/// still lands on a fixed point (existence by Brouwer) but uniqueness is
/// not guaranteed. Bisects until the bracket is below tol and the residual
/// is too, or until the bracket exhausts double precision.
inline FixedPoint solve_fixed_point(const GameSpec& game, double tol = 1e-12) {
  require_tau(game);
  if (!(tol > 0.0)) throw InvalidParameter("solve_fixed_point: tol must be positive");
  auto excess = [&game](double x) {
    const MixedStrategy r1 = MixedStrategy::from_first(x);
    return best_response(game, 1, best_response(game, 2, r1)).first() - x;
  };
  double lo = 0.0, hi = 1.0;  // excess(0) > 0 > excess(1): responses are interior
  double mid = 0.5;
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double e = excess(mid);
    (e > 0.0 ? lo : hi) = mid;
    if (hi - lo <= tol && std::abs(e) <= tol) break;
  }
  FixedPoint fp;
  fp.r1 = MixedStrategy::from_first(mid);
  fp.r2 = best_response(game, 2, fp.r1);
  fp.residual = std::max(max_abs_diff(best_response(game, 1, fp.r2), fp.r1),
                         max_abs_diff(best_response(game, 2, fp.r1), fp.r2));
  return fp;
}

}  // namespace fictplay
