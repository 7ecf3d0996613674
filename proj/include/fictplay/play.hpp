#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "fictplay/game.hpp"

namespace fictplay {

/// All play processes draw from one seeded engine; within-build runs are
/// bit-reproducible (cross-implementation reproducibility is a non-goal).
using Rng = std::mt19937_64;

/// Canonical double in [0,1) from the top 53 bits. Exactly one engine
/// advance per call.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Bernoulli draw over the two actions: action1 with probability p.first().
inline PureAction sample_action(const MixedStrategy& p, Rng& rng) {
  return uniform01(rng) < p.first() ? PureAction::action1
                                    : PureAction::action2;
}

/// Running-mean update with weight 1/(k+1); q is the mean of actions
/// 0..k-1 and is ignored when k = 0.
inline MixedStrategy empirical_update(const MixedStrategy& q, std::size_t k,
                                      PureAction v) {
  const MixedStrategy a = to_mixed(v);
  const double w = 1.0 / static_cast<double>(k + 1);
  const double keep = static_cast<double>(k) * w;
  return {keep * q.first() + w * a.first(), keep * q.second() + w * a.second()};
}

/// Exponential smoothing with constant weight eta; the first observation
/// (k = 0) is taken verbatim.
inline MixedStrategy estimate_update(const MixedStrategy& r, PureAction v,
                                     double eta, std::size_t k) {
  if (!(eta > 0.0 && eta < 1.0))
    throw InvalidParameter("estimate_update: eta must lie in (0,1)");
  const MixedStrategy a = to_mixed(v);
  if (k == 0) return a;
  return {(1.0 - eta) * r.first() + eta * a.first(),
          (1.0 - eta) * r.second() + eta * a.second()};
}

/// Closed form of the smoothed estimate after the whole action sequence:
///   (1-eta)^{k-1} v(0) + sum_{j=1}^{k-1} eta (1-eta)^{k-1-j} v(j).
/// The weights form a probability vector, so this is the oracle the folded
/// estimate_update is checked against.
inline MixedStrategy expand_estimate(std::span<const PureAction> actions,
                                     double eta) {
  if (actions.empty())
    throw InvalidParameter("expand_estimate: empty action sequence");
  if (!(eta > 0.0 && eta < 1.0))
    throw InvalidParameter("expand_estimate: eta must lie in (0,1)");
  const std::size_t k = actions.size();
  double first = 0.0, second = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double weight =
        (j == 0 ? std::pow(1.0 - eta, static_cast<double>(k - 1))
                : eta * std::pow(1.0 - eta, static_cast<double>(k - 1 - j)));
    const MixedStrategy a = to_mixed(actions[j]);
    first += weight * a.first();
    second += weight * a.second();
  }
  return {first, second};
}

/// Recovers the empirical frequency q(k+1) from the smoothed estimates
/// r(1)..r(k+1) alone:
///   q(k+1) = ( (2 eta - 1)/eta r(1) + r(2) + ... + r(k) + r(k+1)/eta )
///            / (k+1).
inline MixedStrategy reconstruct_empirical(
    std::span<const MixedStrategy> estimates, double eta) {
  if (estimates.size() < 2)
    throw InvalidParameter("reconstruct_empirical: need estimates r(1)..r(k+1) with k >= 1");
  if (!(eta > 0.0 && eta < 1.0))
    throw InvalidParameter("reconstruct_empirical: eta must lie in (0,1)");
  const std::size_t k = estimates.size() - 1;
  double first = (2.0 * eta - 1.0) / eta * estimates[0].first() +
                 estimates[k].first() / eta;
  double second = (2.0 * eta - 1.0) / eta * estimates[0].second() +
                  estimates[k].second() / eta;
  for (std::size_t i = 1; i < k; ++i) {
    first += estimates[i].first();
    second += estimates[i].second();
  }
  const double scale = 1.0 / static_cast<double>(k + 1);
  return {scale * first, scale * second};
}

/// Unbiased sample standard deviation (Welford accumulation).
inline double window_stddev(std::span<const double> values) {
  if (values.size() < 2)
    throw InvalidParameter("window_stddev: need at least two values");
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (const double x : values) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  return std::sqrt(m2 / static_cast<double>(n - 1));
}

/// One recorded step of a play process. Frequencies are post-step: row k
/// holds r_i(k+1) and q_i(k+1), i.e. the estimates and running means after
/// incorporating the step's actions, while beta_i is the distribution the
/// step's action was drawn from, beta_i(r_{-i}(k)). The step sizes are
/// per player (they coincide except under the adaptive scheme); the
/// running-mean scheme records its effective weight 1/(k+1) instead.
struct TraceRecord {
  std::size_t k = 0;
  PureAction action1 = PureAction::action1;
  PureAction action2 = PureAction::action1;
  std::optional<MixedStrategy> r1, r2;  // absent for the running-mean scheme
  MixedStrategy q1, q2;
  MixedStrategy beta1, beta2;
  double eta1 = 0.0, eta2 = 0.0;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  std::pair<MixedStrategy, MixedStrategy> final_q;
  std::optional<std::pair<MixedStrategy, MixedStrategy>> final_r;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t stride = 1;  // trace holds every stride-th step plus the last
};

/// A fictitious player: its own payoffs and smoothing weight plus an
/// estimate of the opponent's mixed strategy. The opponent's payoff matrix
/// never crosses this boundary; only observed actions do. The estimate
/// starts from the uniform prior, which also seeds the very first best
/// response (before anything has been observed).
class FictitiousPlayer {
 public:
  FictitiousPlayer(const PayoffMatrix& own_payoffs, double tau)
      : payoffs_(own_payoffs), tau_(tau) {
    if (!(tau > 0.0)) throw InvalidParameter("FictitiousPlayer: tau must be positive");
  }

  MixedStrategy respond() const {
    return smoothed_best_response(payoffs_, tau_, estimate_);
  }

  void observe_constant_weight(PureAction v, double eta) {
    estimate_ = estimate_update(estimate_, v, eta, observed_);
    ++observed_;
  }

  void observe_running_mean(PureAction v) {
    estimate_ = empirical_update(estimate_, observed_, v);
    ++observed_;
  }

  const MixedStrategy& opponent_estimate() const { return estimate_; }
  std::size_t observed() const { return observed_; }

 private:
  PayoffMatrix payoffs_;
  double tau_;
  MixedStrategy estimate_;
  std::size_t observed_ = 0;
};

namespace detail {

inline void require_run_args(const GameSpec& game, std::size_t steps,
                             std::size_t stride, bool allow_any_game) {
  require_tau(game);
  if (!allow_any_game) require_assumption(game);
  if (steps == 0) throw InvalidParameter("run: steps must be positive");
  if (stride == 0) throw InvalidParameter("run: stride must be positive");
}

inline bool record_step(std::size_t k, std::size_t steps, std::size_t stride) {
  return k % stride == 0 || k + 1 == steps;
}

}  // namespace detail

/// Self-play with the constant-weight estimate: per step each player best
/// responds to its current estimate, draws an action, and both then fold
/// the observed opposite action into their estimates. Players move
/// simultaneously; the action draw order (player 1 first) is fixed, so a
/// seed pins the whole trace. `initial_actions`, when given, replaces the
/// k = 0 draw without consuming randomness.
inline RunResult run_tifu(
    const GameSpec& game, double eta, std::size_t steps, std::uint64_t seed,
    std::optional<std::pair<PureAction, PureAction>> initial_actions = {},
    std::size_t stride = 1, bool allow_any_game = false) {
  require_eta(eta);
  detail::require_run_args(game, steps, stride, allow_any_game);
  Rng rng(seed);
  FictitiousPlayer player1(game.m1, game.tau1);  // estimates player 2
  FictitiousPlayer player2(game.m2, game.tau2);  // estimates player 1
  MixedStrategy q1, q2;
  RunResult out;
  out.seed = seed;
  out.steps = steps;
  out.stride = stride;
  out.trace.reserve(steps / stride + 2);
  for (std::size_t k = 0; k < steps; ++k) {
    const MixedStrategy b1 = player1.respond();
    const MixedStrategy b2 = player2.respond();
    PureAction v1, v2;
    if (k == 0 && initial_actions) {
      v1 = initial_actions->first;
      v2 = initial_actions->second;
    } else {
      v1 = sample_action(b1, rng);
      v2 = sample_action(b2, rng);
    }
    q1 = empirical_update(q1, k, v1);
    q2 = empirical_update(q2, k, v2);
    player1.observe_constant_weight(v2, eta);
    player2.observe_constant_weight(v1, eta);
    if (detail::record_step(k, steps, stride))
      out.trace.push_back({k, v1, v2, player2.opponent_estimate(),
                           player1.opponent_estimate(), q1, q2, b1, b2, eta,
                           eta});
  }
  out.final_q = {q1, q2};
  out.final_r = {{player2.opponent_estimate(), player1.opponent_estimate()}};
  return out;
}

/// Self-play with the maximum-likelihood (running mean) estimate. The
/// effective weight of the step-k action is exactly 1/(k+1), recorded in
/// the step-size fields; the estimate columns stay empty since here the
/// estimates are the empirical frequencies themselves.
inline RunResult run_tvfu(const GameSpec& game, std::size_t steps,
                          std::uint64_t seed, std::size_t stride = 1,
                          bool allow_any_game = false) {
  detail::require_run_args(game, steps, stride, allow_any_game);
  Rng rng(seed);
  FictitiousPlayer player1(game.m1, game.tau1);
  FictitiousPlayer player2(game.m2, game.tau2);
  MixedStrategy q1, q2;
  RunResult out;
  out.seed = seed;
  out.steps = steps;
  out.stride = stride;
  out.trace.reserve(steps / stride + 2);
  for (std::size_t k = 0; k < steps; ++k) {
    const MixedStrategy b1 = player1.respond();
    const MixedStrategy b2 = player2.respond();
    const PureAction v1 = sample_action(b1, rng);
    const PureAction v2 = sample_action(b2, rng);
    q1 = empirical_update(q1, k, v1);
    q2 = empirical_update(q2, k, v2);
    player1.observe_running_mean(v2);
    player2.observe_running_mean(v1);
    if (detail::record_step(k, steps, stride)) {
      const double w = 1.0 / static_cast<double>(k + 1);
      out.trace.push_back({k, v1, v2, std::nullopt, std::nullopt, q1, q2, b1,
                           b2, w, w});
    }
  }
  out.final_q = {q1, q2};
  return out;
}

/// Adaptive scheme configuration: the step size starts at eta_initial and
/// can only be halved, never below eta_min; decisions happen once per
/// window of T steps.
struct AfpConfig {
  double eta_initial = 0.1;
  double eta_min = 0.0005;
  std::size_t window = 50;
};

inline void validate(const AfpConfig& cfg) {
  if (!(cfg.eta_min > 0.0 && cfg.eta_min <= cfg.eta_initial &&
        cfg.eta_initial < 1.0))
    throw InvalidParameter("AfpConfig: need 0 < eta_min <= eta_initial < 1");
  if (cfg.window < 2)
    throw InvalidParameter("AfpConfig: window must be at least 2");
}

/// Adaptive step-size play. Each player adapts independently: at every step
/// k with k >= T and k mod T = 0 it takes the sample standard deviation of
/// the first component of its opponent estimate over the last T values
/// r(k-T+1)..r(k), and halves its own eta (floored at eta_min) when that
/// deviation decreased strictly against the previous window. The first
/// completed window only records its value. Estimate updates within step k
/// use the step size decided at (or before) step k.
inline RunResult run_afp(const GameSpec& game, const AfpConfig& cfg,
                         std::size_t steps, std::uint64_t seed,
                         std::size_t stride = 1, bool allow_any_game = false) {
  validate(cfg);
  detail::require_run_args(game, steps, stride, allow_any_game);
  Rng rng(seed);
  FictitiousPlayer player1(game.m1, game.tau1);
  FictitiousPlayer player2(game.m2, game.tau2);
  MixedStrategy q1, q2;
  double eta1 = cfg.eta_initial, eta2 = cfg.eta_initial;
  std::vector<double> held_by_1, held_by_2;  // first components of r(1), r(2), ...
  held_by_1.reserve(steps);
  held_by_2.reserve(steps);
  std::optional<double> prev1, prev2;
  RunResult out;
  out.seed = seed;
  out.steps = steps;
  out.stride = stride;
  out.trace.reserve(steps / stride + 2);
  const std::size_t T = cfg.window;
  for (std::size_t k = 0; k < steps; ++k) {
    if (k >= T && k % T == 0) {
      const double s1 =
          window_stddev({held_by_1.data() + (held_by_1.size() - T), T});
      const double s2 =
          window_stddev({held_by_2.data() + (held_by_2.size() - T), T});
      if (prev1 && s1 < *prev1) eta1 = std::max(0.5 * eta1, cfg.eta_min);
      if (prev2 && s2 < *prev2) eta2 = std::max(0.5 * eta2, cfg.eta_min);
      prev1 = s1;
      prev2 = s2;
    }
    const MixedStrategy b1 = player1.respond();
    const MixedStrategy b2 = player2.respond();
    const PureAction v1 = sample_action(b1, rng);
    const PureAction v2 = sample_action(b2, rng);
    q1 = empirical_update(q1, k, v1);
    q2 = empirical_update(q2, k, v2);
    player1.observe_constant_weight(v2, eta1);
    player2.observe_constant_weight(v1, eta2);
    held_by_1.push_back(player1.opponent_estimate().first());
    held_by_2.push_back(player2.opponent_estimate().first());
    if (detail::record_step(k, steps, stride))
      out.trace.push_back({k, v1, v2, player2.opponent_estimate(),
                           player1.opponent_estimate(), q1, q2, b1, b2, eta1,
                           eta2});
  }
  out.final_q = {q1, q2};
  out.final_r = {{player2.opponent_estimate(), player1.opponent_estimate()}};
  return out;
}

/// Player 1 runs the constant-weight scheme against an opponent that plays
/// a fixed mixed strategy. Exercises the one-sided convergence property of
/// the smoothed estimate.
inline RunResult run_tifu_fixed_opponent(const GameSpec& game, double eta,
                                         std::size_t steps, std::uint64_t seed,
                                         const MixedStrategy& opponent_plays,
                                         std::size_t stride = 1) {
  require_eta(eta);
  require_tau(game);
  if (steps == 0) throw InvalidParameter("run: steps must be positive");
  if (stride == 0) throw InvalidParameter("run: stride must be positive");
  Rng rng(seed);
  FictitiousPlayer player1(game.m1, game.tau1);
  MixedStrategy q1, q2;
  RunResult out;
  out.seed = seed;
  out.steps = steps;
  out.stride = stride;
  for (std::size_t k = 0; k < steps; ++k) {
    const MixedStrategy b1 = player1.respond();
    const PureAction v1 = sample_action(b1, rng);
    const PureAction v2 = sample_action(opponent_plays, rng);
    q1 = empirical_update(q1, k, v1);
    q2 = empirical_update(q2, k, v2);
    player1.observe_constant_weight(v2, eta);
    if (detail::record_step(k, steps, stride))
      out.trace.push_back({k, v1, v2, std::nullopt,
                           player1.opponent_estimate(), q1, q2, b1,
                           opponent_plays, eta, 0.0});
  }
  out.final_q = {q1, q2};
  out.final_r = {{MixedStrategy{}, player1.opponent_estimate()}};
  return out;
}

}  // namespace fictplay
