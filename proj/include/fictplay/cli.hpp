#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fictplay/equilibrium.hpp"
#include "fictplay/play.hpp"
#include "fictplay/presets.hpp"
#include "fictplay/svg.hpp"
#include "fictplay/trace_io.hpp"

namespace fictplay {

/// Malformed comma-separated value list (payoff matrix, action pair).
struct MatrixFormatError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // a reproduce comparison missed its tolerance
  kExitUsage = 2,        // unknown flag, missing required option, bad subcommand
  kExitBadMatrix = 3,    // malformed --m1/--m2 value
  kExitAssumption = 4,   // sign structure violated without --allow-any-game
  kExitParameter = 5,    // eta/tau/steps out of range
  kExitIo = 6,           // file could not be written or read
  kExitInternal = 70,
};

enum class Mode { ne, threshold, mean, flow, tifu, tvfu, afp, reproduce };

struct ExperimentConfig {
  Mode mode = Mode::ne;
  GameSpec game;
  bool allow_any_game = false;
  double eta = 0.0;  // mean/tifu step size, afp initial step size
  double eta_min = 0.0005;
  std::size_t window = 50;
  std::size_t steps = 0;  // play steps, or max steps for the mean dynamic
  double tol = 1e-8;
  std::uint64_t seed = 0;
  double t_end = 0.0;
  double dt = 0.0;
  Integrator method = Integrator::rk4;
  std::optional<std::pair<PureAction, PureAction>> initial_actions;
  std::size_t stride = 1;
  std::filesystem::path out;         // trace CSV, empty = none
  std::filesystem::path svg;         // chart, empty = none
  std::vector<std::string> columns;  // chart columns override
  std::optional<double> eta_query;   // threshold mode
  bool track_empirical = true;       // mean mode
  std::string preset;
  std::filesystem::path out_dir = ".";
};

namespace cli_detail {

inline std::vector<double> parse_number_list(const std::string& text,
                                             std::size_t expected,
                                             const std::string& what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string field = text.substr(start, comma - start);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() ||
        !std::isfinite(v))
      throw MatrixFormatError("malformed " + what + " value '" + text +
                              "': expected " + std::to_string(expected) +
                              " comma-separated numbers");
    values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.size() != expected)
    throw MatrixFormatError("malformed " + what + " value '" + text +
                            "': expected " + std::to_string(expected) +
                            " comma-separated numbers");
  return values;
}

inline PayoffMatrix parse_matrix(const std::string& text,
                                 const std::string& flag) {
  const auto v = parse_number_list(text, 4, flag);
  return {v[0], v[1], v[2], v[3]};
}

inline PureAction to_action(double v, const std::string& flag) {
  if (v == 1.0) return PureAction::action1;
  if (v == 2.0) return PureAction::action2;
  throw MatrixFormatError("malformed " + flag + ": actions are 1 or 2");
}

struct HelpShown {};

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace cli_detail

/// Parses argv-style arguments (without the program name) into a validated
/// configuration. Throws CLI::ParseError for usage problems,
/// MatrixFormatError for malformed value lists, InvalidParameter for range
/// violations, AssumptionViolation for sign-structure failures without
/// --allow-any-game, and cli_detail::HelpShown after writing help to `out`.
inline ExperimentConfig parse_args(const std::vector<std::string>& args,
                                   std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;

  CLI::App app{
      "fictplay: smoothed fictitious play for 2x2 attacker/defender games.\n"
      "Payoff matrices are entered row-major in the displayed layout:\n"
      "  --m1 a,b,c,d  is [[a,b],[c,d]]  (rows = player 1's actions)\n"
      "  --m2 e,g,f,h  is [[e,g],[f,h]]  (rows = player 2's actions)\n"
      "The sign structure a<c, b>d, e>f, g<h is enforced unless\n"
      "--allow-any-game is given. Exit codes: 0 ok, 1 failed check,\n"
      "2 usage, 3 malformed matrix, 4 sign structure, 5 bad parameter,\n"
      "6 i/o error.",
      "fictplay"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "print help for every subcommand");

  std::string m1_text, m2_text, method_text = "rk4", initial_text;
  bool no_empirical = false;

  auto add_game_flags = [&](CLI::App* sub) {
    sub->add_option("--m1", m1_text, "player 1 payoffs a,b,c,d")->required();
    sub->add_option("--m2", m2_text, "player 2 payoffs e,g,f,h")->required();
    sub->add_option("--tau1", cfg.game.tau1, "entropy weight of player 1 (> 0)")
        ->required();
    sub->add_option("--tau2", cfg.game.tau2, "entropy weight of player 2 (> 0)")
        ->required();
    sub->add_flag("--allow-any-game", cfg.allow_any_game,
                  "skip the sign-structure validation");
  };
  auto add_output_flags = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "write the trace CSV here");
    sub->add_option("--svg", cfg.svg, "write an SVG line chart here");
    sub->add_option("--columns", cfg.columns,
                    "chart columns (default depends on the mode)")
        ->delimiter(',');
    sub->add_option("--stride", cfg.stride, "record every n-th step (default 1)");
  };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--steps", cfg.steps, "number of play steps");
    sub->add_option("--seed", cfg.seed, "generator seed (default 0)");
  };

  CLI::App* ne =
      app.add_subcommand("ne", "solve the equilibrium and stability threshold");
  add_game_flags(ne);

  CLI::App* threshold = app.add_subcommand(
      "threshold", "stability threshold, Jacobian and eigenvalue moduli");
  add_game_flags(threshold);
  double eta_query = 0.0;
  CLI::Option* eta_query_opt = threshold->add_option(
      "--eta", eta_query, "evaluate the Jacobian at this step size");

  CLI::App* mean = app.add_subcommand("mean", "deterministic mean dynamic");
  add_game_flags(mean);
  mean->add_option("--eta", cfg.eta, "constant step size in (0,1)")->required();
  mean->add_option("--steps", cfg.steps, "maximum number of steps");
  mean->add_option("--tol", cfg.tol, "convergence tolerance (default 1e-8)");
  mean->add_flag("--no-empirical", no_empirical,
                 "do not track the empirical means");
  add_output_flags(mean);

  CLI::App* flow = app.add_subcommand("flow", "continuous best-response flow");
  add_game_flags(flow);
  flow->add_option("--t-end", cfg.t_end, "integration horizon")->required();
  flow->add_option("--dt", cfg.dt, "integration step (> 0)")->required();
  flow->add_option("--method", method_text, "euler or rk4 (default rk4)");
  add_output_flags(flow);

  CLI::App* tifu = app.add_subcommand(
      "tifu", "stochastic play with the constant-weight estimate");
  add_game_flags(tifu);
  tifu->add_option("--eta", cfg.eta, "constant step size in (0,1)")->required();
  add_run_flags(tifu);
  tifu->add_option("--initial-actions", initial_text,
                   "force the first actions, e.g. 1,2");
  add_output_flags(tifu);

  CLI::App* tvfu = app.add_subcommand(
      "tvfu", "stochastic play with the running-mean estimate");
  add_game_flags(tvfu);
  add_run_flags(tvfu);
  add_output_flags(tvfu);

  CLI::App* afp = app.add_subcommand("afp", "adaptive step-size play");
  add_game_flags(afp);
  afp->add_option("--eta", cfg.eta, "initial step size")->required();
  afp->add_option("--eta-min", cfg.eta_min, "step size floor (default 0.0005)");
  afp->add_option("--window", cfg.window, "decision window T (default 50)");
  add_run_flags(afp);
  add_output_flags(afp);

  CLI::App* reproduce_cmd = app.add_subcommand(
      "reproduce", "regenerate a bundled reference experiment");
  reproduce_cmd
      ->add_option("preset", cfg.preset,
                   "fig2 | fig3 | fig4 | fig6 | fig5-7 | table-values")
      ->required()
      ->check(CLI::IsMember(
          {"fig2", "fig3", "fig4", "fig6", "fig5-7", "table-values"}));
  reproduce_cmd->add_option("--out-dir", cfg.out_dir,
                            "directory for the emitted files (default .)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      throw cli_detail::HelpShown{};
    }
    throw;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "ne") cfg.mode = Mode::ne;
  else if (name == "threshold") cfg.mode = Mode::threshold;
  else if (name == "mean") cfg.mode = Mode::mean;
  else if (name == "flow") cfg.mode = Mode::flow;
  else if (name == "tifu") cfg.mode = Mode::tifu;
  else if (name == "tvfu") cfg.mode = Mode::tvfu;
  else if (name == "afp") cfg.mode = Mode::afp;
  else cfg.mode = Mode::reproduce;

  if (cfg.mode == Mode::reproduce) return cfg;

  cfg.game.m1 = cli_detail::parse_matrix(m1_text, "--m1");
  cfg.game.m2 = cli_detail::parse_matrix(m2_text, "--m2");
  require_tau(cfg.game);
  if (!cfg.allow_any_game) require_assumption(cfg.game);

  if (cfg.steps == 0) {
    cfg.steps = cfg.mode == Mode::mean ? 100000 : 10000;
  }
  if (cfg.mode == Mode::mean || cfg.mode == Mode::tifu || cfg.mode == Mode::afp)
    require_eta(cfg.eta);
  if (cfg.mode == Mode::afp)
    validate(AfpConfig{cfg.eta, cfg.eta_min, cfg.window});
  if (cfg.mode == Mode::threshold && eta_query_opt->count() > 0)
    cfg.eta_query = eta_query;
  if (cfg.mode == Mode::flow) {
    if (method_text == "euler") cfg.method = Integrator::euler;
    else if (method_text == "rk4") cfg.method = Integrator::rk4;
    else throw InvalidParameter("--method must be euler or rk4");
    if (!(cfg.dt > 0.0)) throw InvalidParameter("--dt must be positive");
    if (!(cfg.t_end >= 0.0)) throw InvalidParameter("--t-end must be nonnegative");
  }
  if (cfg.mode == Mode::mean && !(cfg.tol > 0.0))
    throw InvalidParameter("--tol must be positive");
  if (!initial_text.empty()) {
    const auto v =
        cli_detail::parse_number_list(initial_text, 2, "--initial-actions");
    cfg.initial_actions = {cli_detail::to_action(v[0], "--initial-actions"),
                           cli_detail::to_action(v[1], "--initial-actions")};
  }
  if (cfg.stride == 0) throw InvalidParameter("--stride must be positive");
  cfg.track_empirical = !no_empirical;
  return cfg;
}

namespace cli_detail {

inline void write_chart(const ExperimentConfig& cfg,
                        const std::vector<TraceRow>& rows,
                        const std::vector<std::string>& default_columns,
                        std::ostream& out) {
  if (!cfg.out.empty()) {
    write_trace(rows, cfg.out);
    out << "wrote " << cfg.out.string() << "\n";
  }
  if (!cfg.svg.empty()) {
    std::vector<ReferenceLine> refs;
    const FixedPoint fp = solve_fixed_point(cfg.game);
    refs.push_back({fp.r1.first(), "r1*"});
    refs.push_back({fp.r2.first(), "r2*"});
    render_svg(rows, cfg.columns.empty() ? default_columns : cfg.columns,
               cfg.svg, refs);
    out << "wrote " << cfg.svg.string() << "\n";
  }
}

inline void print_equilibrium(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.allow_any_game && !check_assumption(cfg.game).ok) {
    // Threshold formula signs do not apply; report the fixed point only.
    const FixedPoint fp = solve_fixed_point(cfg.game);
    out << "r1 = (" << fmt(fp.r1.first()) << ", " << fmt(fp.r1.second()) << ")\n";
    out << "r2 = (" << fmt(fp.r2.first()) << ", " << fmt(fp.r2.second()) << ")\n";
    out << "residual = " << fmt(fp.residual) << "\n";
    out << "eta0 = n/a (sign structure violated; fixed point may not be unique)\n";
    return;
  }
  const EquilibriumReport rep = solve_equilibrium(cfg.game);
  out << "r1 = (" << fmt(rep.rbar1.first()) << ", " << fmt(rep.rbar1.second())
      << ")\n";
  out << "r2 = (" << fmt(rep.rbar2.first()) << ", " << fmt(rep.rbar2.second())
      << ")\n";
  out << "residual = " << fmt(rep.residual) << "\n";
  out << "eta0 = " << fmt(rep.eta0) << "\n";
  out << "spectral_radius_at_eta0 = " << fmt(rep.spectral_radius_at_eta0)
      << "\n";
}

inline void print_threshold(const ExperimentConfig& cfg, std::ostream& out) {
  const FixedPoint fp = solve_fixed_point(cfg.game);
  if (cfg.allow_any_game && !check_assumption(cfg.game).ok) {
    const double eta = cfg.eta_query.value_or(0.1);
    const Mat2 j = jacobian_at(cfg.game, fp.r1, fp.r2, eta);
    const auto mods = eigen_moduli(j);
    out << "eta0 = n/a (sign structure violated)\n";
    out << "eta = " << fmt(eta) << "\n";
    out << "jacobian = [" << fmt(j.a11) << ", " << fmt(j.a12) << "; "
        << fmt(j.a21) << ", " << fmt(j.a22) << "]\n";
    out << "eigenvalue_moduli = (" << fmt(mods[0]) << ", " << fmt(mods[1])
        << ")\n";
    out << "stable = " << (std::max(mods[0], mods[1]) < 1.0 ? "true" : "false")
        << "\n";
    return;
  }
  const StabilityReport rep =
      stability_threshold(cfg.game, fp.r1, fp.r2, cfg.eta_query);
  out << "eta0 = " << fmt(rep.eta0) << "\n";
  out << "eta0_crossing = " << fmt(rep.eta0_crossing) << "\n";
  out << "eta = " << fmt(rep.eta) << "\n";
  out << "jacobian = [" << fmt(rep.jacobian.a11) << ", "
      << fmt(rep.jacobian.a12) << "; " << fmt(rep.jacobian.a21) << ", "
      << fmt(rep.jacobian.a22) << "]\n";
  out << "eigenvalue_moduli = (" << fmt(rep.eigenvalue_moduli[0]) << ", "
      << fmt(rep.eigenvalue_moduli[1]) << ")\n";
  out << "stable = " << (rep.stable ? "true" : "false") << "\n";
}

inline void print_run(const RunResult& run, std::ostream& out) {
  out << "steps = " << run.steps << "\n";
  out << "seed = " << run.seed << "\n";
  out << "final q1_1 = " << fmt(run.final_q.first.first()) << "\n";
  out << "final q2_1 = " << fmt(run.final_q.second.first()) << "\n";
  if (run.final_r) {
    out << "final r1_1 = " << fmt(run.final_r->first.first()) << "\n";
    out << "final r2_1 = " << fmt(run.final_r->second.first()) << "\n";
  }
  if (!run.trace.empty()) {
    out << "final eta1 = " << fmt(run.trace.back().eta1) << "\n";
    out << "final eta2 = " << fmt(run.trace.back().eta2) << "\n";
  }
}

}  // namespace cli_detail

/// Executes a parsed configuration, writing human-readable results to `out`
/// and any requested files. Returns an ExitCode value.
inline int run_config(const ExperimentConfig& cfg, std::ostream& out) {
  using cli_detail::fmt;
  switch (cfg.mode) {
    case Mode::ne:
      cli_detail::print_equilibrium(cfg, out);
      return kExitOk;
    case Mode::threshold:
      cli_detail::print_threshold(cfg, out);
      return kExitOk;
    case Mode::mean: {
      MeanState start;
      if (cfg.track_empirical) {
        start.q1 = MixedStrategy{};
        start.q2 = MixedStrategy{};
      }
      const MeanRun run =
          iterate_mean(cfg.game, start, cfg.eta, cfg.steps, cfg.tol, cfg.stride);
      out << "converged = " << (run.converged ? "true" : "false") << "\n";
      out << "steps_used = " << run.steps_used << "\n";
      const MeanState& last = run.trajectory.back();
      out << "final r1_1 = " << fmt(last.r1.first()) << "\n";
      out << "final r2_1 = " << fmt(last.r2.first()) << "\n";
      out << "rbar = (" << fmt(run.rbar1.first()) << ", "
          << fmt(run.rbar2.first()) << ")\n";
      if (!run.converged)
        out << "oscillation = "
            << (persistent_oscillation(run) ? "true" : "false") << "\n";
      cli_detail::write_chart(cfg, to_rows(run, cfg.game, cfg.eta),
                              {"r1_1", "r2_1"}, out);
      return kExitOk;
    }
    case Mode::flow: {
      const auto traj =
          continuous_flow(cfg.game, MixedStrategy{}, MixedStrategy{},
                          cfg.t_end, cfg.dt, cfg.method);
      out << "steps = " << traj.size() - 1 << "\n";
      out << "final p1_1 = " << fmt(traj.back().p1.first()) << "\n";
      out << "final p2_1 = " << fmt(traj.back().p2.first()) << "\n";
      cli_detail::write_chart(cfg, to_rows(traj), {"r1_1", "r2_1"}, out);
      return kExitOk;
    }
    case Mode::tifu: {
      const RunResult run =
          run_tifu(cfg.game, cfg.eta, cfg.steps, cfg.seed, cfg.initial_actions,
                   cfg.stride, cfg.allow_any_game);
      cli_detail::print_run(run, out);
      cli_detail::write_chart(cfg, to_rows(run), {"r1_1", "r2_1"}, out);
      return kExitOk;
    }
    case Mode::tvfu: {
      const RunResult run =
          run_tvfu(cfg.game, cfg.steps, cfg.seed, cfg.stride, cfg.allow_any_game);
      cli_detail::print_run(run, out);
      cli_detail::write_chart(cfg, to_rows(run), {"q1_1", "q2_1"}, out);
      return kExitOk;
    }
    case Mode::afp: {
      const AfpConfig acfg{cfg.eta, cfg.eta_min, cfg.window};
      const RunResult run = run_afp(cfg.game, acfg, cfg.steps, cfg.seed,
                                    cfg.stride, cfg.allow_any_game);
      cli_detail::print_run(run, out);
      cli_detail::write_chart(cfg, to_rows(run), {"q1_1", "q2_1"}, out);
      return kExitOk;
    }
    case Mode::reproduce:
      return reproduce(cfg.preset, cfg.out_dir, out);
  }
  return kExitInternal;
}

/// Full command-line entry point: parse, validate, execute, map errors to
/// the documented exit codes with a one-line message on stderr.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  try {
    const ExperimentConfig cfg = parse_args(args, out, err);
    return run_config(cfg, out);
  } catch (const cli_detail::HelpShown&) {
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MatrixFormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadMatrix;
  } catch (const AssumptionViolation& e) {
    err << "error: " << e.what() << " (use --allow-any-game to override)\n";
    return kExitAssumption;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace fictplay
