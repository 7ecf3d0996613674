#pragma once

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>

#include "fictplay/equilibrium.hpp"
#include "fictplay/play.hpp"
#include "fictplay/svg.hpp"
#include "fictplay/trace_io.hpp"

namespace fictplay {

/// Bundled attacker/defender reference configuration used by the
/// `reproduce` presets and the acceptance checks.
inline GameSpec reference_game() {
  return {{1.0, 5.0, 3.0, 2.0}, {4.0, 1.0, 3.0, 5.0}, 0.5, 0.3};
}

/// Reference table values for the configuration above: the two-decimal
/// equilibrium and the four-decimal threshold derived from it.
inline constexpr double kReferenceNe1 = 0.79;
inline constexpr double kReferenceNe2 = 0.47;
inline constexpr double kReferenceNeTol = 0.005;
inline constexpr double kReferenceEta0 = 0.2536;
inline constexpr double kReferenceEta0Tol = 0.0005;

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::vector<ReferenceLine> ne_reference_lines(const GameSpec& game) {
  const FixedPoint fp = solve_fixed_point(game);
  return {{fp.r1.first(), "r1*"}, {fp.r2.first(), "r2*"}};
}

}  // namespace detail

/// Runs one bundled preset, writing its trace/chart files into `outdir` and
/// a one-line summary per artifact to `summary`. Returns 0 on success; the
/// table-values preset returns 1 when a comparison misses its tolerance.
/// All presets start from the uniform state and use seed 0.
inline int reproduce(const std::string& preset,
                     const std::filesystem::path& outdir,
                     std::ostream& summary) {
  const GameSpec game = reference_game();
  std::filesystem::create_directories(outdir);

  if (preset == "table-values") {
    const EquilibriumReport rep = solve_equilibrium(game);
    const double ne_err = std::max(std::abs(rep.rbar1.first() - kReferenceNe1),
                                   std::abs(rep.rbar2.first() - kReferenceNe2));
    const bool ne_ok = ne_err <= kReferenceNeTol;
    const double eta0_err = std::abs(rep.eta0 - kReferenceEta0);
    const bool eta0_ok = eta0_err <= kReferenceEta0Tol;
    summary << "NE: (" << detail::fmt6(kReferenceNe1) << ","
            << detail::fmt6(1.0 - kReferenceNe1) << ")/("
            << detail::fmt6(kReferenceNe2) << ","
            << detail::fmt6(1.0 - kReferenceNe2) << ") computed=("
            << detail::fmt6(rep.rbar1.first()) << ","
            << detail::fmt6(rep.rbar1.second()) << ")/("
            << detail::fmt6(rep.rbar2.first()) << ","
            << detail::fmt6(rep.rbar2.second()) << ") |diff|="
            << detail::fmt6(ne_err) << " tol=" << detail::fmt6(kReferenceNeTol)
            << " " << (ne_ok ? "PASS" : "FAIL") << "\n";
    summary << "eta0: " << detail::fmt6(kReferenceEta0)
            << " computed=" << detail::fmt6(rep.eta0)
            << " |diff|=" << detail::fmt6(eta0_err)
            << " tol=" << detail::fmt6(kReferenceEta0Tol) << " "
            << (eta0_ok ? "PASS" : "FAIL") << "\n";
    if (!eta0_ok) {
      // Provenance of the mismatch: the reference threshold equals the
      // closed form at the two-decimal equilibrium, not at the solved one.
      const double at_rounded =
          2.0 / (25.0 / 0.15 * 0.79 * 0.21 * 0.47 * 0.53 + 1.0);
      summary << "note: the reference threshold matches the closed form at "
                 "the two-decimal equilibrium ("
              << detail::fmt6(at_rounded)
              << "); at the solved equilibrium the threshold is "
              << detail::fmt6(rep.eta0)
              << ", independently confirmed by the spectral-radius crossing."
              << "\n";
    }
    return ne_ok && eta0_ok ? 0 : 1;
  }

  const auto refs = detail::ne_reference_lines(game);

  if (preset == "fig2" || preset == "fig3") {
    const double eta = preset == "fig2" ? 0.25 : 0.26;
    MeanState start;
    start.q1 = MixedStrategy{};
    start.q2 = MixedStrategy{};
    const MeanRun run = iterate_mean(game, start, eta, 10000, 1e-8);
    const auto rows = to_rows(run, game, eta);
    const auto csv = outdir / (preset + ".csv");
    const auto svg = outdir / (preset + ".svg");
    write_trace(rows, csv);
    render_svg(rows, {"r1_1", "r2_1"}, svg, refs);
    summary << preset << ": mean dynamic eta=" << detail::fmt(eta)
            << " converged=" << (run.converged ? "true" : "false")
            << " steps=" << run.steps_used;
    if (!run.converged)
      summary << " oscillation="
              << (persistent_oscillation(run) ? "true" : "false");
    summary << " wrote " << csv.string() << " " << svg.string() << "\n";
    return 0;
  }

  if (preset == "fig4") {
    const RunResult run = run_tifu(game, 0.01, 100000, 0, {}, 100);
    const auto rows = to_rows(run);
    const auto csv = outdir / "fig4.csv";
    const auto svg = outdir / "fig4.svg";
    write_trace(rows, csv);
    render_svg(rows, {"r1_1", "r2_1"}, svg, refs);
    summary << "fig4: stochastic constant-weight play eta=0.01 steps=100000"
            << " final q=(" << detail::fmt6(run.final_q.first.first()) << ","
            << detail::fmt6(run.final_q.second.first()) << ") wrote "
            << csv.string() << " " << svg.string() << "\n";
    return 0;
  }

  if (preset == "fig6") {
    const RunResult run = run_tvfu(game, 10000, 0, 10);
    const auto rows = to_rows(run);
    const auto csv = outdir / "fig6.csv";
    const auto svg = outdir / "fig6.svg";
    write_trace(rows, csv);
    render_svg(rows, {"q1_1", "q2_1"}, svg, refs);
    summary << "fig6: running-mean play steps=10000 final q=("
            << detail::fmt6(run.final_q.first.first()) << ","
            << detail::fmt6(run.final_q.second.first()) << ") wrote "
            << csv.string() << " " << svg.string() << "\n";
    return 0;
  }

  if (preset == "fig5-7") {
    const AfpConfig cfg{0.1, 0.0005, 50};
    const RunResult run = run_afp(game, cfg, 10000, 0, 10);
    const auto rows = to_rows(run);
    const auto csv = outdir / "fig5-7.csv";
    const auto svg5 = outdir / "fig5.svg";
    const auto svg7 = outdir / "fig7.svg";
    write_trace(rows, csv);
    render_svg(rows, {"q1_1", "q2_1"}, svg5, refs);
    render_svg(rows, {"eta"}, svg7);
    summary << "fig5-7: adaptive play eta0=0.1 eta_min=0.0005 T=50"
            << " steps=10000 final q=("
            << detail::fmt6(run.final_q.first.first()) << ","
            << detail::fmt6(run.final_q.second.first()) << ") final eta=("
            << detail::fmt(run.trace.back().eta1) << ","
            << detail::fmt(run.trace.back().eta2) << ") wrote " << csv.string()
            << " " << svg5.string() << " " << svg7.string() << "\n";
    return 0;
  }

  throw InvalidParameter("unknown reproduce preset: " + preset);
}

}  // namespace fictplay
