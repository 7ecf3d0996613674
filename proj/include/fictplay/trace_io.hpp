#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fictplay/dynamics.hpp"
#include "fictplay/play.hpp"

namespace fictplay {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kTraceHeader =
    "k,action1,action2,r1_1,r2_1,q1_1,q2_1,beta1_1,beta2_1,eta";

/// One CSV row; absent fields stay empty in the file. Only first simplex
/// components are serialized (the second ones are their complements).
struct TraceRow {
  std::size_t k = 0;
  std::optional<int> action1, action2;  // 1 or 2
  std::optional<double> r1_1, r2_1;
  std::optional<double> q1_1, q2_1;
  std::optional<double> beta1_1, beta2_1;
  std::optional<double> eta;
};

inline std::optional<double> column_value(const TraceRow& row,
                                          std::string_view name) {
  if (name == "r1_1") return row.r1_1;
  if (name == "r2_1") return row.r2_1;
  if (name == "q1_1") return row.q1_1;
  if (name == "q2_1") return row.q2_1;
  if (name == "beta1_1") return row.beta1_1;
  if (name == "beta2_1") return row.beta2_1;
  if (name == "eta") return row.eta;
  throw InvalidParameter("unknown trace column: " + std::string(name));
}

inline std::vector<TraceRow> to_rows(const RunResult& result) {
  std::vector<TraceRow> rows;
  rows.reserve(result.trace.size());
  for (const TraceRecord& rec : result.trace) {
    TraceRow row;
    row.k = rec.k;
    row.action1 = static_cast<int>(rec.action1);
    row.action2 = static_cast<int>(rec.action2);
    if (rec.r1) row.r1_1 = rec.r1->first();
    if (rec.r2) row.r2_1 = rec.r2->first();
    row.q1_1 = rec.q1.first();
    row.q2_1 = rec.q2.first();
    row.beta1_1 = rec.beta1.first();
    row.beta2_1 = rec.beta2.first();
    row.eta = rec.eta1;  // player 1's step size under per-player adaptation
    rows.push_back(row);
  }
  return rows;
}

/// Mean-dynamic trajectory rows: no actions; best responses are recomputed
/// from the recorded states.
inline std::vector<TraceRow> to_rows(const MeanRun& run, const GameSpec& game,
                                     double eta) {
  std::vector<TraceRow> rows;
  rows.reserve(run.trajectory.size());
  for (const MeanState& s : run.trajectory) {
    TraceRow row;
    row.k = s.k;
    row.r1_1 = s.r1.first();
    row.r2_1 = s.r2.first();
    if (s.q1) row.q1_1 = s.q1->first();
    if (s.q2) row.q2_1 = s.q2->first();
    row.beta1_1 = best_response(game, 1, s.r2).first();
    row.beta2_1 = best_response(game, 2, s.r1).first();
    row.eta = eta;
    rows.push_back(row);
  }
  return rows;
}

/// Flow trajectory rows: the state lands in the estimate columns.
inline std::vector<TraceRow> to_rows(const std::vector<FlowState>& traj) {
  std::vector<TraceRow> rows;
  rows.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    TraceRow row;
    row.k = i;
    row.r1_1 = traj[i].p1.first();
    row.r2_1 = traj[i].p2.first();
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

// %.12g: 12 significant digits, no locale surprises, byte-stable.
inline void append_field(std::string& out, const std::optional<double>& v) {
  out.push_back(',');
  if (!v) return;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", *v);
  out += buf;
}

inline void append_field(std::string& out, const std::optional<int>& v) {
  out.push_back(',');
  if (v) out += std::to_string(*v);
}

}  // namespace detail

/// Writes the comma-separated trace with the fixed header, LF line
/// endings, floats at 12 significant digits. Byte-for-byte deterministic
/// for a fixed run.
inline void write_trace(const std::vector<TraceRow>& rows,
                        const std::filesystem::path& path) {
  std::string out;
  out.reserve(64 * (rows.size() + 1));
  out += kTraceHeader;
  out.push_back('\n');
  for (const TraceRow& row : rows) {
    out += std::to_string(row.k);
    detail::append_field(out, row.action1);
    detail::append_field(out, row.action2);
    detail::append_field(out, row.r1_1);
    detail::append_field(out, row.r2_1);
    detail::append_field(out, row.q1_1);
    detail::append_field(out, row.q2_1);
    detail::append_field(out, row.beta1_1);
    detail::append_field(out, row.beta2_1);
    detail::append_field(out, row.eta);
    out.push_back('\n');
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open trace file for writing: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("failed writing trace file: " + path.string());
}

inline void emit_trace(const RunResult& result,
                       const std::filesystem::path& path) {
  write_trace(to_rows(result), path);
}

inline void emit_trace(const MeanRun& run, const GameSpec& game, double eta,
                       const std::filesystem::path& path) {
  write_trace(to_rows(run, game, eta), path);
}

inline void emit_trace(const std::vector<FlowState>& traj,
                       const std::filesystem::path& path) {
  write_trace(to_rows(traj), path);
}

inline std::vector<TraceRow> read_trace(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open trace file: " + path.string());
  std::string line;
  if (!std::getline(file, line) || line != kTraceHeader)
    throw IoError("bad trace header in " + path.string());
  std::vector<TraceRow> rows;
  auto fail = [&path](std::size_t lineno) -> IoError {
    return IoError("malformed trace line " + std::to_string(lineno) + " in " +
                   path.string());
  };
  std::size_t lineno = 1;
  while (std::getline(file, line)) {
    ++lineno;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 10) throw fail(lineno);
    auto as_double = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size()) throw fail(lineno);
      return v;
    };
    auto as_action = [&](const std::string& s) -> std::optional<int> {
      if (s.empty()) return std::nullopt;
      if (s != "1" && s != "2") throw fail(lineno);
      return s == "1" ? 1 : 2;
    };
    TraceRow row;
    char* end = nullptr;
    row.k = std::strtoull(fields[0].c_str(), &end, 10);
    if (fields[0].empty() || end != fields[0].c_str() + fields[0].size())
      throw fail(lineno);
    row.action1 = as_action(fields[1]);
    row.action2 = as_action(fields[2]);
    row.r1_1 = as_double(fields[3]);
    row.r2_1 = as_double(fields[4]);
    row.q1_1 = as_double(fields[5]);
    row.q2_1 = as_double(fields[6]);
    row.beta1_1 = as_double(fields[7]);
    row.beta2_1 = as_double(fields[8]);
    row.eta = as_double(fields[9]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fictplay
