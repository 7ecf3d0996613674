#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fictplay/trace_io.hpp"

namespace fictplay {

/// Horizontal dashed marker, e.g. an equilibrium component.
struct ReferenceLine {
  double y = 0.0;
  std::string label;
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline const char* series_color(std::size_t i) {
  static constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                             "#d62728", "#9467bd", "#8c564b"};
  return kPalette[i % 6];
}

}  // namespace detail

/// Standalone SVG 1.1 line chart of selected trace columns against the
/// step index; the y axis is fixed to [0,1]. Rows where a column is empty
/// are skipped for that series. A series with a single sample renders a
/// circle marker instead of a polyline.
inline void render_svg(const std::vector<TraceRow>& rows,
                       const std::vector<std::string>& columns,
                       const std::filesystem::path& path,
                       const std::vector<ReferenceLine>& references = {}) {
  if (rows.empty()) throw InvalidParameter("render_svg: empty trace");
  if (columns.empty()) throw InvalidParameter("render_svg: no columns selected");

  constexpr double kWidth = 880, kHeight = 500;
  constexpr double kLeft = 62, kRight = 720, kTop = 24, kBottom = 456;

  double kmax = 0.0;
  for (const TraceRow& r : rows) kmax = std::max(kmax, static_cast<double>(r.k));
  const double kspan = kmax > 0.0 ? kmax : 1.0;
  auto sx = [&](double k) { return kLeft + (kRight - kLeft) * (k / kspan); };
  auto sy = [&](double y) { return kBottom - (kBottom - kTop) * y; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         detail::fmt_num(kWidth) + "\" height=\"" + detail::fmt_num(kHeight) +
         "\" viewBox=\"0 0 " + detail::fmt_num(kWidth) + " " +
         detail::fmt_num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // frame and y grid
  svg += "<rect x=\"" + detail::fmt_num(kLeft) + "\" y=\"" +
         detail::fmt_num(kTop) + "\" width=\"" + detail::fmt_num(kRight - kLeft) +
         "\" height=\"" + detail::fmt_num(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = 0.25 * i;
    svg += "<line x1=\"" + detail::fmt_num(kLeft) + "\" y1=\"" +
           detail::fmt_num(sy(y)) + "\" x2=\"" + detail::fmt_num(kRight) +
           "\" y2=\"" + detail::fmt_num(sy(y)) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::fmt_num(kLeft - 8) + "\" y=\"" +
           detail::fmt_num(sy(y) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           detail::fmt_num(y) + "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double k = kspan * i / 4.0;
    svg += "<text x=\"" + detail::fmt_num(sx(k)) + "\" y=\"" +
           detail::fmt_num(kBottom + 18) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           detail::fmt_num(k) + "</text>\n";
  }
  svg += "<text x=\"" + detail::fmt_num(0.5 * (kLeft + kRight)) + "\" y=\"" +
         detail::fmt_num(kBottom + 38) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">step k</text>\n";

  for (const ReferenceLine& ref : references) {
    svg += "<line x1=\"" + detail::fmt_num(kLeft) + "\" y1=\"" +
           detail::fmt_num(sy(ref.y)) + "\" x2=\"" + detail::fmt_num(kRight) +
           "\" y2=\"" + detail::fmt_num(sy(ref.y)) +
           "\" stroke=\"#888888\" stroke-dasharray=\"6,4\"/>\n";
    svg += "<text x=\"" + detail::fmt_num(kRight + 6) + "\" y=\"" +
           detail::fmt_num(sy(ref.y) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">" +
           ref.label + " = " + detail::fmt_num(ref.y) + "</text>\n";
  }

  std::size_t drawn = 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::string points;
    std::size_t count = 0;
    double px = 0.0, py = 0.0;
    for (const TraceRow& row : rows) {
      const auto v = column_value(row, columns[c]);  // validates the name
      if (!v) continue;
      px = sx(static_cast<double>(row.k));
      py = sy(*v);
      points += detail::fmt_num(px) + "," + detail::fmt_num(py) + " ";
      ++count;
    }
    if (count == 0) continue;
    const char* color = detail::series_color(c);
    if (count == 1) {
      svg += "<circle cx=\"" + detail::fmt_num(px) + "\" cy=\"" +
             detail::fmt_num(py) + "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
    } else {
      points.pop_back();
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.4\" points=\"" + points + "\"/>\n";
    }
    const double ly = kTop + 16 + 18.0 * static_cast<double>(drawn);
    svg += "<line x1=\"" + detail::fmt_num(kRight + 6) + "\" y1=\"" +
           detail::fmt_num(ly - 4) + "\" x2=\"" + detail::fmt_num(kRight + 30) +
           "\" y2=\"" + detail::fmt_num(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::fmt_num(kRight + 36) + "\" y=\"" +
           detail::fmt_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + columns[c] +
           "</text>\n";
    ++drawn;
  }
  if (drawn == 0)
    throw InvalidParameter("render_svg: none of the selected columns has data");
  svg += "</svg>\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open svg file for writing: " + path.string());
  file.write(svg.data(), static_cast<std::streamsize>(svg.size()));
  if (!file) throw IoError("failed writing svg file: " + path.string());
}

}  // namespace fictplay
