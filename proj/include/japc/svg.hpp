#pragma once

// Minimal vector rendering of a reconstructed record: a framed polyline with
// range labels. Output is plain SVG text, deterministic for identical input.

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <string>

#include "japc/analysis.hpp"

namespace japc {

namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 8);
  if (res.ec != std::errc()) return "0";
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string render_waveform_svg(const Waveform& wf, int width_px = 960,
                                       int height_px = 360) {
  if (wf.points.empty()) throw std::invalid_argument("render_waveform_svg: empty waveform");
  if (width_px < 100 || height_px < 60) {
    throw std::invalid_argument("render_waveform_svg: canvas too small");
  }

  double t_min = wf.points.front().time_s;
  double t_max = wf.points.front().time_s;
  double v_min = wf.points.front().value;
  double v_max = wf.points.front().value;
  for (const auto& pt : wf.points) {
    t_min = std::min(t_min, pt.time_s);
    t_max = std::max(t_max, pt.time_s);
    v_min = std::min(v_min, pt.value);
    v_max = std::max(v_max, pt.value);
  }
  if (t_max == t_min) t_max = t_min + 1.0;
  if (v_max == v_min) {
    v_max += 0.5;
    v_min -= 0.5;
  }
  // Value padding keeps the trace off the frame.
  const double pad = 0.05 * (v_max - v_min);
  v_max += pad;
  v_min -= pad;

  const double left = 60.0;
  const double right = static_cast<double>(width_px) - 15.0;
  const double top = 15.0;
  const double bottom = static_cast<double>(height_px) - 30.0;

  const auto x_of = [&](double t) {
    return left + (t - t_min) / (t_max - t_min) * (right - left);
  };
  const auto y_of = [&](double v) {
    return bottom - (v - v_min) / (v_max - v_min) * (bottom - top);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_px) +
         "\" height=\"" + std::to_string(height_px) + "\" viewBox=\"0 0 " +
         std::to_string(width_px) + " " + std::to_string(height_px) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width_px) + "\" height=\"" +
         std::to_string(height_px) + "\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + detail::svg_num(left) + "\" y=\"" + detail::svg_num(top) +
         "\" width=\"" + detail::svg_num(right - left) + "\" height=\"" +
         detail::svg_num(bottom - top) + "\" fill=\"none\" stroke=\"#888\"/>\n";

  // Zero line when the range straddles it.
  if (v_min < 0.0 && v_max > 0.0) {
    const double y0 = y_of(0.0);
    svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(y0) +
           "\" x2=\"" + detail::svg_num(right) + "\" y2=\"" + detail::svg_num(y0) +
           "\" stroke=\"#ccc\"/>\n";
  }

  svg += "<polyline fill=\"none\" stroke=\"#1060c0\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < wf.points.size(); ++i) {
    if (i) svg += " ";
    svg += detail::svg_num(x_of(wf.points[i].time_s)) + "," +
           detail::svg_num(y_of(wf.points[i].value));
  }
  svg += "\"/>\n";

  const std::string units = wf.volts ? "V" : "p";
  svg += "<text x=\"5\" y=\"" + detail::svg_num(top + 10) + "\" font-size=\"11\">" +
         detail::svg_num(v_max) + " " + units + "</text>\n";
  svg += "<text x=\"5\" y=\"" + detail::svg_num(bottom) + "\" font-size=\"11\">" +
         detail::svg_num(v_min) + " " + units + "</text>\n";
  svg += "<text x=\"" + detail::svg_num(left) + "\" y=\"" +
         detail::svg_num(bottom + 20) + "\" font-size=\"11\">" + detail::svg_num(t_min) +
         " s</text>\n";
  svg += "<text x=\"" + detail::svg_num(right - 80) + "\" y=\"" +
         detail::svg_num(bottom + 20) + "\" font-size=\"11\">" + detail::svg_num(t_max) +
         " s</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace japc
