#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hgl/tensor.hpp"

namespace hgl {

struct CedCurve {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (threshold, fraction)
};

/// Parses a two-column `threshold,fraction` CSV; failures name the row.
inline std::vector<std::pair<double, double>> read_ced_csv(const std::string& path) {
  std::ifstream in(path);
  op_check(static_cast<bool>(in), "cannot open ced csv: " + path);
  std::string line;
  op_check(static_cast<bool>(std::getline(in, line)), "ced csv " + path + ": empty file");
  op_check(line == "threshold,fraction",
           "ced csv " + path + ", row 1: expected header threshold,fraction");
  std::vector<std::pair<double, double>> points;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    op_check(comma != std::string::npos,
             "ced csv " + path + ", row " + std::to_string(row) + ": missing comma");
    try {
      std::size_t used = 0;
      const double t = std::stod(line.substr(0, comma), &used);
      op_check(used == comma, "trailing characters");
      const std::string rest = line.substr(comma + 1);
      const double f = std::stod(rest, &used);
      op_check(used == rest.size(), "trailing characters");
      points.emplace_back(t, f);
    } catch (const std::exception&) {
      throw std::invalid_argument("ced csv " + path + ", row " + std::to_string(row) +
                                  ": malformed number in \"" + line + "\"");
    }
  }
  op_check(!points.empty(), "ced csv " + path + ": no data rows");
  return points;
}

namespace detail {

inline std::string fmt2(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

inline std::string fmt_tick(double v) {
  std::ostringstream out;
  out << std::setprecision(4) << v;
  return out.str();
}

}  // namespace detail

/// Renders cumulative-error curves as a fixed-layout SVG: one polyline per
/// curve over an x axis labelled NME and a y axis labelled fraction of
/// images, with a legend entry per curve. Pure function of its inputs, so
/// identical curves give identical bytes.
inline std::string ced_plot_svg(const std::vector<CedCurve>& curves) {
  op_check(!curves.empty(), "plot: no curves");
  double x_max = 0.0;
  for (const auto& c : curves) {
    op_check(!c.points.empty(), "plot: curve " + c.label + " has no points");
    for (auto [t, f] : c.points) {
      op_check(std::isfinite(t) && std::isfinite(f), "plot: non-finite point");
      x_max = std::max(x_max, t);
    }
  }
  if (x_max <= 0.0) x_max = 1.0;

  const double width = 640.0, height = 440.0;
  const double left = 70.0, right = 620.0, top = 20.0, bottom = 390.0;
  const auto sx = [&](double t) { return left + (right - left) * t / x_max; };
  const auto sy = [&](double f) { return bottom - (bottom - top) * f; };
  static const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#17becf"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" "
         "viewBox=\"0 0 640 440\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"440\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << detail::fmt2(left) << "\" y=\"" << detail::fmt2(top)
      << "\" width=\"" << detail::fmt2(right - left) << "\" height=\""
      << detail::fmt2(bottom - top) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double t = x_max * i / 5.0;
    const double x = sx(t);
    svg << "<line x1=\"" << detail::fmt2(x) << "\" y1=\"" << detail::fmt2(bottom)
        << "\" x2=\"" << detail::fmt2(x) << "\" y2=\"" << detail::fmt2(bottom + 5)
        << "\" stroke=\"#333333\"/>\n";
    svg << "<text x=\"" << detail::fmt2(x) << "\" y=\"" << detail::fmt2(bottom + 20)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << detail::fmt_tick(t) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double y = sy(f);
    svg << "<line x1=\"" << detail::fmt2(left - 5) << "\" y1=\"" << detail::fmt2(y)
        << "\" x2=\"" << detail::fmt2(left) << "\" y2=\"" << detail::fmt2(y)
        << "\" stroke=\"#333333\"/>\n";
    svg << "<text x=\"" << detail::fmt2(left - 9) << "\" y=\"" << detail::fmt2(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
        << detail::fmt_tick(f) << "</text>\n";
  }
  svg << "<text x=\"" << detail::fmt2((left + right) / 2.0) << "\" y=\""
      << detail::fmt2(height - 12)
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">NME"
         "</text>\n";
  svg << "<text x=\"18\" y=\"" << detail::fmt2((top + bottom) / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << detail::fmt2((top + bottom) / 2.0) << ")\">fraction of images</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 6]
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < curves[i].points.size(); ++j) {
      if (j) svg << ' ';
      svg << detail::fmt2(sx(curves[i].points[j].first)) << ','
          << detail::fmt2(sy(std::clamp(curves[i].points[j].second, 0.0, 1.0)));
    }
    svg << "\"/>\n";
  }

  const double legend_x = right - 180.0;
  double legend_y = bottom - 16.0 * static_cast<double>(curves.size()) - 10.0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    svg << "<line x1=\"" << detail::fmt2(legend_x) << "\" y1=\"" << detail::fmt2(legend_y)
        << "\" x2=\"" << detail::fmt2(legend_x + 24) << "\" y2=\""
        << detail::fmt2(legend_y) << "\" stroke=\"" << kPalette[i % 6]
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << detail::fmt2(legend_x + 30) << "\" y=\""
        << detail::fmt2(legend_y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << curves[i].label
        << "</text>\n";
    legend_y += 16.0;
  }
  svg << "</svg>\n";
  return svg.str();
}

/// Convenience wrapper: curve labels come from the file stems, falling back
/// to full paths when stems collide.
inline void plot_ced(const std::vector<std::string>& csv_paths, const std::string& out_svg) {
  op_check(!csv_paths.empty(), "plot: no input CSVs");
  std::vector<std::string> labels;
  for (const auto& p : csv_paths) labels.push_back(std::filesystem::path(p).stem().string());
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) labels = csv_paths;
  std::vector<CedCurve> curves;
  for (std::size_t i = 0; i < csv_paths.size(); ++i)
    curves.push_back({labels[i], read_ced_csv(csv_paths[i])});
  std::ofstream out(out_svg, std::ios::trunc);
  op_check(static_cast<bool>(out), "cannot open for writing: " + out_svg);
  out << ced_plot_svg(curves);
  op_check(static_cast<bool>(out), "short write: " + out_svg);
}

}  // namespace hgl
