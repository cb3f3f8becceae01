#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace raman::cli {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
  double tick(int k) const {
    const double a = lo + (hi - lo) * k / 4.0;
    return log ? std::pow(10.0, a) : a;
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(const std::vector<Series>& series, bool use_x, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    const auto& v = use_x ? s.x : s.y;
    for (std::size_t i = 0; i < v.size() && i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], false) || !usable(s.y[i], false)) continue;
      if (!usable(v[i], log)) continue;
      const double a = log ? std::log10(v[i]) : v[i];
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-300) {
    const double pad = std::max(std::abs(lo) * 0.05, 1e-12);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  const Axis ax = make_axis(series, true, spec.log_x);
  const Axis ay = make_axis(series, false, spec.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.map(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", kLeft + pw / 2,
                     escape(spec.title));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);
  for (int k = 0; k <= 4; ++k) {
    const double tx = kLeft + pw * k / 4.0, ty = kTop + ph * (1.0 - k / 4.0);
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>\n", tx,
                       kTop + ph, kTop + ph + 5);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", tx, kTop + ph + 18,
                       ax.tick(k));
    out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", kLeft - 5, ty,
                       kLeft, ty);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 8, ty + 4,
                       ay.tick(k));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kHeight - 15,
                     escape(spec.x_label));
  out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                     kTop + ph / 2, escape(spec.y_label));

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    std::string points;
    const auto& sr = series[s];
    for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
      if (!usable(sr.x[i], spec.log_x) || !usable(sr.y[i], spec.log_y)) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(sr.x[i]), py(sr.y[i]));
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, points);
    const double ly = kTop + 14 + 18 * static_cast<double>(s);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       kWidth - kRight + 12, ly, kWidth - kRight + 36, color);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kWidth - kRight + 42, ly + 4, escape(sr.label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace raman::cli
