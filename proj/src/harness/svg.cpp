#include "bintopo/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace bintopo::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label) {
  constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  const double pw = W - L - R, ph = H - T - B;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return T + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    o << "<text x=\"" << sx(fx) << "\" y=\"" << T + ph + 16 << "\" text-anchor=\"middle\">" << num(fx)
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">" << num(fy)
      << "</text>\n";
    o << "<line x1=\"" << L << "\" x2=\"" << L + pw << "\" y1=\"" << sy(fy) << "\" y2=\"" << sy(fy)
      << "\" stroke=\"#ddd\"/>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(x_label)
    << "</text>\n";
  o << "<text transform=\"translate(16," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    // Thin long traces to at most ~2000 vertices.
    const auto& pts = series[i].points;
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / 2000);
    for (std::size_t k = 0; k < pts.size(); k += stride) {
      o << num(sx(pts[k].first)) << ',' << num(sy(pts[k].second)) << ' ';
    }
    if (!pts.empty()) o << num(sx(pts.back().first)) << ',' << num(sy(pts.back().second));
    o << "\"/>\n";
    const double ly = T + 14 + 16.0 * static_cast<double>(i);
    o << "<line x1=\"" << L + pw + 10 << "\" x2=\"" << L + pw + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << L + pw + 36 << "\" y=\"" << ly + 4 << "\">" << escape(series[i].label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string design_image(const Design& d, int px) {
  const auto& s = d.shape();
  const int gap = px;
  const int width = s.nz * s.nx * px + (s.nz - 1) * gap;
  const int height = s.ny * px;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" shape-rendering=\"crispEdges\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int z = 0; z < s.nz; ++z) {
    const int ox = z * (s.nx * px + gap);
    o << "<rect x=\"" << ox << "\" width=\"" << s.nx * px << "\" height=\"" << height
      << "\" fill=\"#f4f4f4\"/>\n";
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        if (!d.at(x, y, z)) continue;
        // y grows upward in design coordinates.
        o << "<rect x=\"" << ox + x * px << "\" y=\"" << (s.ny - 1 - y) * px << "\" width=\"" << px
          << "\" height=\"" << px << "\" fill=\"#222\"/>\n";
      }
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string field_image(const fdtd::FieldSnapshot& s, int px) {
  double peak = 0.0;
  for (double v : s.values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) peak = 1.0;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << s.nx * px << "\" height=\"" << s.ny * px
    << "\" shape-rendering=\"crispEdges\">\n";
  char color[8];
  for (int y = 0; y < s.ny; ++y) {
    for (int x = 0; x < s.nx; ++x) {
      const double t = std::clamp(s.values[static_cast<std::size_t>(x + s.nx * y)] / peak, -1.0, 1.0);
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
      const int r = t >= 0 ? 255 : fade, b = t >= 0 ? fade : 255;
      std::snprintf(color, sizeof color, "#%02x%02x%02x", r, fade, b);
      o << "<rect x=\"" << x * px << "\" y=\"" << (s.ny - 1 - y) * px << "\" width=\"" << px
        << "\" height=\"" << px << "\" fill=\"" << color << "\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace bintopo::svg
