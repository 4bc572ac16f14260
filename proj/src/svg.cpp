#include "lrno/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "lrno/io.hpp"

namespace lrno::svg {

namespace {

constexpr double kPanelW = 440.0;
constexpr double kPanelH = 330.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string esc(const std::string& s) {
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
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string header(double w, double h) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

// Round-number ticks covering [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
  return out;
}

}  // namespace

std::string line_chart(const std::vector<Panel>& panels, const std::string& x_label, const std::string& y_label,
                       bool log_y) {
  const double width = kPanelW * std::max<std::size_t>(panels.size(), 1);
  std::ostringstream os;
  os << header(width, kPanelH);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double x0 = p * kPanelW + kLeft;
    const double x1 = (p + 1) * kPanelW - kRight;
    const double y0 = kPanelH - kBottom;
    const double y1 = kTop;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Series& s : panel.series) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        const double y = s.y[i];
        if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
        const double ty = log_y ? std::log10(y) : y;
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, ty);
        ymax = std::max(ymax, ty);
      }
    }
    if (!std::isfinite(xmin)) {
      xmin = 0.0;
      xmax = 1.0;
      ymin = 0.0;
      ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (log_y) {
      ymin = std::floor(ymin);
      ymax = std::ceil(ymax);
    }
    if (ymax == ymin) ymax = ymin + 1.0;
    auto px = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); };
    auto py = [&](double ty) { return y0 - (ty - ymin) / (ymax - ymin) * (y0 - y1); };

    os << "<g>\n<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kTop - 15)
       << "\" text-anchor=\"middle\" font-size=\"13\">" << esc(panel.title) << "</text>\n";
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
       << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : linear_ticks(xmin, xmax)) {
      os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px(t)) << "\" y2=\""
         << num(y0 + 4) << "\" stroke=\"black\"/>"
         << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">"
         << tick_label(t) << "</text>\n";
    }
    std::vector<double> yt;
    if (log_y) {
      for (double e = ymin; e <= ymax + 1e-9; e += 1.0) yt.push_back(e);
    } else {
      yt = linear_ticks(ymin, ymax);
    }
    for (double t : yt) {
      os << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(x1) << "\" y2=\""
         << num(py(t)) << "\" stroke=\"#dddddd\"/>"
         << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
         << (log_y ? "1e" + tick_label(t) : tick_label(t)) << "</text>\n";
    }
    for (std::size_t k = 0; k < panel.series.size(); ++k) {
      const Series& s = panel.series[k];
      os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kPalette[k % 5] << "\" points=\"";
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        const double y = s.y[i];
        if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
        os << num(px(s.x[i])) << ',' << num(py(log_y ? std::log10(y) : y)) << ' ';
      }
      os << "\"/>\n";
      os << "<text x=\"" << num(x1 - 6) << "\" y=\"" << num(y1 + 16 + 14 * k) << "\" text-anchor=\"end\" fill=\""
         << kPalette[k % 5] << "\">" << esc(s.label) << "</text>\n";
    }
    os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kPanelH - 12) << "\" text-anchor=\"middle\">"
       << esc(x_label) << "</text>\n";
    os << "<text transform=\"translate(" << num(x0 - 50) << ',' << num((y0 + y1) / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << esc(y_label) << "</text>\n</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string contour(const std::vector<bounds::ContourCell>& cells, const std::string& title,
                    const std::string& x_label, const std::string& y_label) {
  std::map<double, std::size_t> xs, ps;
  for (const auto& c : cells) {
    xs.emplace(c.xi, 0);
    ps.emplace(c.p, 0);
  }
  std::size_t k = 0;
  for (auto& [v, idx] : xs) idx = k++;
  k = 0;
  for (auto& [v, idx] : ps) idx = k++;
  double dmax = 0.0;
  for (const auto& c : cells) {
    if (c.delta) dmax = std::max(dmax, *c.delta);
  }
  if (dmax <= 0.0) dmax = 1.0;

  constexpr int kLevels = 10;
  auto color = [&](double d) {
    const int level = std::min(kLevels - 1, static_cast<int>(d / dmax * kLevels));
    const double t = (level + 0.5) / kLevels;
    const int r = static_cast<int>(255 * (0.15 + 0.85 * t));
    const int g = static_cast<int>(255 * (0.25 + 0.6 * (1 - std::abs(2 * t - 1))));
    const int b = static_cast<int>(255 * (1.0 - 0.85 * t));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };

  const double w = 620.0, h = 420.0;
  const double x0 = kLeft, x1 = w - 110.0, y0 = h - kBottom, y1 = kTop;
  const double cw = (x1 - x0) / std::max<std::size_t>(xs.size(), 1);
  const double ch = (y0 - y1) / std::max<std::size_t>(ps.size(), 1);
  std::ostringstream os;
  os << header(w, h);
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kTop - 15)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << esc(title) << "</text>\n<g shape-rendering=\"crispEdges\">\n";
  for (const auto& c : cells) {
    const double cx = x0 + xs[c.xi] * cw;
    const double cy = y0 - (ps[c.p] + 1) * ch;
    os << "<rect x=\"" << num(cx) << "\" y=\"" << num(cy) << "\" width=\"" << num(cw + 0.5) << "\" height=\""
       << num(ch + 0.5) << "\" fill=\"" << (c.delta ? color(*c.delta) : std::string("#cccccc")) << "\"/>\n";
  }
  os << "</g>\n<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
     << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
  const std::size_t xstride = std::max<std::size_t>(1, xs.size() / 6);
  for (const auto& [v, idx] : xs) {
    if (idx % xstride != 0) continue;
    const double cx = x0 + (idx + 0.5) * cw;
    os << "<text x=\"" << num(cx) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">" << tick_label(v)
       << "</text>\n";
  }
  const std::size_t pstride = std::max<std::size_t>(1, ps.size() / 6);
  for (const auto& [v, idx] : ps) {
    if (idx % pstride != 0) continue;
    const double cy = y0 - (idx + 0.5) * ch;
    os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(cy + 4) << "\" text-anchor=\"end\">" << tick_label(v)
       << "</text>\n";
  }
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(h - 12) << "\" text-anchor=\"middle\">"
     << esc(x_label) << "</text>\n";
  os << "<text transform=\"translate(" << num(x0 - 50) << ',' << num((y0 + y1) / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << esc(y_label) << "</text>\n";
  // Legend: one swatch per level, plus the infeasible swatch.
  const double lx = x1 + 20.0;
  for (int l = 0; l < kLevels; ++l) {
    const double lo = dmax * l / kLevels;
    const double ly = y1 + 18.0 * l;
    os << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"14\" height=\"14\" fill=\""
       << color(lo + 0.5 * dmax / kLevels) << "\"/><text x=\"" << num(lx + 18) << "\" y=\"" << num(ly + 11) << "\">"
       << format_double(std::round(lo * 1000) / 1000) << "</text>\n";
  }
  const double ly = y1 + 18.0 * kLevels + 8.0;
  os << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"14\" height=\"14\" fill=\"#cccccc\"/>"
     << "<text x=\"" << num(lx + 18) << "\" y=\"" << num(ly + 11) << "\">infeasible</text>\n";
  os << "<text x=\"" << num(lx) << "\" y=\"" << num(y1 - 8) << "\">max delta</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace lrno::svg
