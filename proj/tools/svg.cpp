#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace floqstab::cli {

namespace {

constexpr int margin_left = 70, margin_right = 20, margin_top = 34, margin_bottom = 50;
constexpr int colorbar_width = 70;

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// maps data coordinates to panel pixels, linear or log10
struct Scale {
  double lo, hi;
  bool log;
  double p0, p1;
  double t(double v) const { return log ? std::log10(v) : v; }
  double operator()(double v) const { return p0 + (t(v) - t(lo)) / (t(hi) - t(lo)) * (p1 - p0); }
};

void fit_range(double& lo, double& hi, bool log, const std::vector<const std::vector<double>*>& data) {
  const bool fix_lo = std::isfinite(lo), fix_hi = std::isfinite(hi);
  double a = INFINITY, b = -INFINITY;
  for (const auto* d : data)
    for (double v : *d)
      if (std::isfinite(v) && (!log || v > 0)) {
        a = std::min(a, v);
        b = std::max(b, v);
      }
  if (!std::isfinite(a)) a = log ? 1.0 : 0.0, b = log ? 10.0 : 1.0;
  if (!fix_lo) lo = a;
  if (!fix_hi) hi = b;
  if (!(hi > lo)) {
    const double pad = log ? 2.0 : std::max(1e-12, std::abs(lo) * 0.05 + 0.5);
    lo = log ? lo / pad : lo - pad;
    hi = log ? hi * pad : hi + pad;
  }
}

std::vector<double> ticks(double lo, double hi, bool log) {
  std::vector<double> out;
  if (log) {
    const int a = static_cast<int>(std::floor(std::log10(lo))), b = static_cast<int>(std::ceil(std::log10(hi)));
    const std::array<double, 3> steps = b - a <= 2 ? std::array<double, 3>{1, 2, 5} : std::array<double, 3>{1, 1, 1};
    for (int e = a; e <= b; ++e)
      for (double m : steps) {
        const double v = m * std::pow(10.0, e);
        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9) &&
            (out.empty() || std::abs(out.back() - v) > 1e-12 * v))
          out.push_back(v);
      }
    return out;
  }
  const double raw = (hi - lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step)
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

struct Frame {
  Scale x, y;
  int w, h;
};

void draw_axes(std::ostringstream& s, const Frame& f, const Axes& a) {
  const double x0 = f.x.p0, x1 = f.x.p1, y0 = f.y.p0, y1 = f.y.p1;
  s << "<rect x='" << x0 << "' y='" << y1 << "' width='" << x1 - x0 << "' height='" << y0 - y1
    << "' fill='none' stroke='#000' stroke-width='1'/>\n";
  for (double v : ticks(f.x.lo, f.x.hi, f.x.log)) {
    const double px = f.x(v);
    s << "<line x1='" << fmt(px, 6) << "' y1='" << y0 << "' x2='" << fmt(px, 6) << "' y2='" << y0 + 5
      << "' stroke='#000'/><text x='" << fmt(px, 6) << "' y='" << y0 + 18
      << "' text-anchor='middle'>" << fmt(v) << "</text>\n";
  }
  for (double v : ticks(f.y.lo, f.y.hi, f.y.log)) {
    const double py = f.y(v);
    s << "<line x1='" << x0 - 5 << "' y1='" << fmt(py, 6) << "' x2='" << x0 << "' y2='" << fmt(py, 6)
      << "' stroke='#000'/><text x='" << x0 - 8 << "' y='" << fmt(py + 4, 6)
      << "' text-anchor='end'>" << fmt(v) << "</text>\n";
  }
  s << "<text x='" << (x0 + x1) / 2 << "' y='" << f.h - 10 << "' text-anchor='middle'>"
    << escape(a.xlabel) << "</text>\n";
  s << "<text transform='translate(16," << (y0 + y1) / 2 << ") rotate(-90)' text-anchor='middle'>"
    << escape(a.ylabel) << "</text>\n";
  s << "<text x='" << (x0 + x1) / 2 << "' y='20' text-anchor='middle' font-weight='bold'>"
    << escape(a.title) << "</text>\n";
}

void draw_series(std::ostringstream& s, const Frame& f, const Series& ser) {
  std::ostringstream path;
  bool pen = false;
  for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
    const bool ok = std::isfinite(ser.x[i]) && std::isfinite(ser.y[i]) &&
                    (!f.x.log || ser.x[i] > 0) && (!f.y.log || ser.y[i] > 0);
    if (!ok) {
      pen = false;
      continue;
    }
    path << (pen ? " L" : " M") << fmt(f.x(ser.x[i]), 6) << ',' << fmt(f.y(ser.y[i]), 6);
    pen = true;
    if (ser.markers)
      s << "<circle cx='" << fmt(f.x(ser.x[i]), 6) << "' cy='" << fmt(f.y(ser.y[i]), 6)
        << "' r='2.5' fill='" << ser.color << "'/>\n";
  }
  if (ser.line && !path.str().empty()) {
    s << "<path d='" << path.str() << "' fill='none' stroke='" << ser.color
      << "' stroke-width='1.5'";
    if (!ser.dash.empty()) s << " stroke-dasharray='" << ser.dash << "'";
    s << "/>\n";
  }
}

void draw_legend(std::ostringstream& s, const Frame& f, const std::vector<Series>& series) {
  int row = 0;
  for (const auto& ser : series) {
    if (ser.label.empty()) continue;
    const double y = f.y.p1 + 14 + 15 * row++, x = f.x.p1 - 150;
    s << "<line x1='" << x << "' y1='" << y - 4 << "' x2='" << x + 22 << "' y2='" << y - 4
      << "' stroke='" << ser.color << "' stroke-width='2'";
    if (!ser.dash.empty()) s << " stroke-dasharray='" << ser.dash << "'";
    s << "/><text x='" << x + 28 << "' y='" << y << "'>" << escape(ser.label) << "</text>\n";
  }
}

std::string clip_id(const std::string& seed) {
  std::size_t h = std::hash<std::string>{}(seed);
  char buf[24];
  std::snprintf(buf, sizeof buf, "c%08zx", h & 0xffffffffu);
  return buf;
}

}  // namespace

std::string viridis(double t) {
  static const std::array<std::array<int, 3>, 11> stops = {{{68, 1, 84},
                                                            {72, 36, 117},
                                                            {65, 68, 135},
                                                            {53, 95, 141},
                                                            {42, 120, 142},
                                                            {33, 145, 140},
                                                            {34, 168, 132},
                                                            {68, 191, 112},
                                                            {122, 209, 81},
                                                            {189, 223, 38},
                                                            {253, 231, 37}}};
  if (!std::isfinite(t)) return "#bbbbbb";
  t = std::clamp(t, 0.0, 1.0) * 10.0;
  const int i = std::min(9, static_cast<int>(t));
  const double u = t - i;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + u * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + u * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + u * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

Figure::Figure(int columns, int rows, int panel_width, int panel_height)
    : columns_(columns), rows_(rows), w_(panel_width), h_(panel_height) {
  if (columns < 1 || rows < 1) throw std::invalid_argument("figure needs at least one panel");
}

std::string Figure::origin() const {
  const int k = static_cast<int>(panels_.size());
  if (k >= columns_ * rows_) throw std::logic_error("figure is full");
  return "translate(" + std::to_string((k % columns_) * w_) + "," + std::to_string((k / columns_) * h_) + ")";
}

void Figure::add(const LinePlot& plot) {
  Axes a = plot.axes;
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : plot.series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  fit_range(a.xmin, a.xmax, a.xlog, xs);
  fit_range(a.ymin, a.ymax, a.ylog, ys);
  const Frame f{{a.xmin, a.xmax, a.xlog, double(margin_left), double(w_ - margin_right)},
                {a.ymin, a.ymax, a.ylog, double(h_ - margin_bottom), double(margin_top)},
                w_,
                h_};
  std::ostringstream s;
  const std::string id = clip_id(a.title + std::to_string(panels_.size()));
  s << "<g transform='" << origin() << "'>\n<clipPath id='" << id << "'><rect x='" << f.x.p0
    << "' y='" << f.y.p1 << "' width='" << f.x.p1 - f.x.p0 << "' height='" << f.y.p0 - f.y.p1
    << "'/></clipPath>\n<g clip-path='url(#" << id << ")'>\n";
  for (const auto& m : plot.markers) {
    if (!(m.x >= a.xmin && m.x <= a.xmax)) continue;
    const double px = f.x(m.x);
    s << "<line x1='" << fmt(px, 6) << "' y1='" << f.y.p0 << "' x2='" << fmt(px, 6) << "' y2='"
      << f.y.p1 << "' stroke='" << m.color << "' stroke-dasharray='" << m.dash << "'/>"
      << "<text x='" << fmt(px + 3, 6) << "' y='" << f.y.p1 + 12 << "' font-size='10' fill='"
      << m.color << "'>" << escape(m.label) << "</text>\n";
  }
  for (const auto& ser : plot.series) draw_series(s, f, ser);
  s << "</g>\n";
  draw_axes(s, f, a);
  draw_legend(s, f, plot.series);
  s << "</g>\n";
  panels_.push_back(s.str());
}

void Figure::add(const Heatmap& map) {
  const std::size_t nx = map.x.size(), ny = map.y.size();
  if (map.z.size() != nx * ny) throw std::invalid_argument("heatmap z does not match the axes");
  if (nx < 2 || ny < 2) throw std::invalid_argument("heatmap needs at least 2x2 cells");
  Axes a = map.axes;
  // cell edges halfway between samples in the (possibly log) axis coordinate
  auto edges = [](const std::vector<double>& c, bool log) {
    auto t = [&](double v) { return log ? std::log10(v) : v; };
    auto inv = [&](double v) { return log ? std::pow(10.0, v) : v; };
    std::vector<double> e(c.size() + 1);
    for (std::size_t i = 1; i < c.size(); ++i) e[i] = inv(0.5 * (t(c[i - 1]) + t(c[i])));
    e[0] = inv(t(c[0]) - (t(c[1]) - t(c[0])) / 2);
    e.back() = inv(t(c.back()) + (t(c.back()) - t(c[c.size() - 2])) / 2);
    return e;
  };
  const auto ex = edges(map.x, a.xlog), ey = edges(map.y, a.ylog);
  if (!std::isfinite(a.xmin)) a.xmin = ex.front();
  if (!std::isfinite(a.xmax)) a.xmax = ex.back();
  if (!std::isfinite(a.ymin)) a.ymin = ey.front();
  if (!std::isfinite(a.ymax)) a.ymax = ey.back();
  double zmin = map.zmin, zmax = map.zmax;
  fit_range(zmin, zmax, false, {&map.z});

  const Frame f{{a.xmin, a.xmax, a.xlog, double(margin_left), double(w_ - margin_right - colorbar_width)},
                {a.ymin, a.ymax, a.ylog, double(h_ - margin_bottom), double(margin_top)},
                w_,
                h_};
  std::ostringstream s;
  const std::string id = clip_id(a.title + std::to_string(panels_.size()));
  s << "<g transform='" << origin() << "'>\n<clipPath id='" << id << "'><rect x='" << f.x.p0
    << "' y='" << f.y.p1 << "' width='" << f.x.p1 - f.x.p0 << "' height='" << f.y.p0 - f.y.p1
    << "'/></clipPath>\n<g clip-path='url(#" << id << ")' shape-rendering='crispEdges'>\n";
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double px0 = f.x(ex[ix]), px1 = f.x(ex[ix + 1]);
      const double py0 = f.y(ey[iy + 1]), py1 = f.y(ey[iy]);
      const double z = map.z[iy * nx + ix];
      s << "<rect x='" << fmt(px0, 6) << "' y='" << fmt(py0, 6) << "' width='"
        << fmt(px1 - px0 + 0.5, 6) << "' height='" << fmt(py1 - py0 + 0.5, 6) << "' fill='"
        << viridis((z - zmin) / (zmax - zmin)) << "'/>\n";
    }
  for (const auto& ser : map.overlays) draw_series(s, f, ser);
  s << "</g>\n";
  draw_axes(s, f, a);

  // colorbar
  const double cx = f.x.p1 + 14, cw = 14;
  const int steps = 64;
  for (int k = 0; k < steps; ++k) {
    const double y = f.y.p0 - (k + 1) * (f.y.p0 - f.y.p1) / steps;
    s << "<rect x='" << cx << "' y='" << fmt(y, 6) << "' width='" << cw << "' height='"
      << fmt((f.y.p0 - f.y.p1) / steps + 0.5, 6) << "' fill='" << viridis((k + 0.5) / steps)
      << "'/>\n";
  }
  const Scale zs{zmin, zmax, false, f.y.p0, f.y.p1};
  for (double v : ticks(zmin, zmax, false))
    s << "<text x='" << cx + cw + 4 << "' y='" << fmt(zs(v) + 4, 6) << "' font-size='10'>"
      << fmt(v) << "</text>\n";
  s << "<text transform='translate(" << cx + cw + 48 << "," << (f.y.p0 + f.y.p1) / 2
    << ") rotate(-90)' text-anchor='middle'>" << escape(map.zlabel) << "</text>\n";
  s << "</g>\n";
  panels_.push_back(s.str());
}

std::string Figure::str() const {
  std::ostringstream s;
  s << "<?xml version='1.0' encoding='UTF-8'?>\n<svg xmlns='http://www.w3.org/2000/svg' width='"
    << columns_ * w_ << "' height='" << rows_ * h_
    << "' font-family='Helvetica, Arial, sans-serif' font-size='12'>\n<rect width='100%' "
       "height='100%' fill='#fff'/>\n";
  for (const auto& p : panels_) s << p;
  s << "</svg>\n";
  return s.str();
}

void Figure::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << str();
}

}  // namespace floqstab::cli
