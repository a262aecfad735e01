#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace floqstab::cli {

struct Axes {
  std::string title, xlabel, ylabel;
  bool xlog = false, ylog = false;
  // NaN = fit the data
  double xmin = NAN, xmax = NAN, ymin = NAN, ymax = NAN;
};

struct Series {
  std::vector<double> x, y;
  std::string label;
  std::string color = "#1f77b4";
  std::string dash;  // SVG stroke-dasharray, empty = solid
  bool markers = false;
  bool line = true;
};

struct VerticalLine {
  double x;
  std::string label;
  std::string color = "#888888";
  std::string dash = "4 3";
};

struct LinePlot {
  Axes axes;
  std::vector<Series> series;
  std::vector<VerticalLine> markers;
};

// z is row-major over (y, x): z[iy * x.size() + ix]
struct Heatmap {
  Axes axes;
  std::vector<double> x, y, z;
  std::string zlabel;
  double zmin = NAN, zmax = NAN;
  std::vector<Series> overlays;
};

// viridis, t in [0, 1]
std::string viridis(double t);

// Panels laid out on a grid, row-major. No timestamps or other run-dependent metadata.
class Figure {
 public:
  Figure(int columns, int rows, int panel_width = 520, int panel_height = 400);
  void add(const LinePlot& plot);
  void add(const Heatmap& map);
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::string origin() const;
  int columns_, rows_, w_, h_;
  std::vector<std::string> panels_;
};

}  // namespace floqstab::cli
