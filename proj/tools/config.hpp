#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "floqstab/experiments.hpp"

namespace floqstab::cli {

inline constexpr int schema_version = 1;

// schema violation; message carries "<file>:<line>: " when the location is known
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ratio: dimensionless frequencies as written.
// mhz: frequencies in MHz (multiplied by 2 pi -> rad/us), times in us,
//      dephasing given as a rate in 1/us (not multiplied by 2 pi).
enum class Units { Ratio, MHz };

struct QuasienergyOptions {
  int samples = 128;
  int m_min = 0, m_max = 3;
  int photon = 0;  // n in <phi_+^(m), n|V|phi_-, n+1>
  int resonance_m_min = -3, resonance_m_max = 3, resonance_nph_max = 2;
};

struct OverlayOptions {
  int m_min = -1, m_max = 3, nph_max = 2;
};

struct LinecutOptions {
  double min = 0.1, max = 3.6, step = 0.01;
  double window = 0.0, fine_step = 0.0;  // dense sampling around the resonance lines
  double min_prominence = 0.02;
  int m_max = 4, nph_max = 2;
};

struct FitOptions {
  std::string input;
  std::string t_column = "t", y_column = "y";
  FitModel model = FitModel::Exponential;
};

struct RunConfig {
  std::string path;
  std::string experiment;
  Units units = Units::Ratio;
  double frequency_scale = 1.0;  // factor applied to config frequencies

  PointParams point;  // circular-drive model (quasienergy, steady-state, scan, linecut)
  AnalysisConfig analysis;

  QuasienergyOptions quasienergy;
  ScanGrid grid;
  OverlayOptions overlay;
  int truncation_points = 5, truncation_extra = 2;
  LinecutOptions linecut;

  AdiabaticParams adiabatic;
  std::vector<double> deltas;  // Delta - B0 values, internal units

  EllipticalParams elliptical;
  double tolerance = 0.05;

  BoostParams boost;
  bool compare = true;  // run with and without the stabilizer

  FitOptions fit;
};

RunConfig parse_config(const std::string& text, const std::string& name = "<config>");
RunConfig load_config(const std::string& path);

std::vector<std::string> experiment_kinds();

}  // namespace floqstab::cli
