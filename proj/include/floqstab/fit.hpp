#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "floqstab/errors.hpp"

namespace floqstab {

enum class FitModel {
  Exponential,     // A exp(-t/T) + C               params A, T, C
  DampedSinusoid,  // A exp(-t/T) sin(w t + p) + C   params A, T, omega, phase, C
  Lorentzian,      // A / (1 + ((x - x0)/w)^2) + C   params A, x0, width, C
};

std::string to_string(FitModel model);
FitModel fit_model_from_string(const std::string& name);

struct FitResult {
  FitModel model = FitModel::Exponential;
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;  // 1-sigma from the residual-scaled Gauss-Newton covariance
  double residual_norm = 0.0;
  int evaluations = 0;

  double get(const std::string& name) const;
  double error(const std::string& name) const;
  double operator()(double t) const;
};

double evaluate(FitModel model, const Eigen::VectorXd& params, double t);

// Levenberg-Marquardt least squares. Exponential starts from a log-linear regression of
// |y - y_inf| with y_inf the mean of the last 10% of samples.
FitResult fit_exponential(std::span<const double> t, std::span<const double> y,
                          FitModel model = FitModel::Exponential);
FitResult fit_lorentzian(std::span<const double> x, std::span<const double> y);

struct Peak {
  int index;
  double x, y;
  double prominence;
};

// strict local maxima (plateaus count once) with their topographic prominence
std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y,
                             double min_prominence = 0.0);

}  // namespace floqstab
