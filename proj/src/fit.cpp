#include "floqstab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace floqstab {

namespace {

struct Residuals {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  FitModel model;
  std::span<const double> t, y;
  int n_params;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(t.size()); }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < t.size(); ++i) r(i) = evaluate(model, p, t[i]) - y[i];
    return 0;
  }
};

std::vector<std::string> param_names(FitModel m) {
  switch (m) {
    case FitModel::Exponential: return {"A", "T", "C"};
    case FitModel::DampedSinusoid: return {"A", "T", "omega", "phase", "C"};
    case FitModel::Lorentzian: return {"A", "x0", "width", "C"};
  }
  return {};
}

void check_samples(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw FitError("t and y have different lengths");
  if (t.size() < 5) throw FitError("need at least 5 samples to fit");
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) throw FitError("non-finite sample");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo <= 1e-12 * (1.0 + std::abs(*hi)))
    throw FitError("constant series: decay parameters are unidentifiable");
}

FitResult solve(FitModel model, std::span<const double> t, std::span<const double> y,
                Eigen::VectorXd p) {
  Residuals f{model, t, y, static_cast<int>(p.size())};
  Eigen::NumericalDiff<Residuals> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>> lm(nd);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;
  const auto status = lm.minimize(p);
  using namespace Eigen::LevenbergMarquardtSpace;
  if (status != RelativeReductionTooSmall && status != RelativeErrorTooSmall &&
      status != RelativeErrorAndReductionTooSmall && status != CosinusTooSmall)
    throw FitError("least squares did not converge (status " + std::to_string(status) + ")");
  if (!p.allFinite()) throw FitError("fit produced non-finite parameters");

  FitResult r;
  r.model = model;
  r.names = param_names(model);
  r.params = p;
  r.evaluations = static_cast<int>(lm.nfev);
  Eigen::VectorXd res(t.size());
  f(p, res);
  r.residual_norm = res.norm();

  Eigen::MatrixXd jac(t.size(), p.size());
  nd.df(p, jac);
  const int dof = static_cast<int>(t.size()) - static_cast<int>(p.size());
  r.sigma = Eigen::VectorXd::Constant(p.size(), std::numeric_limits<double>::quiet_NaN());
  if (dof > 0) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
      const double s2 = res.squaredNorm() / dof;
      r.sigma = (s2 * lu.inverse()).diagonal().cwiseAbs().cwiseSqrt();
    }
  }
  return r;
}

double tail_mean(std::span<const double> y) {
  const std::size_t n = std::max<std::size_t>(1, y.size() / 10);
  return std::accumulate(y.end() - n, y.end(), 0.0) / n;
}

}  // namespace

std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::Exponential: return "exponential";
    case FitModel::DampedSinusoid: return "damped_sinusoid";
    case FitModel::Lorentzian: return "lorentzian";
  }
  return "?";
}

FitModel fit_model_from_string(const std::string& name) {
  if (name == "exponential") return FitModel::Exponential;
  if (name == "damped_sinusoid") return FitModel::DampedSinusoid;
  if (name == "lorentzian") return FitModel::Lorentzian;
  throw FitError("unknown fit model '" + name + "'");
}

double FitResult::get(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params(i);
  throw FitError("fit has no parameter '" + name + "'");
}

double FitResult::error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return sigma(i);
  throw FitError("fit has no parameter '" + name + "'");
}

double FitResult::operator()(double t) const { return evaluate(model, params, t); }

double evaluate(FitModel model, const Eigen::VectorXd& p, double t) {
  switch (model) {
    case FitModel::Exponential:
      return p(0) * std::exp(-t / p(1)) + p(2);
    case FitModel::DampedSinusoid:
      return p(0) * std::exp(-t / p(1)) * std::sin(p(2) * t + p(3)) + p(4);
    case FitModel::Lorentzian: {
      const double u = (t - p(1)) / p(2);
      return p(0) / (1.0 + u * u) + p(3);
    }
  }
  return 0.0;
}

FitResult fit_exponential(std::span<const double> t, std::span<const double> y, FitModel model) {
  if (model == FitModel::Lorentzian) return fit_lorentzian(t, y);
  check_samples(t, y);
  const double y_inf = tail_mean(y);
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw FitError("sample times must increase");

  // log-linear regression on points well above the tail level
  double zmax = 0.0;
  for (double v : y) zmax = std::max(zmax, std::abs(v - y_inf));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double z = std::abs(y[i] - y_inf);
    if (z <= 0.05 * zmax) continue;
    const double lz = std::log(z);
    sx += t[i];
    sy += lz;
    sxx += t[i] * t[i];
    sxy += t[i] * lz;
    ++n;
  }
  double T0 = span / 3.0, A0 = y.front() - y_inf;
  if (n >= 2) {
    const double den = n * sxx - sx * sx;
    const double slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    if (slope < 0.0) {
      T0 = -1.0 / slope;
      const double icpt = (sy - slope * sx) / n;
      A0 = std::copysign(std::exp(icpt), y.front() - y_inf);
    }
  }

  Eigen::VectorXd p;
  if (model == FitModel::Exponential) {
    p.resize(3);
    p << A0, T0, y_inf;
  } else {
    int crossings = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
      if ((y[i] - y_inf) * (y[i - 1] - y_inf) < 0.0) ++crossings;
    const double w0 = std::max(1, crossings) * std::numbers::pi / span;
    const double amp = std::max(zmax, 1e-12);
    const double ph0 = std::asin(std::clamp((y.front() - y_inf) / amp, -1.0, 1.0));
    p.resize(5);
    p << amp, std::max(T0, span / 2.0), w0, ph0, y_inf;
  }
  FitResult r = solve(model, t, y, p);
  if (!(r.get("T") > 0.0)) throw FitError("fitted time constant is not positive");
  return r;
}

FitResult fit_lorentzian(std::span<const double> x, std::span<const double> y) {
  check_samples(x, y);
  const auto imax = std::max_element(y.begin(), y.end()) - y.begin();
  const double base = *std::min_element(y.begin(), y.end());
  const double amp = y[imax] - base;
  // half width at half maximum from the nearest crossing on either side
  double hw = (x.back() - x.front()) / 10.0;
  for (std::size_t i = imax; i < y.size(); ++i)
    if (y[i] - base < 0.5 * amp) {
      hw = std::max(x[i] - x[imax], 1e-12);
      break;
    }
  Eigen::VectorXd p(4);
  p << amp, x[imax], hw, base;
  FitResult r = solve(FitModel::Lorentzian, x, y, p);
  r.params(2) = std::abs(r.params(2));
  return r;
}

std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y,
                             double min_prominence) {
  if (x.size() != y.size()) throw ParameterError("x and y have different lengths");
  std::vector<Peak> out;
  const int n = static_cast<int>(y.size());
  for (int i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    int j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;  // plateau
    if (j + 1 >= n || !(y[j + 1] < y[i])) {
      i = j;
      continue;
    }
    // lowest point on each side before reaching higher ground
    double left = y[i];
    for (int k = i - 1; k >= 0 && y[k] <= y[i]; --k) left = std::min(left, y[k]);
    double right = y[i];
    for (int k = j + 1; k < n && y[k] <= y[i]; ++k) right = std::min(right, y[k]);
    const double prom = y[i] - std::max(left, right);
    if (prom >= min_prominence) out.push_back({(i + j) / 2, x[(i + j) / 2], y[i], prom});
    i = j;
  }
  return out;
}

}  // namespace floqstab
