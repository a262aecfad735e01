#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "floqstab/experiments.hpp"
#include "floqstab/parallel.hpp"

namespace floqstab {

namespace {

const std::vector<std::string> parameter_names = {"B0",    "omega_mod",  "detuning", "coupling",
                                                  "kappa", "relaxation", "dephasing"};

double* parameter_slot(PointParams& p, const std::string& name) {
  if (name == "B0") return &p.B0;
  if (name == "omega_mod") return &p.omega_mod;
  if (name == "detuning") return &p.detuning;
  if (name == "coupling") return &p.coupling;
  if (name == "kappa") return &p.kappa;
  if (name == "relaxation") return &p.relaxation;
  if (name == "dephasing") return &p.dephasing;
  return nullptr;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// checkpoint rows: "<iy> <ix> <x> <y> <F> <t_stab> <deps> <error...>"
std::map<int, std::vector<PointResult>> load_checkpoint(const std::string& path,
                                                        const std::string& fingerprint, int nx) {
  std::map<int, std::vector<PointResult>> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line) || line != "# " + fingerprint) {
    warn("checkpoint " + path + " belongs to a different grid; starting over");
    return {};
  }
  std::map<int, std::vector<PointResult>> partial;
  while (std::getline(in, line)) {
    std::istringstream s(line);
    int iy, ix;
    std::string x, y, f, ts, de;
    if (!(s >> iy >> ix >> x >> y >> f >> ts >> de)) continue;
    PointResult r;
    r.x = std::strtod(x.c_str(), nullptr);
    r.y = std::strtod(y.c_str(), nullptr);
    r.fidelity = std::strtod(f.c_str(), nullptr);
    r.stabilization_time = std::strtod(ts.c_str(), nullptr);
    r.delta_epsilon = std::strtod(de.c_str(), nullptr);
    std::getline(s >> std::ws, r.error);
    auto& row = partial[iy];
    row.resize(nx);
    if (ix >= 0 && ix < nx) row[ix] = r;
  }
  for (auto& [iy, row] : partial)
    if (std::all_of(row.begin(), row.end(), [](const PointResult& r) { return r.x == r.x; }))
      rows[iy] = std::move(row);
  return rows;
}

}  // namespace

SystemModel circular_model(const PointParams& p) {
  if (!(p.B0 > 0.0)) throw ParameterError("B0 must be positive");
  if (!(p.omega_mod > 0.0)) throw ParameterError("omega_mod must be positive");
  if (p.truncation < 1) throw ParameterError("cavity truncation must be >= 1");
  Cavity c{p.detuning, p.coupling, p.kappa, p.truncation};
  return SystemModel(DriveProtocol::circular(p.B0, p.omega_mod), {c},
                     {p.relaxation, p.dephasing});
}

void set_parameter(PointParams& p, const std::string& name, double value) {
  double* slot = parameter_slot(p, name);
  if (!slot) throw ParameterError("unknown model parameter '" + name + "'");
  *slot = value;
}

bool is_parameter(const std::string& name) {
  return std::find(parameter_names.begin(), parameter_names.end(), name) != parameter_names.end();
}

PointAnalysis analyze_point(const PointParams& p, const AnalysisConfig& cfg) {
  const SystemModel model = circular_model(p);
  PointAnalysis a;
  a.spectrum = qubit_spectrum(model, cfg.samples, cfg.integrator);
  a.superoperator = build_superoperator(model, cfg.integrator);
  a.steady = steady_state(a.superoperator, model, cfg.integrator, cfg.samples);
  a.fidelity = fidelity(a.steady, a.spectrum);
  return a;
}

PointResult evaluate_point(const PointParams& p, const AnalysisConfig& cfg) {
  PointResult r;
  try {
    const PointAnalysis a = analyze_point(p, cfg);
    r.fidelity = a.fidelity;
    r.stabilization_time = a.steady.stabilization_time;
    r.delta_epsilon = a.spectrum.delta_epsilon();
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

double circular_delta_epsilon(double B0, double omega_mod, const IntegratorConfig& cfg) {
  const SystemModel q(DriveProtocol::circular(B0, omega_mod));
  return qubit_spectrum(q, 16, cfg).delta_epsilon();
}

std::vector<double> ScanAxis::values() const {
  if (count < 2) throw ParameterError("axis '" + parameter + "' needs at least 2 points");
  if (log && !(min > 0.0 && max > 0.0))
    throw ParameterError("log axis '" + parameter + "' needs positive bounds");
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) / (count - 1);
    v[i] = log ? min * std::pow(max / min, u) : min + (max - min) * u;
  }
  return v;
}

void ScanGrid::check() const {
  for (const ScanAxis* a : {&x, &y}) {
    if (!is_parameter(a->parameter))
      throw ParameterError("axis addresses unknown parameter '" + a->parameter + "'");
    a->values();
  }
  if (x.parameter == y.parameter) throw ParameterError("both axes address the same parameter");
  analysis.integrator.check();
  if (analysis.samples < 2) throw ParameterError("samples must be >= 2");
}

PointParams ScanGrid::point(int ix, int iy) const {
  PointParams p = base;
  set_parameter(p, x.parameter, x.values().at(ix));
  set_parameter(p, y.parameter, y.values().at(iy));
  return p;
}

std::string ScanGrid::fingerprint() const {
  std::ostringstream s;
  auto axis = [&](const ScanAxis& a) {
    s << a.parameter << ':' << format_double(a.min) << ':' << format_double(a.max) << ':'
      << a.count << ':' << (a.log ? "log" : "lin") << ' ';
  };
  axis(x);
  axis(y);
  for (const auto& name : parameter_names) {
    PointParams b = base;
    s << name << '=' << format_double(*parameter_slot(b, name)) << ' ';
  }
  const auto& ic = analysis.integrator;
  s << "n_max=" << base.truncation << " spp=" << ic.steps_per_period
    << " phase=" << format_double(ic.max_phase_per_step) << " samples=" << analysis.samples;
  return s.str();
}

const PointResult& ScanTable::at(int ix, int iy) const {
  return points.at(static_cast<std::size_t>(iy) * grid.x.count + ix);
}

int ScanTable::failures() const {
  return static_cast<int>(
      std::count_if(points.begin(), points.end(), [](const PointResult& r) { return !r.ok(); }));
}

ScanTable scan_fidelity(const ScanGrid& grid, const ScanOptions& opts) {
  grid.check();
  const int nx = grid.x.count, ny = grid.y.count;
  const auto xs = grid.x.values(), ys = grid.y.values();
  ScanTable table{grid, std::vector<PointResult>(static_cast<std::size_t>(nx) * ny)};

  std::map<int, std::vector<PointResult>> done;
  const std::string fp = grid.fingerprint();
  if (!opts.checkpoint.empty()) done = load_checkpoint(opts.checkpoint, fp, nx);
  for (auto& [iy, row] : done)
    if (iy >= 0 && iy < ny) std::copy(row.begin(), row.end(), table.points.begin() + iy * nx);

  std::ofstream ckpt;
  if (!opts.checkpoint.empty()) {
    ckpt.open(opts.checkpoint, std::ios::trunc);
    if (!ckpt) throw Error("cannot write checkpoint " + opts.checkpoint);
    ckpt << "# " << fp << '\n';
    for (const auto& [iy, row] : done)
      for (int ix = 0; ix < nx; ++ix) {
        const auto& r = row[ix];
        ckpt << iy << ' ' << ix << ' ' << format_double(r.x) << ' ' << format_double(r.y) << ' '
             << format_double(r.fidelity) << ' ' << format_double(r.stabilization_time) << ' '
             << format_double(r.delta_epsilon) << ' ' << r.error << '\n';
      }
    ckpt.flush();
  }

  std::vector<int> todo;
  for (int iy = 0; iy < ny; ++iy)
    if (!done.count(iy))
      for (int ix = 0; ix < nx; ++ix) todo.push_back(iy * nx + ix);

  std::vector<int> remaining(ny, nx);
  std::mutex m;
  int finished = nx * ny - static_cast<int>(todo.size());
  parallel_for(static_cast<int>(todo.size()), opts.threads, [&](int k) {
    const int idx = todo[k], ix = idx % nx, iy = idx / nx;
    PointResult r = evaluate_point(grid.point(ix, iy), grid.analysis);
    r.x = xs[ix];
    r.y = ys[iy];
    if (!r.ok()) {
      r.error = "(" + grid.x.parameter + "=" + format_double(r.x) + ", " + grid.y.parameter +
                "=" + format_double(r.y) + "): " + r.error;
      if (!opts.keep_going) throw Error(r.error);
    }
    std::lock_guard lock(m);
    table.points[idx] = r;
    if (--remaining[iy] == 0 && ckpt.is_open()) {
      for (int jx = 0; jx < nx; ++jx) {
        const auto& q = table.points[iy * nx + jx];
        ckpt << iy << ' ' << jx << ' ' << format_double(q.x) << ' ' << format_double(q.y) << ' '
             << format_double(q.fidelity) << ' ' << format_double(q.stabilization_time) << ' '
             << format_double(q.delta_epsilon) << ' ' << q.error << '\n';
      }
      ckpt.flush();
    }
    ++finished;
    if (opts.progress) opts.progress(finished, nx * ny);
  });
  return table;
}

std::vector<ResonanceLine> resonance_lines(const std::vector<double>& omegas, double B0,
                                           int m_min, int m_max, int nph_max,
                                           const IntegratorConfig& cfg) {
  std::vector<double> deps;
  for (double w : omegas) deps.push_back(circular_delta_epsilon(B0, w, cfg));
  std::vector<ResonanceLine> lines;
  for (int nph = 1; nph <= nph_max; ++nph)
    for (int m = m_min; m <= m_max; ++m) {
      ResonanceLine line{m, nph, {}, {}};
      for (std::size_t i = 0; i < omegas.size(); ++i) {
        const double d = resonance_detuning(m, nph, omegas[i], deps[i]);
        if (d > 0.0) {
          line.omega.push_back(omegas[i]);
          line.detuning.push_back(d);
        }
      }
      if (!line.omega.empty()) lines.push_back(std::move(line));
    }
  return lines;
}

double TruncationCheck::max_change() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, std::abs(e.fidelity_larger - e.fidelity));
  return worst;
}

TruncationCheck truncation_convergence(const ScanTable& table, int count, int extra,
                                       const ScanOptions& opts) {
  std::vector<int> ok;
  for (std::size_t i = 0; i < table.points.size(); ++i)
    if (table.points[i].ok()) ok.push_back(static_cast<int>(i));
  std::mt19937 rng(20240611u);
  std::shuffle(ok.begin(), ok.end(), rng);
  ok.resize(std::min<std::size_t>(ok.size(), std::max(0, count)));
  std::sort(ok.begin(), ok.end());

  TruncationCheck check;
  check.extra = extra;
  check.entries.resize(ok.size());
  const int nx = table.grid.x.count;
  parallel_for(static_cast<int>(ok.size()), opts.threads, [&](int k) {
    const int ix = ok[k] % nx, iy = ok[k] / nx;
    PointParams p = table.grid.point(ix, iy);
    p.truncation += extra;
    const PointResult r = evaluate_point(p, table.grid.analysis);
    if (!r.ok()) throw Error("truncation check failed: " + r.error);
    check.entries[k] = {ix, iy, table.at(ix, iy).fidelity, r.fidelity};
  });
  return check;
}

std::vector<double> refined_grid(double min, double max, double step,
                                 const std::vector<double>& centers, double window,
                                 double fine_step) {
  if (!(max > min) || !(step > 0.0)) throw ParameterError("invalid line-cut range");
  std::set<long long> keys;
  // snap to a 1e-9 lattice so coincident points from both grids merge
  auto add = [&](double v) {
    if (v >= min - 1e-12 && v <= max + 1e-12) keys.insert(std::llround(v * 1e9));
  };
  const int n = static_cast<int>(std::floor((max - min) / step + 1e-9));
  for (int i = 0; i <= n; ++i) add(min + i * step);
  if (fine_step > 0.0)
    for (double c : centers) {
      const int k = static_cast<int>(std::floor(window / fine_step + 1e-9));
      for (int i = -k; i <= k; ++i) add(c + i * fine_step);
    }
  std::vector<double> out;
  for (long long k : keys) out.push_back(k * 1e-9);
  return out;
}

LinecutResult detuning_linecut(const PointParams& base, const std::vector<double>& detunings,
                               const AnalysisConfig& cfg, const ScanOptions& opts,
                               double min_prominence, int m_max, int nph_max) {
  if (detunings.size() < 3) throw ParameterError("line cut needs at least 3 detunings");
  if (!std::is_sorted(detunings.begin(), detunings.end()))
    throw ParameterError("line-cut detunings must be ascending");
  LinecutResult out;
  out.base = base;
  out.delta_epsilon = circular_delta_epsilon(base.B0, base.omega_mod, cfg.integrator);
  out.points.resize(detunings.size());
  parallel_for(static_cast<int>(detunings.size()), opts.threads, [&](int i) {
    PointParams p = base;
    p.detuning = detunings[i];
    PointResult r = evaluate_point(p, cfg);
    r.x = detunings[i];
    r.y = base.omega_mod;
    if (!r.ok()) {
      r.error = "(detuning=" + format_double(r.x) + "): " + r.error;
      if (!opts.keep_going) throw Error(r.error);
    }
    out.points[i] = r;
  });

  std::vector<double> x, f;
  for (const auto& r : out.points)
    if (r.ok()) {
      x.push_back(r.x);
      f.push_back(r.fidelity);
    }
  if (x.size() < 3) return out;
  for (const Peak& pk : find_peaks(x, f, min_prominence)) {
    ResonancePeak rp;
    rp.peak = pk;
    double best = INFINITY;
    for (int nph = 1; nph <= nph_max; ++nph)
      for (int m = -m_max; m <= m_max; ++m) {
        const double line = resonance_detuning(m, nph, base.omega_mod, out.delta_epsilon);
        if (std::abs(line - pk.x) < best) {
          best = std::abs(line - pk.x);
          rp.m = m;
          rp.n_ph = nph;
          rp.line = line;
        }
      }
    // Lorentzian over the samples that stay above the peak's half-prominence level
    const double half = pk.y - 0.5 * pk.prominence;
    int lo = pk.index, hi = pk.index;
    while (lo > 0 && f[lo - 1] >= half && f[lo - 1] <= pk.y) --lo;
    while (hi + 1 < static_cast<int>(f.size()) && f[hi + 1] >= half && f[hi + 1] <= pk.y) ++hi;
    lo = std::max(0, lo - 2);
    hi = std::min(static_cast<int>(f.size()) - 1, hi + 2);
    if (hi - lo + 1 >= 5) {
      try {
        rp.lorentzian = fit_lorentzian(std::span(x).subspan(lo, hi - lo + 1),
                                       std::span(f).subspan(lo, hi - lo + 1));
      } catch (const FitError&) {
      }
    }
    out.peaks.push_back(std::move(rp));
  }
  return out;
}

}  // namespace floqstab
