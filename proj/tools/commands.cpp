#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "manifest.hpp"
#include "output.hpp"
#include "svg.hpp"

namespace floqstab::cli {

namespace fs = std::filesystem;

namespace {

// a scan or line cut finished with some failed points under --keep-going
struct PartialFailure {
  int failures;
};

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Context {
  RunConfig& config;
  const CommandOptions& options;
  RunManifest& manifest;
  Stopwatch clock;

  fs::path file(const std::string& name) {
    manifest.add_output(name);
    return options.out / name;
  }
  void stage(const std::string& name) { manifest.stage(name, clock.lap()); }
  // internal frequency -> config units
  double freq(double v) const { return v / config.frequency_scale; }
  std::string units() const { return config.units == Units::MHz ? "mhz" : "ratio"; }
  ScanOptions scan_options() const {
    ScanOptions s;
    s.threads = options.threads;
    s.keep_going = options.keep_going;
    if (!options.quiet)
      s.progress = [](int done, int total) {
        if (done == total || done % std::max(1, total / 20) == 0)
          std::cerr << "\r" << done << "/" << total << (done == total ? "\n" : "") << std::flush;
      };
    return s;
  }
};

Json params_json(const Context& c, const PointParams& p) {
  return {{"B0", c.freq(p.B0)},
          {"omega_mod", c.freq(p.omega_mod)},
          {"detuning", c.freq(p.detuning)},
          {"coupling", c.freq(p.coupling)},
          {"kappa", c.freq(p.kappa)},
          {"relaxation", c.freq(p.relaxation)},
          {"dephasing", p.dephasing},
          {"truncation", p.truncation}};
}

Json fit_json(const FitResult& f) {
  Json j;
  j["model"] = to_string(f.model);
  for (std::size_t i = 0; i < f.names.size(); ++i)
    j["parameters"][f.names[i]] = {{"value", number_or_null(f.params(i))},
                                   {"sigma", number_or_null(f.sigma(i))}};
  j["residual_norm"] = f.residual_norm;
  j["evaluations"] = f.evaluations;
  return j;
}

// ------------------------------------------------------------------ quasienergy

void cmd_quasienergy(Context& c) {
  const auto& q = c.config.quasienergy;
  const auto& ic = c.config.analysis.integrator;
  const SystemModel model = circular_model(c.config.point);
  const QuasienergySpectrum spec = qubit_spectrum(model, q.samples, ic);
  c.stage("spectrum");

  {
    CsvWriter w(c.file("quasienergies.csv"), {"label", "epsilon", "mean_energy"});
    for (int lvl : {spec.minus, spec.plus})
      w << (lvl == spec.minus ? "minus" : "plus") << c.freq(spec.quasienergies[lvl])
        << c.freq(spec.mean_energies[lvl]), w.end_row();
  }
  {
    CsvWriter w(c.file("periodic_states.csv"), {"t", "label", "component", "re", "im"});
    for (int lvl : {spec.minus, spec.plus})
      for (int k = 0; k < spec.samples(); ++k)
        for (int a = 0; a < 2; ++a) {
          const Complex z = spec.states[lvl][k](a);
          w << spec.times[k] << (lvl == spec.minus ? "minus" : "plus") << (a == 0 ? "g" : "e")
            << z.real() << z.imag(), w.end_row();
        }
  }
  Json elements = Json::array();
  {
    CsvWriter w(c.file("matrix_elements.csv"), {"m", "n", "re", "im", "abs"});
    for (int m = q.m_min; m <= q.m_max; ++m) {
      const Complex h = coupling_matrix_element(model, spec, m, q.photon);
      w << m << q.photon << c.freq(h.real()) << c.freq(h.imag()) << c.freq(std::abs(h)), w.end_row();
      elements.push_back({{"m", m}, {"abs", c.freq(std::abs(h))}});
    }
  }
  const auto res = resonance_map(model.cavities()[0].detuning, spec.omega_mod, spec.delta_epsilon(),
                                 q.resonance_m_min, q.resonance_m_max, 1, q.resonance_nph_max);
  {
    CsvWriter w(c.file("resonances.csv"), {"m", "n_ph", "offset", "line_detuning"});
    for (const auto& r : res)
      w << r.m << r.n_ph << c.freq(r.offset)
        << c.freq(resonance_detuning(r.m, r.n_ph, spec.omega_mod, spec.delta_epsilon())),
          w.end_row();
  }
  c.stage("tables");

  Json j;
  j["experiment"] = "quasienergy";
  j["units"] = c.units();
  j["model"] = params_json(c, c.config.point);
  j["epsilon_minus"] = c.freq(spec.eps_minus());
  j["epsilon_plus"] = c.freq(spec.eps_plus());
  j["delta_epsilon"] = c.freq(spec.delta_epsilon());
  j["gauge"] = spec.gauge;
  j["periodicity_defect"] = spec.periodicity_defect;
  j["matrix_elements"] = elements;
  j["nearest_resonance"] = {{"m", res.front().m},
                            {"n_ph", res.front().n_ph},
                            {"offset", c.freq(res.front().offset)}};
  write_json(c.file("quasienergy.json"), j);
}

// ------------------------------------------------------------------ steady state

void cmd_steady_state(Context& c) {
  const PointAnalysis a = analyze_point(c.config.point, c.config.analysis);
  c.stage("analysis");
  const SystemModel model = circular_model(c.config.point);
  const auto& st = a.steady;
  {
    CsvWriter w(c.file("steady_state.csv"),
                {"t", "p_phi_minus", "sigma_z", "photons", "purity", "min_eigenvalue"});
    const auto sz = embed(qubit_ops<>().sz, 0, model.layout());
    const auto n = embed(boson_ops<>(c.config.point.truncation).n, 1, model.layout());
    for (int k = 0; k < st.samples(); ++k) {
      const DensityMatrix& rho = st.states[k];
      const VectorC phi = a.spectrum.phi_minus(k);
      w << st.times[k] << (phi.adjoint() * rho.reduced(0) * phi)(0).real() << rho.expectation(sz).real()
        << rho.expectation(n).real() << rho.purity() << rho.min_eigenvalue(), w.end_row();
    }
  }
  {
    CsvWriter w(c.file("eigenvalues.csv"), {"k", "re", "im", "abs"});
    for (std::size_t k = 0; k < st.eigenvalues.size(); ++k)
      w << static_cast<int>(k) << st.eigenvalues[k].real() << st.eigenvalues[k].imag()
        << std::abs(st.eigenvalues[k]), w.end_row();
  }
  Json j;
  j["experiment"] = "steady-state";
  j["units"] = c.units();
  j["model"] = params_json(c, c.config.point);
  j["fidelity"] = a.fidelity;
  j["stabilization_time"] = number_or_null(st.stabilization_time);
  j["stabilization_rate"] = c.freq(st.stabilization_rate);
  j["delta_epsilon"] = c.freq(a.spectrum.delta_epsilon());
  j["steady_eigenvalue_defect"] = st.steady_eigenvalue_defect;
  j["hermiticity_defect"] = st.hermiticity_defect;
  j["periodicity_defect"] = st.periodicity_defect;
  j["trace_preservation_defect"] = a.superoperator.trace_preservation_defect();
  j["unit_modulus_count"] = st.unit_modulus_count;
  j["degenerate"] = st.degenerate;
  j["vectorization"] = a.superoperator.vectorization;
  const auto res = resonance_map(c.config.point.detuning, c.config.point.omega_mod,
                                 a.spectrum.delta_epsilon(), -3, 3, 1, 2);
  j["nearest_resonance"] = {{"m", res.front().m},
                            {"n_ph", res.front().n_ph},
                            {"offset", c.freq(res.front().offset)}};
  write_json(c.file("steady_state.json"), j);

  std::vector<double> pm;
  for (int k = 0; k < st.samples(); ++k) {
    const VectorC v = a.spectrum.phi_minus(k);
    pm.push_back((v.adjoint() * st.states[k].reduced(0) * v)(0).real());
  }
  Figure fig(1, 1);
  fig.add(LinePlot{{"steady state over one period", "t", "<phi_-(t)|rho_q(t)|phi_-(t)>",
                    false, false, NAN, NAN, 0.0, 1.0},
                   {{st.times, pm, "P(phi_-)", palette[0]}},
                   {}});
  fig.save(c.file("steady_state.svg"));
  c.stage("output");
}

// ------------------------------------------------------------------ scan

void cmd_scan(Context& c) {
  const ScanGrid& g = c.config.grid;
  ScanOptions so = c.scan_options();
  so.checkpoint = (c.options.out / "scan.checkpoint").string();
  const ScanTable table = scan_fidelity(g, so);
  c.stage("scan");

  const double fx = g.x.parameter == "dephasing" ? 1.0 : c.config.frequency_scale;
  const double fy = g.y.parameter == "dephasing" ? 1.0 : c.config.frequency_scale;
  const auto xs = g.x.values(), ys = g.y.values();
  {
    CsvWriter w(c.file("scan.csv"), {"ix", "iy", g.x.parameter, g.y.parameter, "fidelity",
                                     "stabilization_time", "delta_epsilon", "error"});
    for (int iy = 0; iy < g.y.count; ++iy)
      for (int ix = 0; ix < g.x.count; ++ix) {
        const auto& r = table.at(ix, iy);
        w << ix << iy << xs[ix] / fx << ys[iy] / fy << r.fidelity << r.stabilization_time
          << c.freq(r.delta_epsilon) << r.error, w.end_row();
      }
  }

  // resonance overlays need the (omega_mod, detuning) plane
  const bool plane = g.x.parameter == "omega_mod" && g.y.parameter == "detuning";
  std::vector<ResonanceLine> lines;
  if (plane) {
    std::vector<double> omegas;
    const int dense = 200;
    for (int i = 0; i < dense; ++i) {
      const double u = static_cast<double>(i) / (dense - 1);
      omegas.push_back(g.x.log ? g.x.min * std::pow(g.x.max / g.x.min, u)
                               : g.x.min + u * (g.x.max - g.x.min));
    }
    lines = resonance_lines(omegas, g.base.B0, c.config.overlay.m_min, c.config.overlay.m_max,
                            c.config.overlay.nph_max, g.analysis.integrator);
    CsvWriter w(c.file("resonance_lines.csv"), {"m", "n_ph", "omega_mod", "detuning"});
    for (const auto& l : lines)
      for (std::size_t i = 0; i < l.omega.size(); ++i)
        w << l.m << l.n_ph << c.freq(l.omega[i]) << c.freq(l.detuning[i]), w.end_row();
  }
  c.stage("overlays");

  TruncationCheck tc;
  if (c.config.truncation_points > 0)
    tc = truncation_convergence(table, c.config.truncation_points, c.config.truncation_extra, so);
  c.stage("truncation_check");

  Json j;
  j["experiment"] = "scan";
  j["units"] = c.units();
  j["model"] = params_json(c, g.base);
  j["axes"] = {{"x", {{"parameter", g.x.parameter}, {"min", g.x.min / fx}, {"max", g.x.max / fx},
                      {"count", g.x.count}, {"log", g.x.log}}},
               {"y", {{"parameter", g.y.parameter}, {"min", g.y.min / fy}, {"max", g.y.max / fy},
                      {"count", g.y.count}, {"log", g.y.log}}}};
  j["points"] = table.points.size();
  j["failures"] = table.failures();
  Json fails = Json::array();
  for (const auto& r : table.points)
    if (!r.ok()) fails.push_back(r.error);
  j["failure_messages"] = fails;
  Json checks = Json::array();
  for (const auto& e : tc.entries)
    checks.push_back({{"ix", e.ix}, {"iy", e.iy}, {"fidelity", e.fidelity},
                      {"fidelity_larger", e.fidelity_larger}});
  j["truncation_check"] = {{"extra_levels", tc.extra},
                           {"max_change", tc.max_change()},
                           {"tolerance", 1e-3},
                           {"passed", tc.max_change() < 1e-3},
                           {"points", checks}};
  write_json(c.file("scan.json"), j);
  if (tc.max_change() >= 1e-3)
    warn("truncation check: F changed by " + format_number(tc.max_change()) +
         " with +" + std::to_string(tc.extra) + " levels; increase model.truncation");

  std::vector<double> sx, sy;
  for (double v : xs) sx.push_back(v / fx);
  for (double v : ys) sy.push_back(v / fy);
  std::vector<Series> overlay;
  for (const auto& l : lines) {
    Series s;
    for (std::size_t i = 0; i < l.omega.size(); ++i) {
      s.x.push_back(c.freq(l.omega[i]));
      s.y.push_back(c.freq(l.detuning[i]));
    }
    s.color = "#ffffff";
    s.dash = l.n_ph == 1 ? "6 4" : "1.5 3";
    overlay.push_back(std::move(s));
  }
  std::vector<double> f, logt;
  for (const auto& r : table.points) {
    f.push_back(r.fidelity);
    logt.push_back(r.ok() && r.stabilization_time > 0 ? std::log10(r.stabilization_time) : NAN);
  }
  Figure fig(2, 1, 560, 440);
  Axes ax{"", g.x.parameter, g.y.parameter, g.x.log, g.y.log};
  ax.title = "fidelity to phi_-";
  fig.add(Heatmap{ax, sx, sy, f, "F", 0.0, 1.0, overlay});
  ax.title = "stabilization time";
  fig.add(Heatmap{ax, sx, sy, logt, "log10 t_stab", NAN, NAN, overlay});
  fig.save(c.file("scan.svg"));
  c.stage("output");
  if (table.failures()) throw PartialFailure{table.failures()};
}

// ------------------------------------------------------------------ line cut

void cmd_linecut(Context& c) {
  const auto& l = c.config.linecut;
  const PointParams& p = c.config.point;
  const double deps = circular_delta_epsilon(p.B0, p.omega_mod, c.config.analysis.integrator);
  std::vector<double> centers;
  for (int nph = 1; nph <= l.nph_max; ++nph)
    for (int m = -l.m_max; m <= l.m_max; ++m)
      centers.push_back(resonance_detuning(m, nph, p.omega_mod, deps));
  const auto grid = refined_grid(l.min, l.max, l.step, centers, l.window, l.fine_step);
  const LinecutResult r =
      detuning_linecut(p, grid, c.config.analysis, c.scan_options(), l.min_prominence, l.m_max, l.nph_max);
  c.stage("linecut");

  int failures = 0;
  {
    CsvWriter w(c.file("linecut.csv"), {"detuning", "fidelity", "stabilization_time", "error"});
    for (const auto& q : r.points) {
      w << c.freq(q.x) << q.fidelity << q.stabilization_time << q.error, w.end_row();
      failures += !q.ok();
    }
  }
  Json peaks = Json::array();
  for (const auto& pk : r.peaks) {
    Json e{{"detuning", c.freq(pk.peak.x)},
           {"fidelity", pk.peak.y},
           {"prominence", pk.peak.prominence},
           {"m", pk.m},
           {"n_ph", pk.n_ph},
           {"line_detuning", c.freq(pk.line)}};
    e["lorentzian"] = pk.lorentzian ? fit_json(*pk.lorentzian) : Json(nullptr);
    peaks.push_back(e);
  }
  Json lines = Json::array();
  for (int nph = 1; nph <= l.nph_max; ++nph)
    for (int m = -l.m_max; m <= l.m_max; ++m) {
      const double d = resonance_detuning(m, nph, p.omega_mod, deps);
      if (d >= l.min && d <= l.max)
        lines.push_back({{"m", m}, {"n_ph", nph}, {"detuning", c.freq(d)}});
    }
  Json j;
  j["experiment"] = "linecut";
  j["units"] = c.units();
  j["model"] = params_json(c, p);
  j["delta_epsilon"] = c.freq(deps);
  j["points"] = r.points.size();
  j["failures"] = failures;
  j["peaks"] = peaks;
  j["resonance_lines"] = lines;
  write_json(c.file("linecut.json"), j);

  Series fs, ts;
  for (const auto& q : r.points) {
    fs.x.push_back(c.freq(q.x));
    fs.y.push_back(q.fidelity);
    ts.x.push_back(c.freq(q.x));
    ts.y.push_back(q.stabilization_time);
  }
  ts.color = palette[1];
  std::vector<VerticalLine> marks;
  for (const auto& e : lines)
    marks.push_back({e["detuning"].get<double>(),
                     "m=" + std::to_string(e["m"].get<int>()) +
                         (e["n_ph"].get<int>() > 1 ? "/2ph" : ""),
                     "#888888", e["n_ph"].get<int>() == 1 ? "5 3" : "1.5 3"});
  Figure fig(1, 2, 720, 340);
  fig.add(LinePlot{{"fidelity line cut", "detuning", "F", false, false, NAN, NAN, 0.0, 1.0},
                   {fs},
                   marks});
  fig.add(LinePlot{{"stabilization time", "detuning", "t_stab", false, true}, {ts}, marks});
  fig.save(c.file("linecut.svg"));
  c.stage("output");
  if (failures) throw PartialFailure{failures};
}

// ------------------------------------------------------------------ adiabatic

void cmd_adiabatic(Context& c) {
  const auto& a = c.config.adiabatic;
  const auto pts = adiabatic_experiment(a, c.config.deltas, c.config.analysis.integrator,
                                        c.scan_options());
  c.stage("propagation");
  int failures = 0;
  {
    CsvWriter w(c.file("curves.csv"), {"delta", "init", "t", "p_phi_minus"});
    for (const auto& p : pts)
      for (const auto* curve : {&p.from_plus, &p.from_minus})
        for (std::size_t k = 0; k < curve->t.size(); ++k)
          w << c.freq(p.delta) << (curve == &p.from_plus ? "plus" : "minus") << curve->t[k]
            << curve->p_minus[k], w.end_row();
  }
  {
    CsvWriter w(c.file("period_averages.csv"), {"delta", "init", "t", "p_phi_minus"});
    for (const auto& p : pts)
      for (const auto* curve : {&p.from_plus, &p.from_minus})
        for (std::size_t k = 0; k < curve->t_period.size(); ++k)
          w << c.freq(p.delta) << (curve == &p.from_plus ? "plus" : "minus")
            << curve->t_period[k] << curve->p_period[k], w.end_row();
  }
  Json rows = Json::array();
  {
    CsvWriter w(c.file("adiabatic.csv"),
                {"delta", "stabilization_time", "stabilization_time_sigma", "steady_p_phi_minus",
                 "steady_p_phi_minus_sigma", "spectral_time", "fit_error"});
    for (const auto& p : pts) {
      const double T = p.fit ? p.fit->get("T") : NAN, sT = p.fit ? p.fit->error("T") : NAN;
      const double C = p.fit ? p.fit->get("C") : NAN, sC = p.fit ? p.fit->error("C") : NAN;
      w << c.freq(p.delta) << T << sT << C << sC << p.spectral_time << p.fit_error, w.end_row();
      failures += !p.fit;
      Json e{{"delta", c.freq(p.delta)}};
      e["fit"] = p.fit ? fit_json(*p.fit) : Json(nullptr);
      e["fit_error"] = p.fit_error;
      e["spectral_time"] = number_or_null(p.spectral_time);
      rows.push_back(e);
    }
  }
  Json j;
  j["experiment"] = "adiabatic";
  j["units"] = c.units();
  j["model"] = {{"B0", c.freq(a.B0)},           {"omega_mod", c.freq(a.omega_mod)},
                {"coupling", c.freq(a.coupling)}, {"kappa", c.freq(a.kappa)},
                {"relaxation", c.freq(a.relaxation)}, {"dephasing", a.dephasing},
                {"truncation", a.truncation},   {"periods", a.periods}};
  j["fit_failures"] = failures;
  j["points"] = rows;
  write_json(c.file("adiabatic.json"), j);

  Series ts, cs;
  for (const auto& p : pts) {
    ts.x.push_back(c.freq(p.delta));
    ts.y.push_back(p.stabilization_time);
    cs.x.push_back(c.freq(p.delta));
    cs.y.push_back(p.steady_p_minus);
  }
  ts.markers = cs.markers = true;
  cs.color = palette[1];
  Figure fig(2, 1);
  fig.add(LinePlot{{"stabilization time (fit)", "Delta - B0", "T_stab"}, {ts}, {}});
  fig.add(LinePlot{{"steady P(phi_-)", "Delta - B0", "P(phi_-)", false, false, NAN, NAN, 0.0, 1.0},
                   {cs},
                   {}});
  fig.save(c.file("adiabatic.svg"));
  c.stage("output");
  if (failures) {
    if (!c.options.keep_going) throw Error(std::to_string(failures) + " fits failed");
    throw PartialFailure{failures};
  }
}

// ------------------------------------------------------------------ elliptical

void cmd_elliptical(Context& c) {
  const auto& e = c.config.elliptical;
  const EllipticalResult r = elliptical_run(e, c.config.analysis.integrator, c.config.tolerance);
  c.stage("propagation");
  {
    CsvWriter w(c.file("trajectory.csv"), {"t", "sigma_z_plus_init", "sigma_z_minus_init",
                                           "p_phi_minus_plus_init", "p_phi_minus_minus_init",
                                           "trace_distance"});
    for (std::size_t k = 0; k < r.distance.size(); ++k)
      w << r.from_plus.t[k] << r.from_plus.sigma_z[k] << r.from_minus.sigma_z[k]
        << r.from_plus.p_minus[k] << r.from_minus.p_minus[k] << r.distance[k], w.end_row();
  }
  Json j;
  j["experiment"] = "elliptical";
  j["units"] = c.units();
  j["drive"] = {{"bx", c.freq(e.bx)}, {"bz", c.freq(e.bz)}, {"omega_mod", c.freq(e.omega_mod)}};
  j["cavity"] = {{"detuning", c.freq(e.detuning)}, {"coupling", c.freq(e.coupling)},
                 {"kappa", c.freq(e.kappa)}, {"truncation", e.truncation}};
  j["duration"] = r.from_plus.t.back();
  j["tolerance"] = r.tolerance;
  j["converged"] = r.converged();
  j["converged_at"] = number_or_null(r.converged_at);
  j["final_distance"] = r.distance.back();
  write_json(c.file("elliptical.json"), j);

  Series zp{r.from_plus.t, r.from_plus.sigma_z, "from phi_+", palette[1]};
  Series zm{r.from_minus.t, r.from_minus.sigma_z, "from phi_-", palette[0]};
  Series pp{r.from_plus.t, r.from_plus.p_minus, "from phi_+", palette[1]};
  Series pm{r.from_minus.t, r.from_minus.p_minus, "from phi_-", palette[0]};
  Series d{r.from_plus.t, r.distance, "trace distance", palette[2]};
  Figure fig(1, 3, 720, 300);
  fig.add(LinePlot{{"<sigma_z>", "t", "<sigma_z>", false, false, NAN, NAN, -1.0, 1.0}, {zp, zm}, {}});
  fig.add(LinePlot{{"P(phi_-)", "t", "P(phi_-)", false, false, NAN, NAN, 0.0, 1.0}, {pp, pm}, {}});
  fig.add(LinePlot{{"qubit trace distance", "t", "D", false, false, NAN, NAN, 0.0, 1.0},
                   {d, {{r.from_plus.t.front(), r.from_plus.t.back()},
                        {r.tolerance, r.tolerance}, "tolerance", "#888888", "4 3"}},
                   {}});
  fig.save(c.file("elliptical.svg"));
  c.stage("output");
}

// ------------------------------------------------------------------ boost

void cmd_boost(Context& c) {
  const BoostParams& base = c.config.boost;
  std::vector<std::pair<std::string, BoostParams>> runs;
  runs.emplace_back(base.g_s != 0.0 ? "stabilized" : "unstabilized", base);
  if (c.config.compare && base.g_s != 0.0) {
    BoostParams u = base;
    u.g_s = 0.0;
    runs.emplace_back("unstabilized", u);
  }
  Json summary = Json::object();
  Figure fig(static_cast<int>(runs.size()), 2, 560, 420);
  std::vector<LinePlot> stats;
  for (const auto& [label, p] : runs) {
    const BoostResult r = boost_run(p, c.config.analysis.integrator);
    c.stage(label);
    const double T = two_pi / p.omega_mod;
    {
      CsvWriter w(c.file("boost_" + label + ".csv"), {"t", "periods", "mean_nb", "std_nb"});
      for (std::size_t k = 0; k < r.times.size(); ++k)
        w << r.times[k] << r.times[k] / T << r.mean[k] << r.stddev[k], w.end_row();
    }
    {
      CsvWriter w(c.file("distribution_" + label + ".csv"), {"t", "n_b", "probability"});
      for (std::size_t k = 0; k < r.times.size(); ++k)
        for (int n = 0; n < r.distribution[k].size(); ++n)
          w << r.times[k] << n << r.distribution[k](n), w.end_row();
    }
    Json reph = Json::array();
    for (const auto& q : r.rephasing)
      reph.push_back({{"M", q.M}, {"N", q.N}, {"mismatch", q.mismatch}});
    const int spp = p.samples_per_period;
    auto at_period = [&](int M, const std::vector<double>& v) { return v.at(M * spp); };
    summary[label] = {{"g_s", c.freq(p.g_s)},
                      {"t_star_periods", p.periods},
                      {"mean_nb", r.mean.back()},
                      {"std_nb", r.stddev.back()},
                      {"mode_nb", r.mode_at_end},
                      {"pump_rate_per_period", r.pump_rate},
                      {"pump_rate_deviation", std::abs(r.pump_rate - 1.0)},
                      {"boundary_occupation", r.boundary_occupation},
                      {"rephasing", reph}};
    Json per = Json::array();
    for (int M = 0; M <= p.periods; ++M)
      per.push_back({{"M", M}, {"mean_nb", at_period(M, r.mean)}, {"std_nb", at_period(M, r.stddev)}});
    summary[label]["per_period"] = per;

    std::vector<double> ts, ns, z;
    for (double t : r.times) ts.push_back(t / T);
    for (int n = 0; n <= p.nb_max; ++n) ns.push_back(n);
    for (int n = 0; n <= p.nb_max; ++n)
      for (std::size_t k = 0; k < r.times.size(); ++k) z.push_back(r.distribution[k](n));
    Series mean{ts, r.mean, "<n_b>", "#ffffff", "5 3"};
    fig.add(Heatmap{{"P(n_b, t), " + label, "t / T_mod", "n_b"}, ts, ns, z, "P(n_b)", 0.0, NAN, {mean}});
    stats.push_back(LinePlot{{"Std[n_b], " + label, "t / T_mod", "Std[n_b]", false, false, NAN,
                              NAN, 0.0, NAN},
                             {{ts, r.stddev, "Std[n_b]", palette[stats.size() % 6]}},
                             {}});
  }
  for (const auto& s : stats) fig.add(s);
  Json j;
  j["experiment"] = "boost";
  j["units"] = c.units();
  j["parameters"] = {{"g_b", c.freq(base.g_b)},         {"B0", c.freq(base.B0)},
                     {"omega_mod", c.freq(base.omega_mod)}, {"delta_b", c.freq(base.delta_b)},
                     {"delta_s", c.freq(base.delta_s)},     {"g_s", c.freq(base.g_s)},
                     {"kappa_s", c.freq(base.kappa_s)},     {"nb_max", base.nb_max},
                     {"ns_max", base.ns_max},             {"nb0", base.nb0},
                     {"periods", base.periods}};
  j["runs"] = summary;
  if (summary.contains("stabilized") && summary.contains("unstabilized"))
    j["stabilizer_closer_to_quantized_rate"] =
        summary["stabilized"]["pump_rate_deviation"].get<double>() <
        summary["unstabilized"]["pump_rate_deviation"].get<double>();
  write_json(c.file("boost.json"), j);
  fig.save(c.file("boost.svg"));
  c.stage("output");
}

// ------------------------------------------------------------------ fit

void cmd_fit(Context& c) {
  fs::path input = c.config.fit.input;
  if (input.is_relative()) input = fs::path(c.config.path).parent_path() / input;
  CsvTable t;
  try {
    t = read_csv(input);
    t.column(c.config.fit.t_column);
    t.column(c.config.fit.y_column);
  } catch (const std::runtime_error& e) {
    throw ConfigError(c.config.path + ": fit input: " + e.what());
  }
  const auto x = t.numbers(c.config.fit.t_column), y = t.numbers(c.config.fit.y_column);
  const FitResult f = c.config.fit.model == FitModel::Lorentzian
                          ? fit_lorentzian(x, y)
                          : fit_exponential(x, y, c.config.fit.model);
  c.stage("fit");
  Json j;
  j["experiment"] = "fit";
  j["input"] = c.config.fit.input;
  j["samples"] = x.size();
  j["fit"] = fit_json(f);
  write_json(c.file("fit.json"), j);
  {
    CsvWriter w(c.file("fit.csv"), {"t", "y", "model", "residual"});
    for (std::size_t i = 0; i < x.size(); ++i) w << x[i] << y[i] << f(x[i]) << y[i] - f(x[i]), w.end_row();
  }
  Series data{x, y, "data", palette[0]};
  data.markers = true;
  data.line = false;
  std::vector<double> fx, fy;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  for (int i = 0; i <= 200; ++i) {
    fx.push_back(*lo + (*hi - *lo) * i / 200.0);
    fy.push_back(f(fx.back()));
  }
  Figure fig(1, 1);
  fig.add(LinePlot{{to_string(f.model) + " fit", c.config.fit.t_column, c.config.fit.y_column},
                   {data, {fx, fy, "fit", palette[1]}},
                   {}});
  fig.save(c.file("fit.svg"));
  c.stage("output");
}

}  // namespace

std::vector<std::string> subcommands() { return experiment_kinds(); }

void apply_overrides(RunConfig& c, const CommandOptions& o) {
  if (o.truncation_override) {
    const int n = *o.truncation_override;
    if (n < 1) throw ConfigError("--truncation-override must be >= 1");
    c.point.truncation = n;
    c.grid.base.truncation = n;
    c.adiabatic.truncation = n;
    c.elliptical.truncation = n;
    c.boost.nb_max = n;
  }
  if (o.steps_per_period) {
    if (*o.steps_per_period < 100) throw ConfigError("--steps-per-period must be >= 100");
    c.analysis.integrator.steps_per_period = *o.steps_per_period;
    c.analysis.integrator.max_phase_per_step = 0.0;
    c.grid.analysis = c.analysis;
  }
}

int run_command(const std::string& name, const CommandOptions& options) {
  RunConfig config;
  try {
    config = load_config(options.config.string());
    if (config.experiment != name)
      throw ConfigError(options.config.string() + ": config declares experiment '" +
                        config.experiment + "' but the subcommand is '" + name + "'");
    apply_overrides(config, options);
    fs::create_directories(options.out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  }

  RunManifest manifest(name, options.config, options.out);
  Context ctx{config, options, manifest, {}};
  int code = ok;
  try {
    if (name == "quasienergy") cmd_quasienergy(ctx);
    else if (name == "steady-state") cmd_steady_state(ctx);
    else if (name == "scan") cmd_scan(ctx);
    else if (name == "linecut") cmd_linecut(ctx);
    else if (name == "adiabatic") cmd_adiabatic(ctx);
    else if (name == "elliptical") cmd_elliptical(ctx);
    else if (name == "boost") cmd_boost(ctx);
    else if (name == "fit") cmd_fit(ctx);
    else throw ConfigError("unknown subcommand '" + name + "'");
  } catch (const PartialFailure& p) {
    std::cerr << p.failures << " point(s) failed; see the tables for details\n";
    manifest.set_status("partial: " + std::to_string(p.failures) + " failed points");
    code = partial_failure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    manifest.set_status("config error");
    code = config_error;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    manifest.set_status("config error");
    code = config_error;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    manifest.set_status(std::string("failed: ") + e.what());
    code = numerical_failure;
  }
  try {
    manifest.write();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (code == ok) code = numerical_failure;
  }
  return code;
}

}  // namespace floqstab::cli
