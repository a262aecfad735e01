#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace floqstab::cli {

namespace {

const std::vector<std::string> kinds = {"quasienergy", "steady-state", "scan",  "linecut",
                                        "adiabatic",   "elliptical",   "boost", "fit"};

// A YAML mapping whose keys must all be consumed; finish() rejects leftovers.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& file)
      : node_(std::move(node)), path_(std::move(path)), file_(file) {
    if (node_ && !node_.IsMap()) fail(node_, "'" + path_ + "' must be a mapping");
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    std::ostringstream s;
    s << file_;
    if (at && at.Mark().line >= 0) s << ':' << at.Mark().line + 1;
    s << ": " << msg;
    throw ConfigError(s.str());
  }

  bool present() const { return static_cast<bool>(node_); }
  // const lookup: yaml-cpp's non-const operator[] may insert the key
  YAML::Node lookup(const std::string& key) const {
    static const YAML::Node empty = YAML::Load("{}");
    const YAML::Node& n = node_ ? node_ : empty;
    return n[key];  // undefined when absent
  }
  bool has(const std::string& key) const { return static_cast<bool>(lookup(key)); }
  std::string key_path(const std::string& key) const { return path_ + "." + key; }

  YAML::Node get(const std::string& key) {
    used_.insert(key);
    return lookup(key);
  }

  YAML::Node require(const std::string& key) {
    YAML::Node v = get(key);
    if (!v) fail(node_, "missing required field '" + key_path(key) + "'");
    return v;
  }

  template <typename T>
  T as(const YAML::Node& v, const std::string& key) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, "field '" + key_path(key) + "' has the wrong type");
    }
  }

  double number(const std::string& key, double def) {
    const YAML::Node v = get(key);
    return v ? as<double>(v, key) : def;
  }
  double required_number(const std::string& key) { return as<double>(require(key), key); }
  int integer(const std::string& key, int def) {
    const YAML::Node v = get(key);
    return v ? as<int>(v, key) : def;
  }
  bool boolean(const std::string& key, bool def) {
    const YAML::Node v = get(key);
    return v ? as<bool>(v, key) : def;
  }
  std::string text(const std::string& key, const std::string& def) {
    const YAML::Node v = get(key);
    return v ? as<std::string>(v, key) : def;
  }

  Section child(const std::string& key) { return Section(get(key), key_path(key), file_); }

  std::pair<int, int> range(const std::string& key, std::pair<int, int> def) {
    const YAML::Node v = get(key);
    if (!v) return def;
    if (!v.IsSequence() || v.size() != 2) fail(v, "'" + key_path(key) + "' must be [min, max]");
    const int a = as<int>(v[0], key), b = as<int>(v[1], key);
    if (a > b) fail(v, "'" + key_path(key) + "' has min > max");
    return {a, b};
  }

  void positive(const std::string& key, double v) const {
    if (!(v > 0.0))
      fail(has(key) ? lookup(key) : node_, "'" + key_path(key) + "' must be positive");
  }
  void non_negative(const std::string& key, double v) const {
    if (!(v >= 0.0))
      fail(has(key) ? lookup(key) : node_, "'" + key_path(key) + "' must be non-negative");
  }

  void finish() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) fail(kv.first, "unknown key '" + key_path(key) + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& file_;
  std::set<std::string> used_;
};

void read_rates(Section& s, double scale, double& relaxation, double& dephasing) {
  relaxation = s.number("relaxation", relaxation / scale) * scale;
  s.non_negative("relaxation", relaxation);
  const bool rate = s.has("dephasing"), time = s.has("dephasing_time");
  if (rate && time) s.fail(s.get("dephasing_time"), "give either dephasing or dephasing_time");
  if (time) {
    const double td = s.number("dephasing_time", 0.0);
    s.positive("dephasing_time", td);
    dephasing = 1.0 / td;
  } else {
    dephasing = s.number("dephasing", dephasing);
    s.get("dephasing_time");
  }
  s.non_negative("dephasing", dephasing);
}

void read_model(Section& s, RunConfig& c, const std::set<std::string>& swept) {
  const double f = c.frequency_scale;
  PointParams& p = c.point;
  auto freq = [&](const std::string& key, double& slot, bool required) {
    if (required && !swept.count(key)) {
      slot = s.required_number(key) * f;
    } else {
      slot = s.number(key, slot / f) * f;
    }
  };
  freq("B0", p.B0, true);
  freq("omega_mod", p.omega_mod, true);
  freq("detuning", p.detuning, false);
  freq("coupling", p.coupling, false);
  freq("kappa", p.kappa, false);
  read_rates(s, f, p.relaxation, p.dephasing);
  p.truncation = s.integer("truncation", p.truncation);
  if (!swept.count("B0")) s.positive("B0", p.B0);
  if (!swept.count("omega_mod")) s.positive("omega_mod", p.omega_mod);
  s.non_negative("kappa", p.kappa);
  if (p.truncation < 1) s.fail(s.get("truncation"), "'model.truncation' must be >= 1");
  s.finish();
}

void read_integrator(Section& s, RunConfig& c) {
  auto& ic = c.analysis.integrator;
  ic.steps_per_period = s.integer("steps_per_period", ic.steps_per_period);
  ic.max_phase_per_step = s.number("max_phase_per_step", ic.max_phase_per_step);
  c.analysis.samples = s.integer("samples", c.analysis.samples);
  if (ic.steps_per_period < 100)
    s.fail(s.get("steps_per_period"), "'integrator.steps_per_period' must be >= 100");
  s.non_negative("max_phase_per_step", ic.max_phase_per_step);
  if (c.analysis.samples < 2) s.fail(s.get("samples"), "'integrator.samples' must be >= 2");
  s.finish();
}

ScanAxis read_axis(Section s, double scale, const ScanAxis& def) {
  if (!s.present()) return def;
  ScanAxis a = def;
  a.parameter = s.text("parameter", a.parameter);
  if (!is_parameter(a.parameter))
    s.fail(s.get("parameter"), "unknown scan parameter '" + a.parameter + "'");
  const double f = a.parameter == "dephasing" ? 1.0 : scale;
  a.min = s.number("min", a.min / f) * f;
  a.max = s.number("max", a.max / f) * f;
  a.count = s.integer("count", a.count);
  a.log = s.boolean("log", a.log);
  if (a.count < 2) s.fail(s.get("count"), "'" + s.key_path("count") + "' must be >= 2");
  if (!(a.max > a.min)) s.fail(s.get("max"), "'" + s.key_path("max") + "' must exceed min");
  if (a.log && !(a.min > 0.0)) s.fail(s.get("min"), "log axes need a positive min");
  s.finish();
  return a;
}

void read_quasienergy(Section& s, RunConfig& c) {
  auto& q = c.quasienergy;
  q.samples = s.integer("samples", q.samples);
  std::tie(q.m_min, q.m_max) = s.range("m_range", {q.m_min, q.m_max});
  q.photon = s.integer("photon", q.photon);
  Section r = s.child("resonance");
  std::tie(q.resonance_m_min, q.resonance_m_max) =
      r.range("m_range", {q.resonance_m_min, q.resonance_m_max});
  q.resonance_nph_max = r.integer("nph_max", q.resonance_nph_max);
  r.finish();
  if (q.samples < 64) s.fail(s.get("samples"), "'quasienergy.samples' must be >= 64");
  if (q.photon < 0) s.fail(s.get("photon"), "'quasienergy.photon' must be >= 0");
  s.finish();
}

void read_scan(Section& s, RunConfig& c) {
  c.grid.x = read_axis(s.child("x"), c.frequency_scale, c.grid.x);
  c.grid.y = read_axis(s.child("y"), c.frequency_scale, c.grid.y);
  if (c.grid.x.parameter == c.grid.y.parameter)
    s.fail(s.get("y"), "scan axes must address different parameters");
  Section o = s.child("overlay");
  std::tie(c.overlay.m_min, c.overlay.m_max) = o.range("m_range", {c.overlay.m_min, c.overlay.m_max});
  c.overlay.nph_max = o.integer("nph_max", c.overlay.nph_max);
  o.finish();
  Section t = s.child("truncation_check");
  c.truncation_points = t.integer("points", c.truncation_points);
  c.truncation_extra = t.integer("extra", c.truncation_extra);
  t.finish();
  s.finish();
}

void read_linecut(Section& s, RunConfig& c) {
  auto& l = c.linecut;
  const double f = c.frequency_scale;
  l.min = s.number("min", l.min / f) * f;
  l.max = s.number("max", l.max / f) * f;
  l.step = s.number("step", l.step / f) * f;
  l.window = s.number("window", l.window / f) * f;
  l.fine_step = s.number("fine_step", l.fine_step / f) * f;
  l.min_prominence = s.number("min_prominence", l.min_prominence);
  l.m_max = s.integer("m_max", l.m_max);
  l.nph_max = s.integer("nph_max", l.nph_max);
  s.positive("step", l.step);
  if (!(l.max > l.min)) s.fail(s.get("max"), "'linecut.max' must exceed min");
  s.finish();
}

void read_adiabatic(Section& s, RunConfig& c) {
  auto& a = c.adiabatic;
  const double f = c.frequency_scale;
  a.B0 = s.number("B0", a.B0 / f) * f;
  a.omega_mod = s.number("omega_mod", a.omega_mod / f) * f;
  a.coupling = s.number("coupling", a.coupling / f) * f;
  a.kappa = s.number("kappa", a.kappa / f) * f;
  read_rates(s, f, a.relaxation, a.dephasing);
  a.truncation = s.integer("truncation", a.truncation);
  a.periods = s.integer("periods", a.periods);
  a.samples_per_period = s.integer("samples_per_period", a.samples_per_period);
  a.spectral = s.boolean("spectral", a.spectral);
  s.positive("B0", a.B0);
  s.positive("omega_mod", a.omega_mod);
  if (a.periods < 5) s.fail(s.get("periods"), "'adiabatic.periods' must be >= 5");

  const YAML::Node d = s.require("delta");
  if (d.IsSequence()) {
    for (const auto& v : d) c.deltas.push_back(s.as<double>(v, "delta") * f);
  } else {
    Section r(d, "adiabatic.delta", c.path);
    const double lo = r.required_number("min"), hi = r.required_number("max");
    const double step = r.required_number("step");
    r.positive("step", step);
    if (!(hi >= lo)) r.fail(d, "'adiabatic.delta.max' must be >= min");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) c.deltas.push_back((lo + i * step) * f);
    r.finish();
  }
  if (c.deltas.empty()) s.fail(d, "'adiabatic.delta' is empty");
  s.finish();
}

void read_elliptical(Section& s, RunConfig& c) {
  auto& e = c.elliptical;
  const double f = c.frequency_scale;
  e.bx = s.number("bx", e.bx / f) * f;
  e.bz = s.number("bz", e.bz / f) * f;
  e.detuning = s.number("detuning", e.detuning / f) * f;
  e.omega_mod = s.number("omega_mod", e.omega_mod / f) * f;
  e.coupling = s.number("coupling", e.coupling / f) * f;
  e.kappa = s.number("kappa", e.kappa / f) * f;
  read_rates(s, f, e.relaxation, e.dephasing);
  e.truncation = s.integer("truncation", e.truncation);
  e.duration = s.number("duration", e.duration);
  e.samples_per_period = s.integer("samples_per_period", e.samples_per_period);
  c.tolerance = s.number("tolerance", c.tolerance);
  s.positive("omega_mod", e.omega_mod);
  s.non_negative("duration", e.duration);
  s.positive("tolerance", c.tolerance);
  s.finish();
}

void read_boost(Section& s, RunConfig& c) {
  auto& b = c.boost;
  const double f = c.frequency_scale;
  b.g_b = s.number("g_b", b.g_b / f) * f;
  b.B0 = s.number("B0", b.B0 / f) * f;
  b.omega_mod = s.number("omega_mod", b.omega_mod / f) * f;
  b.delta_b = s.number("delta_b", b.delta_b / f) * f;
  b.delta_s = s.number("delta_s", b.delta_s / f) * f;
  b.g_s = s.number("g_s", b.g_s / f) * f;
  b.kappa_s = s.number("kappa_s", b.kappa_s / f) * f;
  b.nb_max = s.integer("nb_max", b.nb_max);
  b.ns_max = s.integer("ns_max", b.ns_max);
  b.nb0 = s.integer("nb0", b.nb0);
  b.periods = s.integer("periods", b.periods);
  b.samples_per_period = s.integer("samples_per_period", b.samples_per_period);
  c.compare = s.boolean("compare", c.compare);
  s.positive("omega_mod", b.omega_mod);
  if (b.nb0 < 0 || b.nb0 > b.nb_max) s.fail(s.get("nb0"), "'boost.nb0' must lie in [0, nb_max]");
  if (b.periods < 1) s.fail(s.get("periods"), "'boost.periods' must be >= 1");
  s.finish();
}

void read_fit(Section& s, RunConfig& c) {
  c.fit.input = s.as<std::string>(s.require("input"), "input");
  c.fit.t_column = s.text("t_column", c.fit.t_column);
  c.fit.y_column = s.text("y_column", c.fit.y_column);
  const std::string model = s.text("model", "exponential");
  try {
    c.fit.model = fit_model_from_string(model);
  } catch (const FitError&) {
    s.fail(s.get("model"), "unknown fit model '" + model + "'");
  }
  s.finish();
}

}  // namespace

std::vector<std::string> experiment_kinds() { return kinds; }

RunConfig parse_config(const std::string& text, const std::string& name) {
  RunConfig c;
  c.path = name;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || !root.IsMap()) throw ConfigError(name + ": config must be a mapping");
  const YAML::Node& cref = root;
  Section top(root, "config", c.path);

  const int schema = top.as<int>(top.require("schema"), "schema");
  if (schema != schema_version)
    top.fail(cref["schema"], "unsupported schema " + std::to_string(schema) + " (expected " +
                                 std::to_string(schema_version) + ")");
  c.experiment = top.as<std::string>(top.require("experiment"), "experiment");
  if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end())
    top.fail(cref["experiment"], "unknown experiment '" + c.experiment + "'");
  const std::string units = top.text("units", "ratio");
  if (units == "ratio") {
    c.units = Units::Ratio;
  } else if (units == "mhz") {
    c.units = Units::MHz;
    c.frequency_scale = two_pi;
  } else {
    top.fail(cref["units"], "units must be 'ratio' or 'mhz'");
  }

  // sections used by each experiment; any other section is rejected as a likely typo
  const std::string& e = c.experiment;
  const bool circular = e == "quasienergy" || e == "steady-state" || e == "scan" || e == "linecut";
  auto reject = [&](const std::string& section, bool allowed) {
    if (!allowed && cref[section])
      top.fail(cref[section], "section '" + section + "' is not used by experiment '" + e + "'");
  };
  reject("model", circular);
  reject("quasienergy", e == "quasienergy");
  reject("scan", e == "scan");
  reject("linecut", e == "linecut");
  reject("adiabatic", e == "adiabatic");
  reject("elliptical", e == "elliptical");
  reject("boost", e == "boost");
  reject("fit", e == "fit");
  reject("integrator", e != "fit");

  if (e != "fit") {
    Section s = top.child("integrator");
    read_integrator(s, c);
  }
  if (e == "scan") {
    Section s = top.child("scan");
    read_scan(s, c);
  }
  if (circular) {
    std::set<std::string> swept;
    if (e == "scan") swept = {c.grid.x.parameter, c.grid.y.parameter};
    if (e == "linecut") swept = {"detuning"};
    Section s = top.child("model");
    if (!s.present()) top.fail(root, "missing required section 'model'");
    read_model(s, c, swept);
    c.grid.base = c.point;
    c.grid.analysis = c.analysis;
  }
  if (e == "quasienergy") {
    Section s = top.child("quasienergy");
    read_quasienergy(s, c);
  }
  if (e == "linecut") {
    Section s = top.child("linecut");
    read_linecut(s, c);
  }
  if (e == "adiabatic") {
    Section s = top.child("adiabatic");
    if (!s.present()) top.fail(root, "missing required section 'adiabatic'");
    read_adiabatic(s, c);
  }
  if (e == "elliptical") {
    Section s = top.child("elliptical");
    read_elliptical(s, c);
  }
  if (e == "boost") {
    Section s = top.child("boost");
    read_boost(s, c);
  }
  if (e == "fit") {
    Section s = top.child("fit");
    if (!s.present()) top.fail(root, "missing required section 'fit'");
    read_fit(s, c);
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str(), path);
}

}  // namespace floqstab::cli
