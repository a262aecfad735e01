#include <sys/wait.h>

#include <catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "manifest.hpp"
#include "output.hpp"

using namespace floqstab;
using namespace floqstab::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {
const fs::path source_dir = FLOQSTAB_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("floqstab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string err;
};

Run invoke(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + FLOQSTAB_CLI_PATH + "\" " + args + " 2> \"" +
                          err.string() + "\" >/dev/null";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.yaml";
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

const char* small_scan = R"(schema: 1
experiment: scan
model:
  B0: 1.0
  truncation: 1
integrator:
  max_phase_per_step: 0.2
  samples: 16
scan:
  x: {parameter: omega_mod, min: 0.9, max: 1.1, count: 2}
  y: {parameter: B0, min: -1.0, max: 1.0, count: 2}
  truncation_check: {points: 1, extra: 1}
)";
}  // namespace

TEST_CASE("cli: quasienergy example reproduces the circular-drive spectrum") {
  const fs::path dir = scratch("quasi");
  const fs::path config = source_dir / "configs" / "quasienergy.yaml";
  const auto r = invoke(
      "quasienergy -q -c \"" + config.string() + "\" -o \"" + (dir / "a").string() + "\"", dir);
  REQUIRE(r.code == 0);
  const auto table = read_csv(dir / "a" / "quasienergies.csv");
  const auto eps = table.numbers("epsilon");
  REQUIRE(eps.size() == 2);
  CHECK_THAT(eps[0], WithinAbs(-0.0720153, 1e-6));
  CHECK_THAT(eps[1], WithinAbs(0.0720153, 1e-6));
  for (const char* f :
       {"periodic_states.csv", "matrix_elements.csv", "resonances.csv", "quasienergy.json"})
    CHECK(fs::exists(dir / "a" / f));

  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest["experiment"] == "quasienergy");
  CHECK(manifest["config_sha256"] == sha256_file(config));
  CHECK(manifest["tool_version"] == tool_version);
  CHECK(manifest["status"] == "ok");

  // identical config and version give byte-identical tables and JSON
  REQUIRE(
      invoke("quasienergy -q -c \"" + config.string() + "\" -o \"" + (dir / "b").string() + "\"",
             dir)
          .code == 0);
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename().string();
    if (name == "manifest.json") continue;
    INFO(name);
    CHECK(slurp(e.path()) == slurp(dir / "b" / name));
  }
}

TEST_CASE("cli: config errors exit with code 2 and point at the problem") {
  const fs::path dir = scratch("errors");
  auto run = [&](const std::string& sub, const std::string& text) {
    const auto cfg = write_config(dir, text);
    return invoke(sub + " -q -c \"" + cfg.string() + "\" -o \"" + (dir / "out").string() + "\"",
                  dir);
  };
  const std::string head = "schema: 1\nexperiment: steady-state\n";

  auto r = run("steady-state", head + "model:\n  B0: 1.0\n");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("model.omega_mod"));

  r = run("steady-state", head + "model:\n  B0: 1.0\n  omega_mod: 1.0\n  kapa: 0.1\n");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("config.yaml:6:"));
  CHECK_THAT(r.err, ContainsSubstring("model.kapa"));

  r = run("steady-state", head + "model: {B0: 1.0, omega_mod: 1.0}\nboost: {nb0: 1}\n");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("'boost' is not used"));

  r = run("steady-state", "schema: 2\nexperiment: steady-state\n");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("schema"));

  r = run("scan", head + "model: {B0: 1.0, omega_mod: 1.0}\n");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("subcommand is 'scan'"));

  r = run("steady-state", head + "model: {B0: -1.0, omega_mod: 1.0}\n");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("B0"));

  CHECK(invoke("steady-state -q", dir).code == 2);
  CHECK(invoke("no-such-command -c x", dir).code == 2);
  const auto cfg = write_config(dir, head + "model: {B0: 1.0, omega_mod: 1.0}\n");
  CHECK(invoke("steady-state -q -c \"" + cfg.string() + "\" --steps-per-period 50 -o \"" +
                   (dir / "out").string() + "\"",
               dir)
            .code == 2);
}

TEST_CASE("cli: per-point failures abort or are kept going") {
  const fs::path dir = scratch("partial");
  const auto cfg = write_config(dir, small_scan);
  auto r =
      invoke("scan -q -j 1 -c \"" + cfg.string() + "\" -o \"" + (dir / "a").string() + "\"", dir);
  CHECK(r.code == 3);
  CHECK_THAT(r.err, ContainsSubstring("B0="));

  r = invoke(
      "scan -q -j 1 --keep-going -c \"" + cfg.string() + "\" -o \"" + (dir / "b").string() + "\"",
      dir);
  CHECK(r.code == 4);
  const auto table = read_csv(dir / "b" / "scan.csv");
  CHECK(table.rows.size() == 4);
  const int err = table.column("error");
  int failed = 0;
  for (const auto& row : table.rows) failed += !row[err].empty();
  CHECK(failed == 2);
  CHECK(fs::exists(dir / "b" / "scan.svg"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
  CHECK_THAT(manifest["status"].get<std::string>(), ContainsSubstring("partial"));
}

TEST_CASE("cli: fit on a synthetic decay curve") {
  const fs::path dir = scratch("fit");
  {
    std::ofstream csv(dir / "curve.csv");
    csv.precision(17);
    csv << "time,value\n";
    for (int i = 0; i < 30; ++i)
      csv << 0.3 * i << ',' << 0.9 - 0.4 * std::exp(-0.3 * i / 3.0) << '\n';
  }
  const auto cfg = write_config(dir,
                                "schema: 1\nexperiment: fit\nfit:\n  input: curve.csv\n  t_column: "
                                "time\n  y_column: value\n");
  const auto r =
      invoke("fit -q -c \"" + cfg.string() + "\" -o \"" + (dir / "out").string() + "\"", dir);
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "fit.json"));
  CHECK_THAT(j["fit"]["parameters"]["T"]["value"].get<double>(), WithinRel(3.0, 1e-6));
  CHECK_THAT(j["fit"]["parameters"]["C"]["value"].get<double>(), WithinRel(0.9, 1e-6));

  const auto bad = write_config(dir,
                                "schema: 1\nexperiment: fit\nfit:\n  input: curve.csv\n"
                                "  t_column: time\n  y_column: nope\n");
  const auto e =
      invoke("fit -q -c \"" + bad.string() + "\" -o \"" + (dir / "bad").string() + "\"", dir);
  CHECK(e.code != 0);
  CHECK_THAT(e.err, ContainsSubstring("nope"));
}

TEST_CASE("config parsing") {
  SECTION("units and rates") {
    const auto c = parse_config(R"(schema: 1
experiment: adiabatic
units: mhz
adiabatic:
  B0: 80
  relaxation: 0.0138
  dephasing_time: 10.2
  delta: [-40, 0, 20]
)");
    CHECK(c.units == Units::MHz);
    CHECK_THAT(c.adiabatic.B0, WithinRel(two_pi * 80, 1e-15));
    CHECK_THAT(c.adiabatic.relaxation, WithinRel(two_pi * 0.0138, 1e-15));
    CHECK_THAT(c.adiabatic.dephasing, WithinRel(1 / 10.2, 1e-15));
    REQUIRE(c.deltas.size() == 3);
    CHECK_THAT(c.deltas[0], WithinRel(-two_pi * 40, 1e-15));
  }
  SECTION("delta ranges") {
    const auto c = parse_config(
        "schema: 1\nexperiment: adiabatic\nadiabatic:\n  delta: {min: -8, max: 8, step: 4}\n");
    CHECK(c.deltas.size() == 5);
    CHECK_THROWS_AS(parse_config("schema: 1\nexperiment: adiabatic\nadiabatic:\n  delta: []\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("schema: 1\nexperiment: adiabatic\nadiabatic:\n  delta: [1]\n"
                                 "  dephasing: 0.1\n  dephasing_time: 10\n"),
                    ConfigError);
  }
  SECTION("swept parameters are optional in the model") {
    const auto c = parse_config(R"(schema: 1
experiment: scan
model: {B0: 1.0}
scan:
  x: {parameter: omega_mod, min: 0.5, max: 2, count: 3, log: true}
  y: {parameter: detuning, min: 0.1, max: 1, count: 4}
)");
    CHECK(c.grid.x.count == 3);
    CHECK(c.grid.x.log);
    CHECK(c.grid.base.B0 == 1.0);
    CHECK_THROWS_AS(parse_config(R"(schema: 1
experiment: scan
model: {B0: 1.0}
scan:
  x: {parameter: omega_mod, min: 0.5, max: 2, count: 3}
  y: {parameter: omega_mod, min: 0.1, max: 1, count: 4}
)"),
                    ConfigError);
  }
  SECTION("errors carry file and line") {
    try {
      parse_config("schema: 1\nexperiment: boost\nboost:\n  nb0: 99\n", "b.yaml");
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK_THAT(std::string(e.what()), ContainsSubstring("b.yaml:4:"));
    }
    CHECK_THROWS_AS(parse_config("schema: 1\nexperiment: dance\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config("schema: 1\nexperiment: fit\nfit: {input: a.csv}\nextra: 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config("schema: 1\nexperiment: steady-state\nmodel: {B0: x, omega_mod: 1}\n"),
        ConfigError);
  }
  SECTION("command-line overrides") {
    auto c = parse_config(
        "schema: 1\nexperiment: steady-state\nmodel: {B0: 1, omega_mod: 1, truncation: 3}\n");
    CommandOptions o;
    o.truncation_override = 6;
    o.steps_per_period = 500;
    apply_overrides(c, o);
    CHECK(c.point.truncation == 6);
    CHECK(c.grid.base.truncation == 6);
    CHECK(c.analysis.integrator.steps_per_period == 500);
    CHECK(c.analysis.integrator.max_phase_per_step == 0.0);
  }
  for (const char* name : {"quasienergy", "steady_state", "scan", "linecut", "adiabatic",
                           "elliptical", "boost", "fit"}) {
    INFO(name);
    CHECK_NOTHROW(load_config((source_dir / "configs" / (std::string(name) + ".yaml")).string()));
  }
}

TEST_CASE("csv round trip") {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w << 0.1 << std::string("x,\"y\"");
    w.end_row();
    w << 1e-300 << std::string("");
    w.end_row();
  }
  const auto t = read_csv(dir / "t.csv");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,\"y\"");
  CHECK(t.numbers("a")[1] == 1e-300);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(NAN) == "nan");
  CHECK_THROWS(t.numbers("b"));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
