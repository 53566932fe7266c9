// Tests for the experiment-configuration parser and the command-line tool:
// JSON schema handling (defaults, strict keys, modal presets, history and
// control parsing, validation messages), %.17g round-tripping, and the
// end-to-end behavior of the fdc binary (exit codes, output files, overrides,
// determinism, and control re-feed consistency).
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdc/config.hpp"
#include "fdc/errors.hpp"
#include "fdc/spectral_model.hpp"

namespace fs = std::filesystem;
using fdc::ExperimentConfig;

namespace {

ExperimentConfig parse(const std::string& text) {
  return ExperimentConfig::from_json_text(text);
}

// ---------------------------------------------------------------- CLI helpers

const char* cli_path() { return FDC_CLI_PATH; }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

// Runs the tool with the given argument string; stdout is discarded and
// stderr is captured to err_file when provided. Returns the exit status.
int run_cli(const std::string& args, const fs::path& err_file = {}) {
  std::string cmd = std::string("\"") + cli_path() + "\" " + args + " > /dev/null";
  if (err_file.empty()) {
    cmd += " 2> /dev/null";
  } else {
    cmd += " 2> " + quoted(err_file);
  }
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

fs::path fresh_dir(const fs::path& base, const std::string& name) {
  const fs::path d = base / name;
  fs::create_directories(d);
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Library-level parsing
// ---------------------------------------------------------------------------

TEST_CASE("empty config yields the documented defaults") {
  const ExperimentConfig cfg = parse("{}");
  CHECK(cfg.params.r == 0.5);
  CHECK(cfg.params.tau == 1.0);
  CHECK(cfg.params.h == 0.0);
  // r <= 1/2 with no explicit cutoff: the guarded default 0.05 * (tau - h).
  CHECK(cfg.params.eps == 0.05);
  CHECK_FALSE(cfg.eps_given);
  CHECK(cfg.modes == 25);
  CHECK(cfg.steps == 200);
  REQUIRE(std::holds_alternative<fdc::Zonal>(cfg.actuator.kind));
  CHECK(std::get<fdc::Zonal>(cfg.actuator.kind).beta1 == 0.0);
  CHECK(std::get<fdc::Zonal>(cfg.actuator.kind).beta2 == 1.0);
  CHECK(cfg.region.a == 0.0);
  CHECK(cfg.region.b == 1.0);
  REQUIRE(cfg.z0.size() == 25);
  REQUIRE(cfg.zd.size() == 25);
  CHECK(cfg.z0.cwiseAbs().maxCoeff() == 0.0);
  CHECK(cfg.zd.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(cfg.u.size() == 201);
  CHECK(cfg.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(cfg.history.grid.size() == 0);
  CHECK(cfg.reg == -1.0);
  CHECK(cfg.tol.ml == 1e-12);
  CHECK(cfg.tol.residual == 5e-2);
  CHECK(cfg.tol.controllability == 1e-10);
  CHECK_FALSE(cfg.emit_matrix);
  CHECK(cfg.spatial_points == 0);
}

TEST_CASE("the singularity cutoff defaults only when needed") {
  // r > 1/2: the kernel square is integrable without a cutoff.
  CHECK(parse(R"({"r": 0.6})").params.eps == 0.0);
  // r <= 1/2 without an explicit value: guarded default, scaled by the span.
  CHECK(parse(R"({"r": 0.3})").params.eps == 0.05);
  CHECK(parse(R"({"r": 0.5, "h": 0.2})").params.eps == doctest::Approx(0.04).epsilon(1e-15));
  // An explicit eps always wins, including an explicit zero.
  const ExperimentConfig ez = parse(R"({"r": 0.3, "eps": 0})");
  CHECK(ez.params.eps == 0.0);
  CHECK(ez.eps_given);
  CHECK(parse(R"({"r": 0.3, "eps": 0.01})").params.eps == 0.01);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(parse(R"({"foo": 1})"),
                       "config: unknown key \"foo\" in the top-level object",
                       fdc::ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(R"({"actuator": {"kind": "zonal", "beta1": 0, "beta2": 1, "x": 2}})"),
      "config: unknown key \"x\" in actuator", fdc::ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(R"({"actuator": {"kind": "pointwise", "b": 0.5, "beta1": 0}})"),
      "config: unknown key \"beta1\" in actuator", fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"region": {"a": 0, "b": 1, "c": 2}})"),
                       "config: unknown key \"c\" in region", fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"tolerances": {"ml": 1e-12, "extra": 1}})"),
                       "config: unknown key \"extra\" in tolerances",
                       fdc::ConfigError);
}

TEST_CASE("malformed json and non-object top level are configuration errors") {
  CHECK_THROWS_AS(parse("{"), fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse("[]"), "config: top level must be an object",
                       fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"r": "big"})"), "config: \"r\" must be a number",
                       fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"modes": 2.5})"),
                       "config: \"modes\" must be an integer", fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"emit_matrix": 1})"),
                       "config: \"emit_matrix\" must be a boolean",
                       fdc::ConfigError);
}

TEST_CASE("modal presets parse and reject out-of-range indices") {
  const ExperimentConfig m3 = parse(R"({"modes": 5, "zd": "mode-3"})");
  REQUIRE(m3.zd.size() == 5);
  CHECK(m3.zd[2] == 1.0);
  CHECK(m3.zd.cwiseAbs().sum() == 1.0);

  const ExperimentConfig arr = parse(R"({"modes": 4, "z0": [1.5, -2.0]})");
  REQUIRE(arr.z0.size() == 4);
  CHECK(arr.z0[0] == 1.5);
  CHECK(arr.z0[1] == -2.0);
  CHECK(arr.z0[2] == 0.0);
  CHECK(arr.z0[3] == 0.0);

  CHECK(parse(R"({"z0": "zero"})").z0.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_WITH_AS(parse(R"({"modes": 5, "zd": "mode-6"})"),
                       "config: \"zd\": mode index out of range",
                       fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"modes": 5, "zd": "mode-0"})"),
                       "config: \"zd\": mode index out of range",
                       fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"zd": "mode-x"})"), fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"modes": 2, "z0": [1, 2, 3]})"),
                       "config: \"z0\": more coefficients than modes",
                       fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"z0": true})"), fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"z0": [1, "two"]})"), fdc::ConfigError);
}

TEST_CASE("history parsing honors the delay") {
  // No delay: only the trivial zero history is representable as a number.
  CHECK(parse(R"({"phi": 0.0})").history.grid.size() == 0);
  CHECK_THROWS_WITH_AS(parse(R"({"phi": 0.5})"),
                       "config: \"phi\": a control history requires h > 0",
                       fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"phi": [1, 2]})"), fdc::ConfigError);

  const ExperimentConfig c = parse(R"({"h": 0.2, "phi": 0.5})");
  REQUIRE(c.history.grid.size() == 2);
  CHECK(c.history.grid[0] == -0.2);
  CHECK(c.history.grid[1] == 0.0);
  CHECK(c.history.vals[0] == 0.5);
  CHECK(c.history.vals[1] == 0.5);

  const ExperimentConfig a = parse(R"({"h": 0.2, "phi": [1.0, 2.0, 3.0]})");
  REQUIRE(a.history.grid.size() == 3);
  CHECK(a.history.grid[0] == -0.2);
  CHECK(a.history.grid[2] == 0.0);
  CHECK(a.history.vals[1] == 2.0);

  CHECK_THROWS_WITH_AS(parse(R"({"h": 0.2, "phi": [1.0]})"),
                       "config: \"phi\": array needs at least 2 samples",
                       fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"h": 0.2, "phi": "warm"})"), fdc::ConfigError);
}

TEST_CASE("control samples must match the step grid") {
  const ExperimentConfig cn = parse(R"({"steps": 10, "u": 0.7})");
  REQUIRE(cn.u.size() == 11);
  CHECK(cn.u[0] == 0.7);
  CHECK(cn.u[10] == 0.7);

  const ExperimentConfig ca = parse(R"({"steps": 2, "u": [0.0, 1.0, 0.5]})");
  REQUIRE(ca.u.size() == 3);
  CHECK(ca.u[1] == 1.0);

  CHECK_THROWS_WITH_AS(parse(R"({"steps": 4, "u": [0.0, 1.0]})"),
                       "config: \"u\": array must carry steps + 1 samples",
                       fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"u": [0, false]})"), fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"u": "ramp"})"), fdc::ConfigError);
}

TEST_CASE("validation rejects out-of-range settings with stable messages") {
  CHECK_THROWS_WITH_AS(parse(R"({"region": {"a": 0.5, "b": 0.2}})"),
                       "region: a < b required", fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"region": {"a": -0.1, "b": 0.5}})"),
                       "region: a < b required", fdc::ConfigError);
  CHECK_THROWS_AS(
      parse(R"({"actuator": {"kind": "zonal", "beta1": 0.8, "beta2": 0.3}})"),
      fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"actuator": {"kind": "pointwise", "b": 1.5}})"),
                  fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"actuator": {"kind": "gaussian"}})"),
                  fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"modes": 513})"),
                       "config: modes capped at 512", fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"steps": 200001})"),
                       "config: steps capped at 200000", fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"modes": 0})"), "config: modes must be >= 1",
                       fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"steps": 0})"), "config: steps must be >= 1",
                       fdc::ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"reg": -0.5})"), "config: reg must be >= 0",
                       fdc::ConfigError);
  CHECK(parse(R"({"reg": -1})").reg == -1.0);
  CHECK(parse(R"({"reg": 0})").reg == 0.0);
  CHECK_THROWS_AS(parse(R"({"tolerances": {"ml": 0}})"), fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"spatial_points": -1})"), fdc::ConfigError);
  // Evolution parameters are validated through the same gate.
  CHECK_THROWS_AS(parse(R"({"r": 0})"), fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"r": 1.2})"), fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"tau": 0.1, "h": 0.5})"), fdc::ConfigError);
  CHECK_THROWS_AS(parse(R"({"eps": 1.5})"), fdc::ConfigError);
}

TEST_CASE("g17 formatting round-trips doubles exactly") {
  // (Subnormals are excluded: std::stod raises out_of_range on ERANGE even
  // though strtod round-trips them.)
  const double vals[] = {0.0,       1.0,           0.1,      1.0 / 3.0,
                         3.141592653589793, 1e-300, 6.02e23,  -0.0049,
                         0.90000000000000002};
  for (const double v : vals) {
    const std::string s = fdc::format_g17(v);
    CAPTURE(s);
    CHECK(std::stod(s) == v);
  }
  CHECK(fdc::format_g17(0.0) == "0");
  CHECK(fdc::format_g17(1.0) == "1");
}

// ---------------------------------------------------------------------------
// End-to-end command-line behavior
// ---------------------------------------------------------------------------

TEST_CASE("cli: exit codes, outputs, overrides, and determinism") {
  const fs::path base = fs::temp_directory_path() / "fdc_cli_e2e";
  fs::remove_all(base);
  fs::create_directories(base);

  SUBCASE("simulate writes a trajectory with the documented header") {
    const fs::path cfg = base / "sim_min.json";
    write_file(cfg, R"({"modes": 3, "steps": 8, "r": 0.7, "z0": "mode-1"})");
    const fs::path out = fresh_dir(base, "sim_min_out");
    CHECK(run_cli("simulate --config " + quoted(cfg) + " --out " + quoted(out)) == 0);

    const auto lines = split_lines(read_file(out / "trajectory.csv"));
    REQUIRE(lines.size() == 10);
    CHECK(lines[0] == "t,mode_1,mode_2,mode_3");
    const auto first = split_csv(lines[1]);
    REQUIRE(first.size() == 4);
    CHECK(std::stod(first[0]) == 0.0);
    CHECK(std::stod(first[1]) == 1.0);  // initial state passes through at t = 0
    CHECK(std::stod(first[2]) == 0.0);
    const auto last = split_csv(lines[9]);
    CHECK(std::stod(last[0]) == 1.0);
    CHECK(std::stod(last[1]) > 0.0);   // decayed but positive
    CHECK(std::stod(last[1]) < 1.0);
    CHECK_FALSE(fs::exists(out / "spatial.csv"));
  }

  SUBCASE("simulate emits spatial samples on request") {
    const fs::path cfg = base / "sim_spatial.json";
    write_file(cfg,
               R"({"modes": 2, "steps": 4, "r": 0.7, "z0": "mode-1",
                   "spatial_points": 2})");
    const fs::path out = fresh_dir(base, "sim_spatial_out");
    CHECK(run_cli("simulate --config " + quoted(cfg) + " --out " + quoted(out)) == 0);
    const auto lines = split_lines(read_file(out / "spatial.csv"));
    REQUIRE(lines.size() == 11);  // header + 5 times x 2 points
    CHECK(lines[0] == "t,x,z");
    const auto row = split_csv(lines[1]);
    REQUIRE(row.size() == 3);
    CHECK(std::stod(row[1]) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  SUBCASE("invalid region exits 2 with the exact message on stderr") {
    const fs::path cfg = base / "bad_region.json";
    write_file(cfg, R"({"region": {"a": 0.9, "b": 0.2}})");
    const fs::path out = base / "bad_region_out";
    const fs::path err = base / "bad_region.stderr";
    CHECK(run_cli("simulate --config " + quoted(cfg) + " --out " + quoted(out),
                  err) == 2);
    CHECK(read_file(err) == "region: a < b required\n");
  }

  SUBCASE("missing config file and bad invocations exit 2") {
    const fs::path err = base / "missing.stderr";
    CHECK(run_cli("simulate --config " + quoted(base / "nope.json") + " --out " +
                      quoted(base / "nope_out"),
                  err) == 2);
    CHECK(read_file(err).rfind("config: cannot read file:", 0) == 0);
    CHECK(run_cli("") == 2);          // a subcommand is required
    CHECK(run_cli("simulate") == 2);  // --config/--out are required
  }

  SUBCASE("non-integrable kernel square exits 3") {
    const fs::path cfg = base / "integ.json";
    write_file(cfg,
               R"({"r": 0.3, "eps": 0, "modes": 3, "steps": 10,
                   "actuator": {"kind": "zonal", "beta1": 0, "beta2": 0.5},
                   "region": {"a": 0.25, "b": 0.75}})");
    const fs::path out = base / "integ_out";
    const fs::path err = base / "integ.stderr";
    CHECK(run_cli("gramian --config " + quoted(cfg) + " --out " + quoted(out),
                  err) == 3);
    CHECK(read_file(err).find("2(r-1) > -1") != std::string::npos);

    // The --eps override rescues the same configuration.
    const fs::path out2 = fresh_dir(base, "integ_eps_out");
    CHECK(run_cli("gramian --config " + quoted(cfg) + " --out " + quoted(out2) +
                  " --eps 0.05") == 0);
    const auto j = nlohmann::json::parse(read_file(out2 / "gramian.json"));
    CHECK(j.at("eps_used").get<double>() == 0.05);
  }

  SUBCASE("gramian reports spectrum, reachability, and optionally the matrix") {
    const fs::path cfg = base / "gram_ok.json";
    write_file(cfg,
               R"({"r": 0.7, "modes": 4, "steps": 20, "emit_matrix": true,
                   "actuator": {"kind": "zonal", "beta1": 0, "beta2": 0.5},
                   "region": {"a": 0.25, "b": 0.75}})");
    const fs::path out = fresh_dir(base, "gram_ok_out");
    CHECK(run_cli("gramian --config " + quoted(cfg) + " --out " + quoted(out)) == 0);
    const auto j = nlohmann::json::parse(read_file(out / "gramian.json"));
    CHECK(j.at("smin").get<double>() > 0.0);
    CHECK(j.at("smax").get<double>() >= j.at("smin").get<double>());
    CHECK(j.at("eps_used").get<double>() == 0.0);
    // This actuator's fourth cosine difference vanishes: mode 4 is dead.
    const auto dead = j.at("unreachable_modes").get<std::vector<int>>();
    REQUIRE(dead.size() == 1);
    CHECK(dead[0] == 4);
    REQUIRE(j.at("matrix").is_array());
    REQUIRE(j.at("matrix").size() == 4);
    CHECK(j.at("matrix")[0].size() == 4);

    // The --modes override shrinks every dependent quantity coherently.
    const fs::path out3 = fresh_dir(base, "gram_modes_out");
    CHECK(run_cli("gramian --config " + quoted(cfg) + " --out " + quoted(out3) +
                  " --modes 3") == 0);
    const auto j3 = nlohmann::json::parse(read_file(out3 / "gramian.json"));
    CHECK(j3.at("matrix").size() == 3);
    CHECK(j3.at("unreachable_modes").get<std::vector<int>>().empty());

    // Determinism: identical invocations produce byte-identical reports.
    const fs::path outa = fresh_dir(base, "gram_det_a");
    const fs::path outb = fresh_dir(base, "gram_det_b");
    CHECK(run_cli("gramian --config " + quoted(cfg) + " --out " + quoted(outa)) == 0);
    CHECK(run_cli("gramian --config " + quoted(cfg) + " --out " + quoted(outb)) == 0);
    const std::string ra = read_file(outa / "gramian.json");
    CHECK_FALSE(ra.empty());
    CHECK(ra == read_file(outb / "gramian.json"));
  }

  SUBCASE("hum steers, reports, and reruns deterministically") {
    const fs::path cfg = base / "hum_ok.json";
    write_file(cfg,
               R"({"r": 0.7, "modes": 6, "steps": 60, "zd": "mode-1",
                   "actuator": {"kind": "zonal", "beta1": 0, "beta2": 0.5},
                   "region": {"a": 0.25, "b": 0.75}})");
    const fs::path out = fresh_dir(base, "hum_ok_out");
    CHECK(run_cli("hum --config " + quoted(cfg) + " --out " + quoted(out)) == 0);

    const auto j = nlohmann::json::parse(read_file(out / "hum.json"));
    CHECK(j.at("energy").get<double>() > 0.0);
    CHECK(j.at("residual").get<double>() <= 5e-2);
    CHECK(j.at("reg").get<double>() > 0.0);
    CHECK(j.at("condition").get<double>() >= 1.0);
    CHECK(j.at("eps_window_fraction").get<double>() >= 0.0);
    CHECK_FALSE(j.contains("note"));

    const auto lines = split_lines(read_file(out / "control.csv"));
    REQUIRE(lines.size() == 62);
    CHECK(lines[0] == "t,u_star");
    CHECK(std::stod(split_csv(lines[1])[0]) == 0.0);
    CHECK(std::stod(split_csv(lines[61])[0]) == 1.0);  // tau - h with h = 0

    // The --reg override is echoed back verbatim.
    const fs::path outr = fresh_dir(base, "hum_reg_out");
    CHECK(run_cli("hum --config " + quoted(cfg) + " --out " + quoted(outr) +
                  " --reg 0.00000001") == 0);
    const auto jr = nlohmann::json::parse(read_file(outr / "hum.json"));
    CHECK(jr.at("reg").get<double>() == 1e-8);

    // Over-regularizing damps the control until the terminal state misses the
    // tolerance; the run still writes its report but signals failure.
    const fs::path outo = fresh_dir(base, "hum_overreg_out");
    CHECK(run_cli("hum --config " + quoted(cfg) + " --out " + quoted(outo) +
                  " --reg 0.0001") == 4);
    const auto jo = nlohmann::json::parse(read_file(outo / "hum.json"));
    CHECK(jo.at("reg").get<double>() == 0.0001);
    CHECK(jo.at("residual").get<double>() > 5e-2);

    // Determinism across reruns, byte for byte.
    const fs::path outa = fresh_dir(base, "hum_det_a");
    const fs::path outb = fresh_dir(base, "hum_det_b");
    CHECK(run_cli("hum --config " + quoted(cfg) + " --out " + quoted(outa)) == 0);
    CHECK(run_cli("hum --config " + quoted(cfg) + " --out " + quoted(outb)) == 0);
    CHECK(read_file(outa / "hum.json") == read_file(outb / "hum.json"));
    const std::string ca = read_file(outa / "control.csv");
    CHECK_FALSE(ca.empty());
    CHECK(ca == read_file(outb / "control.csv"));
  }

  SUBCASE("verify adds an optimality record") {
    const fs::path cfg = base / "ver_ok.json";
    write_file(cfg,
               R"({"r": 0.7, "modes": 6, "steps": 60, "zd": "mode-1",
                   "actuator": {"kind": "zonal", "beta1": 0, "beta2": 0.5},
                   "region": {"a": 0.25, "b": 0.75}})");
    const fs::path out = fresh_dir(base, "ver_ok_out");
    CHECK(run_cli("verify --config " + quoted(cfg) + " --out " + quoted(out)) == 0);
    const auto j = nlohmann::json::parse(read_file(out / "verify.json"));
    CHECK(j.at("residual").get<double>() <= 5e-2);
    CHECK_FALSE(j.at("violation").get<bool>());
    CHECK(j.at("worst_margin").get<double>() >= -1e-8);
    REQUIRE(j.at("draws").is_array());
    REQUIRE(j.at("draws").size() == 20);
    for (const auto& d : j.at("draws")) {
      CHECK(d.at("margin").get<double>() >= -1e-8);
      CHECK(d.at("feasibility").get<double>() <= 1e-8);
    }
    CHECK(fs::exists(out / "hum.json"));
    CHECK(fs::exists(out / "control.csv"));
  }

  SUBCASE("an unreachable target exits 4 and is called out in the report") {
    const fs::path cfg = base / "infeasible.json";
    write_file(cfg,
               R"({"r": 0.7, "modes": 4, "steps": 30, "zd": "mode-2",
                   "actuator": {"kind": "pointwise", "b": 0.5},
                   "region": {"a": 0.25, "b": 0.75}})");
    const fs::path out = fresh_dir(base, "infeasible_out");
    CHECK(run_cli("hum --config " + quoted(cfg) + " --out " + quoted(out)) == 4);
    const auto j = nlohmann::json::parse(read_file(out / "hum.json"));
    CHECK(j.at("residual").get<double>() > 5e-2);
    REQUIRE(j.contains("note"));
    CHECK(j.at("note").get<std::string>() ==
          "target lies entirely in modes the actuator cannot reach (zero "
          "coefficients); steering is impossible at any energy");
  }

  SUBCASE("steps can be overridden only for a uniform control") {
    const fs::path cfgc = base / "sim_const_u.json";
    write_file(cfgc, R"({"modes": 2, "steps": 4, "r": 0.7, "u": 0.5})");
    const fs::path outc = fresh_dir(base, "sim_const_u_out");
    CHECK(run_cli("simulate --config " + quoted(cfgc) + " --out " + quoted(outc) +
                  " --steps 6") == 0);
    CHECK(split_lines(read_file(outc / "trajectory.csv")).size() == 8);

    const fs::path cfga = base / "sim_array_u.json";
    write_file(cfga,
               R"({"modes": 2, "steps": 4, "r": 0.7, "u": [0, 1, 0, 1, 0]})");
    const fs::path err = base / "sim_array_u.stderr";
    CHECK(run_cli("simulate --config " + quoted(cfga) + " --out " +
                      quoted(base / "sim_array_u_out") + " --steps 8",
                  err) == 2);
    CHECK(read_file(err) ==
          "config: cannot override steps when \"u\" is an explicit array\n");
  }

  SUBCASE("a synthesized control re-fed through simulate reproduces the residual") {
    const fs::path cfg = base / "hum_rt.json";
    write_file(cfg,
               R"({"r": 0.7, "h": 0.1, "modes": 8, "steps": 100, "phi": 0.0,
                   "z0": "zero", "zd": "mode-1",
                   "actuator": {"kind": "zonal", "beta1": 0, "beta2": 0.5},
                   "region": {"a": 0.25, "b": 0.75}})");
    const fs::path out = fresh_dir(base, "hum_rt_out");
    REQUIRE(run_cli("hum --config " + quoted(cfg) + " --out " + quoted(out)) == 0);
    const double residual = nlohmann::json::parse(read_file(out / "hum.json"))
                                .at("residual")
                                .get<double>();

    // Splice the printed samples verbatim into a simulate config so the
    // round-trip is carried by the %.17g representation alone.
    const auto lines = split_lines(read_file(out / "control.csv"));
    REQUIRE(lines.size() == 102);
    std::string u_json = "[";
    for (std::size_t k = 1; k < lines.size(); ++k) {
      if (k > 1) u_json += ",";
      u_json += split_csv(lines[k])[1];
    }
    u_json += "]";
    CHECK(std::stod(split_csv(lines[101])[0]) == 0.9);  // grid ends at tau - h

    const fs::path simc = base / "sim_rt.json";
    write_file(simc,
               R"({"r": 0.7, "h": 0.1, "modes": 8, "steps": 100, "phi": 0.0,
                   "z0": "zero",
                   "actuator": {"kind": "zonal", "beta1": 0, "beta2": 0.5},
                   "u": )" + u_json + "}");
    const fs::path outs = fresh_dir(base, "sim_rt_out");
    REQUIRE(run_cli("simulate --config " + quoted(simc) + " --out " + quoted(outs)) == 0);

    const auto rows = split_lines(read_file(outs / "trajectory.csv"));
    REQUIRE(rows.size() == 102);
    const auto final_row = split_csv(rows[101]);
    REQUIRE(final_row.size() == 9);
    REQUIRE(std::stod(final_row[0]) == 1.0);
    fdc::Vec zt(8);
    for (int i = 0; i < 8; ++i) zt[i] = std::stod(final_row[i + 1]);

    const fdc::Mat G = fdc::region_gram(fdc::Region{0.25, 0.75}, 8);
    fdc::Vec zd = fdc::Vec::Zero(8);
    zd[0] = 1.0;
    const fdc::Vec e = zt - zd;
    const double num = std::sqrt(std::max(0.0, e.dot(G * e)));
    const double den = std::sqrt(std::max(0.0, zd.dot(G * zd)));
    const double re_res = num / den;
    CAPTURE(re_res);
    CAPTURE(residual);
    CHECK(std::abs(re_res - residual) <= 1e-12);
  }
}
