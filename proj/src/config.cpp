#include "fdc/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fdc/errors.hpp"

namespace fdc {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end()) {
      throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

double require_number(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) {
    throw ConfigError("config: \"" + key + "\" must be a number");
  }
  return j.at(key).get<double>();
}

int require_int(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer()) {
    throw ConfigError("config: \"" + key + "\" must be an integer");
  }
  return j.at(key).get<int>();
}

Vec parse_modal(const json& v, int modes, const std::string& key) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "zero") return Vec::Zero(modes);
    if (s.rfind("mode-", 0) == 0) {
      int k = 0;
      try {
        k = std::stoi(s.substr(5));
      } catch (...) {
        throw ConfigError("config: \"" + key + "\": malformed mode preset \"" + s + "\"");
      }
      if (k < 1 || k > modes) {
        throw ConfigError("config: \"" + key + "\": mode index out of range");
      }
      Vec out = Vec::Zero(modes);
      out[k - 1] = 1.0;
      return out;
    }
    throw ConfigError("config: \"" + key + "\": expected \"zero\", \"mode-k\", or an array");
  }
  if (v.is_array()) {
    if (static_cast<int>(v.size()) > modes) {
      throw ConfigError("config: \"" + key + "\": more coefficients than modes");
    }
    Vec out = Vec::Zero(modes);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError("config: \"" + key + "\": array entries must be numbers");
      }
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }
  throw ConfigError("config: \"" + key + "\": expected \"zero\", \"mode-k\", or an array");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(
      j,
      {"r", "tau", "h", "eps", "modes", "steps", "actuator", "region", "z0",
       "zd", "phi", "u", "reg", "tolerances", "emit_matrix", "spatial_points"},
      "the top-level object");

  ExperimentConfig cfg;
  if (j.contains("r")) cfg.params.r = require_number(j, "r");
  if (j.contains("tau")) cfg.params.tau = require_number(j, "tau");
  if (j.contains("h")) cfg.params.h = require_number(j, "h");
  if (j.contains("eps")) {
    cfg.params.eps = require_number(j, "eps");
    cfg.eps_given = true;
  }
  if (j.contains("modes")) cfg.modes = require_int(j, "modes");
  if (j.contains("steps")) cfg.steps = require_int(j, "steps");

  if (j.contains("actuator")) {
    const json& a = j.at("actuator");
    if (!a.is_object() || !a.contains("kind") || !a.at("kind").is_string()) {
      throw ConfigError("config: actuator must be an object with a \"kind\"");
    }
    const std::string kind = a.at("kind").get<std::string>();
    if (kind == "zonal") {
      reject_unknown_keys(a, {"kind", "beta1", "beta2"}, "actuator");
      if (!a.contains("beta1") || !a.contains("beta2")) {
        throw ConfigError("config: zonal actuator requires beta1 and beta2");
      }
      cfg.actuator = Actuator::zonal(require_number(a, "beta1"),
                                     require_number(a, "beta2"));
    } else if (kind == "pointwise") {
      reject_unknown_keys(a, {"kind", "b"}, "actuator");
      if (!a.contains("b")) {
        throw ConfigError("config: pointwise actuator requires b");
      }
      cfg.actuator = Actuator::pointwise(require_number(a, "b"));
    } else {
      throw ConfigError("config: actuator kind must be \"zonal\" or \"pointwise\"");
    }
  }

  if (j.contains("region")) {
    const json& rg = j.at("region");
    if (!rg.is_object()) throw ConfigError("config: region must be an object");
    reject_unknown_keys(rg, {"a", "b"}, "region");
    if (!rg.contains("a") || !rg.contains("b")) {
      throw ConfigError("config: region requires a and b");
    }
    cfg.region = Region{require_number(rg, "a"), require_number(rg, "b")};
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) throw ConfigError("config: tolerances must be an object");
    reject_unknown_keys(t, {"ml", "residual", "controllability"}, "tolerances");
    if (t.contains("ml")) cfg.tol.ml = require_number(t, "ml");
    if (t.contains("residual")) cfg.tol.residual = require_number(t, "residual");
    if (t.contains("controllability")) {
      cfg.tol.controllability = require_number(t, "controllability");
    }
  }

  if (j.contains("reg")) cfg.reg = require_number(j, "reg");
  if (j.contains("emit_matrix")) {
    if (!j.at("emit_matrix").is_boolean()) {
      throw ConfigError("config: \"emit_matrix\" must be a boolean");
    }
    cfg.emit_matrix = j.at("emit_matrix").get<bool>();
  }
  if (j.contains("spatial_points")) {
    cfg.spatial_points = require_int(j, "spatial_points");
    if (cfg.spatial_points < 0) {
      throw ConfigError("config: \"spatial_points\" must be >= 0");
    }
  }

  if (cfg.modes < 1) throw ConfigError("config: modes must be >= 1");
  if (cfg.steps < 1) throw ConfigError("config: steps must be >= 1");

  cfg.z0 = j.contains("z0") ? parse_modal(j.at("z0"), cfg.modes, "z0")
                            : Vec::Zero(cfg.modes);
  cfg.zd = j.contains("zd") ? parse_modal(j.at("zd"), cfg.modes, "zd")
                            : Vec::Zero(cfg.modes);

  if (j.contains("phi")) {
    const json& ph = j.at("phi");
    if (ph.is_number()) {
      const double v = ph.get<double>();
      if (cfg.params.h > 0.0) {
        cfg.history = History::constant(cfg.params.h, v);
      } else if (v != 0.0) {
        throw ConfigError("config: \"phi\": a control history requires h > 0");
      }
    } else if (ph.is_array()) {
      if (cfg.params.h <= 0.0) {
        throw ConfigError("config: \"phi\": a control history requires h > 0");
      }
      if (ph.size() < 2) {
        throw ConfigError("config: \"phi\": array needs at least 2 samples");
      }
      History hist;
      hist.grid = Vec::LinSpaced(static_cast<Eigen::Index>(ph.size()),
                                 -cfg.params.h, 0.0);
      hist.vals = Vec(static_cast<Eigen::Index>(ph.size()));
      for (std::size_t i = 0; i < ph.size(); ++i) {
        if (!ph[i].is_number()) {
          throw ConfigError("config: \"phi\": array entries must be numbers");
        }
        hist.vals[static_cast<Eigen::Index>(i)] = ph[i].get<double>();
      }
      cfg.history = hist;
    } else {
      throw ConfigError("config: \"phi\": expected a number or an array");
    }
  }

  if (j.contains("u")) {
    const json& uu = j.at("u");
    if (uu.is_number()) {
      cfg.u = Vec::Constant(cfg.steps + 1, uu.get<double>());
    } else if (uu.is_array()) {
      if (static_cast<int>(uu.size()) != cfg.steps + 1) {
        throw ConfigError("config: \"u\": array must carry steps + 1 samples");
      }
      cfg.u = Vec(static_cast<Eigen::Index>(uu.size()));
      for (std::size_t i = 0; i < uu.size(); ++i) {
        if (!uu[i].is_number()) {
          throw ConfigError("config: \"u\": array entries must be numbers");
        }
        cfg.u[static_cast<Eigen::Index>(i)] = uu[i].get<double>();
      }
    } else {
      throw ConfigError("config: \"u\": expected a number or an array");
    }
  } else {
    cfg.u = Vec::Zero(cfg.steps + 1);
  }

  // An unset eps defaults to the guarded cutoff when the kernel square is
  // otherwise non-integrable (r <= 1/2); an explicit eps is always honored.
  if (!cfg.eps_given && cfg.params.r <= 0.5 && cfg.params.r > 0.0 &&
      cfg.params.tau > cfg.params.h) {
    cfg.params.eps = 0.05 * (cfg.params.tau - cfg.params.h);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void ExperimentConfig::validate() const {
  params.validate();
  if (modes < 1) throw ConfigError("config: modes must be >= 1");
  if (modes > 512) throw ConfigError("config: modes capped at 512");
  if (steps < 1) throw ConfigError("config: steps must be >= 1");
  if (steps > 200000) throw ConfigError("config: steps capped at 200000");
  if (!actuator.valid()) {
    throw ConfigError("actuator: invalid geometry (zonal needs 0 <= beta1 < "
                      "beta2 <= 1; pointwise needs 0 < b < 1)");
  }
  if (!region.valid()) throw ConfigError("region: a < b required");
  if (z0.size() != modes || zd.size() != modes) {
    throw ConfigError("config: state vectors must carry exactly \"modes\" entries");
  }
  if (u.size() != 0 && u.size() != steps + 1) {
    throw ConfigError("config: \"u\": array must carry steps + 1 samples");
  }
  if (!(tol.ml > 0.0) || !(tol.residual > 0.0) || !(tol.controllability >= 0.0)) {
    throw ConfigError("config: tolerances must be positive");
  }
  if (reg != -1.0 && !(reg >= 0.0)) {
    throw ConfigError("config: reg must be >= 0");
  }
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace fdc
