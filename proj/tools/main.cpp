#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdc/config.hpp"
#include "fdc/controllability.hpp"
#include "fdc/errors.hpp"
#include "fdc/fracops.hpp"
#include "fdc/hum.hpp"
#include "fdc/mittag_leffler.hpp"
#include "fdc/spectral_model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::optional<int> modes;
  std::optional<int> steps;
  std::optional<double> reg;
  std::optional<double> eps;
};

void apply_overrides(fdc::ExperimentConfig& cfg, const Overrides& ov) {
  if (ov.modes) {
    const int n = *ov.modes;
    if (n < 1) throw fdc::ConfigError("config: modes must be >= 1");
    fdc::Vec z0 = fdc::Vec::Zero(n), zd = fdc::Vec::Zero(n);
    const Eigen::Index keep = std::min<Eigen::Index>(n, cfg.z0.size());
    z0.head(keep) = cfg.z0.head(keep);
    zd.head(keep) = cfg.zd.head(keep);
    cfg.z0 = z0;
    cfg.zd = zd;
    cfg.modes = n;
  }
  if (ov.steps) {
    const int m = *ov.steps;
    if (m < 1) throw fdc::ConfigError("config: steps must be >= 1");
    const bool u_const =
        cfg.u.size() == 0 || (cfg.u.array() == cfg.u[0]).all();
    if (!u_const) {
      throw fdc::ConfigError(
          "config: cannot override steps when \"u\" is an explicit array");
    }
    cfg.u = fdc::Vec::Constant(m + 1, cfg.u.size() ? cfg.u[0] : 0.0);
    cfg.steps = m;
  }
  if (ov.reg) cfg.reg = *ov.reg;
  if (ov.eps) {
    cfg.params.eps = *ov.eps;
    cfg.eps_given = true;
  }
  cfg.validate();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_simulate(const fdc::ExperimentConfig& cfg, const fs::path& out_dir) {
  fdc::ControlSignal sig;
  sig.grid = fdc::Vec::LinSpaced(cfg.steps + 1, 0.0, cfg.params.tau - cfg.params.h);
  sig.u = cfg.u;
  sig.history = cfg.history;

  std::vector<double> out_times(cfg.steps + 1);
  for (int k = 0; k <= cfg.steps; ++k) {
    out_times[k] = cfg.params.tau * k / cfg.steps;
  }
  const fdc::Trajectory traj = fdc::mild_solution(
      cfg.params, cfg.z0, cfg.actuator, sig, out_times, cfg.tol.ml);

  auto csv = open_out(out_dir / "trajectory.csv");
  csv << "t";
  for (int i = 1; i <= cfg.modes; ++i) csv << ",mode_" << i;
  csv << "\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    csv << fdc::format_g17(traj.times[k]);
    for (int i = 0; i < cfg.modes; ++i) {
      csv << "," << fdc::format_g17(traj.states(i, static_cast<Eigen::Index>(k)));
    }
    csv << "\n";
  }

  if (cfg.spatial_points > 0) {
    auto sp = open_out(out_dir / "spatial.csv");
    sp << "t,x,z\n";
    const int P = cfg.spatial_points;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      for (int jx = 1; jx <= P; ++jx) {
        const double x = static_cast<double>(jx) / (P + 1);
        double z = 0.0;
        for (int i = 0; i < cfg.modes; ++i) {
          z += traj.states(i, static_cast<Eigen::Index>(k)) *
               fdc::eigenfunction_at(i + 1, x);
        }
        sp << fdc::format_g17(traj.times[k]) << "," << fdc::format_g17(x)
           << "," << fdc::format_g17(z) << "\n";
      }
    }
  }
  return 0;
}

int cmd_gramian(const fdc::ExperimentConfig& cfg, const fs::path& out_dir) {
  const fdc::GramianReport rep = fdc::gramian(cfg.params, cfg.actuator,
                                              cfg.region, cfg.modes, cfg.tol.ml);
  json j;
  j["smin"] = rep.smin;
  j["smax"] = rep.smax;
  j["unreachable_modes"] = rep.unreachable_modes;
  j["eps_used"] = rep.eps_used;
  if (cfg.emit_matrix) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < rep.lambda.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < rep.lambda.cols(); ++k) {
        row.push_back(rep.lambda(i, k));
      }
      rows.push_back(row);
    }
    j["matrix"] = rows;
  }
  write_json(out_dir / "gramian.json", j);
  return 0;
}

void write_control_csv(const fdc::HumSolution& sol, const fs::path& out_dir) {
  auto csv = open_out(out_dir / "control.csv");
  csv << "t,u_star\n";
  for (Eigen::Index k = 0; k < sol.control.grid.size(); ++k) {
    csv << fdc::format_g17(sol.control.grid[k]) << ","
        << fdc::format_g17(sol.control.u[k]) << "\n";
  }
}

std::string infeasibility_note(const fdc::ExperimentConfig& cfg) {
  const fdc::Vec b = fdc::actuator_coeffs(cfg.actuator, cfg.modes);
  bool any_target = false;
  bool reachable_overlap = false;
  for (int i = 0; i < cfg.modes; ++i) {
    if (cfg.zd[i] != 0.0) {
      any_target = true;
      if (b[i] != 0.0) reachable_overlap = true;
    }
  }
  if (any_target && !reachable_overlap) {
    return "target lies entirely in modes the actuator cannot reach "
           "(zero coefficients); steering is impossible at any energy";
  }
  return "";
}

int cmd_hum(const fdc::ExperimentConfig& cfg, const fs::path& out_dir,
            bool with_verify) {
  const fdc::HumSolution sol = fdc::solve_hum(
      cfg.params, cfg.actuator, cfg.region, cfg.z0, cfg.zd, cfg.modes,
      cfg.steps, cfg.reg, cfg.history, cfg.tol.ml);

  write_control_csv(sol, out_dir);

  json j;
  j["energy"] = sol.energy;
  j["residual"] = sol.residual;
  j["reg"] = sol.regularization;
  j["condition"] = sol.condition;
  j["eps_window_fraction"] = sol.eps_window_fraction;
  const std::string note = infeasibility_note(cfg);
  if (!note.empty()) j["note"] = note;
  write_json(out_dir / "hum.json", j);

  bool violation = false;
  if (with_verify) {
    const fdc::VerificationRecord rec =
        fdc::verify(cfg.params, cfg.actuator, cfg.region, cfg.z0, sol, cfg.zd,
                    cfg.tol.ml);
    json vj;
    vj["residual"] = rec.residual;
    vj["worst_margin"] = rec.worst_margin;
    vj["violation"] = rec.violation;
    json draws = json::array();
    for (const auto& d : rec.draws) {
      draws.push_back(json{{"feasibility", d.feasibility}, {"margin", d.margin}});
    }
    vj["draws"] = draws;
    write_json(out_dir / "verify.json", vj);
    violation = rec.violation;
  }

  if (sol.residual > cfg.tol.residual || violation) return 4;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fdc: spectral simulation, regional controllability analysis, and "
      "minimum-energy control synthesis for a delayed fractional-order "
      "diffusion model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  Overrides ov;
  int modes_flag = 0, steps_flag = 0;
  double reg_flag = 0.0, eps_flag = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment JSON file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--modes", modes_flag, "override mode count");
    sub->add_option("--steps", steps_flag, "override time steps");
    sub->add_option("--reg", reg_flag, "override regularization");
    sub->add_option("--eps", eps_flag, "override singularity cutoff");
  };

  CLI::App* c_sim = app.add_subcommand("simulate", "integrate the mild solution");
  CLI::App* c_gram = app.add_subcommand("gramian", "assemble the regional Gramian");
  CLI::App* c_hum = app.add_subcommand("hum", "synthesize the minimum-energy control");
  CLI::App* c_ver = app.add_subcommand("verify", "synthesize, then re-simulate and test optimality");
  for (CLI::App* sub : {c_sim, c_gram, c_hum, c_ver}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (CLI::App* sub : {c_sim, c_gram, c_hum, c_ver}) {
    if (!sub->parsed()) continue;
    if (sub->count("--modes") > 0) ov.modes = modes_flag;
    if (sub->count("--steps") > 0) ov.steps = steps_flag;
    if (sub->count("--reg") > 0) ov.reg = reg_flag;
    if (sub->count("--eps") > 0) ov.eps = eps_flag;
  }

  try {
    fdc::ExperimentConfig cfg = fdc::ExperimentConfig::from_json_file(config_path);
    apply_overrides(cfg, ov);
    const fs::path out(out_dir);
    fs::create_directories(out);

    if (c_sim->parsed()) return cmd_simulate(cfg, out);
    if (c_gram->parsed()) return cmd_gramian(cfg, out);
    if (c_hum->parsed()) return cmd_hum(cfg, out, /*with_verify=*/false);
    return cmd_hum(cfg, out, /*with_verify=*/true);
  } catch (const fdc::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const fdc::IntegrabilityError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const fdc::RankDeficiencyError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
