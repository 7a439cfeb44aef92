// qlgvi: command-line driver for the quaternion Lie group variational integrator.
//
//   qlgvi run --config PATH [--preset paper] [--h X] [--t-end X] [--out PATH]
//             [--stride N] [--integrator hamiltonian|lagrangian] [--resume META]
//   qlgvi converge --config PATH --h-list a,b,c [--t-end X] [--report PATH]
//   qlgvi validate --config PATH
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 singularity.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qlgvi/diagnostics.hpp"
#include "qlgvi/errors.hpp"
#include "qlgvi/sim.hpp"

namespace {

using nlohmann::json;

struct SourceOptions {
  std::string config_path;
  std::string preset;
  std::optional<double> h;
  std::optional<double> t_end;
  std::string out;
  std::optional<long> stride;
  std::string integrator;
};

void AddSourceOptions(CLI::App* cmd, SourceOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--preset", o.preset, "Start from a built-in preset")->check(CLI::IsMember({"paper"}));
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qlgvi::ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw qlgvi::ConfigError("config " + path + ": " + e.what());
  }
}

// Preset first, then the config file merged over it, then command-line flags.
qlgvi::SimConfig Resolve(const SourceOptions& o) {
  if (o.config_path.empty() && o.preset.empty()) {
    throw qlgvi::ConfigError("give --config PATH and/or --preset paper");
  }
  json doc = o.preset.empty() ? json::object() : qlgvi::ConfigToJson(qlgvi::PaperPreset());
  if (!o.config_path.empty()) {
    const json file = ReadJsonFile(o.config_path);
    if (!file.is_object()) throw qlgvi::ConfigError("config must be a JSON object");
    doc.merge_patch(file);
  }
  if (o.h) doc["h"] = *o.h;
  if (o.t_end) doc["t_end"] = *o.t_end;
  if (!o.out.empty()) doc["output"] = o.out;
  if (o.stride) doc["stride"] = *o.stride;
  if (!o.integrator.empty()) doc["integrator"] = o.integrator;
  return qlgvi::ConfigFromJson(doc);
}

int Run(const SourceOptions& o, const std::string& resume_path) {
  const qlgvi::SimConfig config = Resolve(o);
  std::optional<qlgvi::RunCheckpoint> resume;
  if (!resume_path.empty()) resume = qlgvi::LoadCheckpoint(resume_path);
  const qlgvi::RunSummary s = qlgvi::RunExperiment(config, resume);

  std::cout << "trajectory:          " << config.output_path << '\n'
            << "metadata:            " << qlgvi::MetadataPath(config.output_path).string() << '\n'
            << "steps:               " << s.completed_step << " / " << s.requested_steps << '\n'
            << "solver iterations:   " << s.solver_iterations << " (max " << s.max_iterations_per_step
            << " per step)\n"
            << "max |q| error:       " << s.max_unit_norm_error << '\n'
            << "max energy error:    " << s.max_energy_error << '\n'
            << "energy drift slope:  " << s.energy_drift_slope << '\n'
            << "max momentum error:  " << s.max_momentum_error << '\n';
  if (s.status != qlgvi::kExitOk) {
    std::cerr << "qlgvi: stopped at step " << s.completed_step << ": " << s.error << '\n'
              << "qlgvi: last good state saved in " << qlgvi::MetadataPath(config.output_path).string()
              << '\n';
  }
  return s.status;
}

int Converge(const SourceOptions& o, const std::vector<double>& h_list, std::string report_path) {
  const qlgvi::SimConfig config = Resolve(o);
  if (report_path.empty()) {
    std::filesystem::path p = config.output_path;
    p.replace_extension(".convergence.json");
    report_path = p.string();
  }
  const qlgvi::ConvergenceReport r = qlgvi::RunConvergenceStudy(config, h_list, report_path);
  std::printf("%12s %12s %12s %12s %12s\n", "h", "err_x", "err_q", "err_p", "err_w");
  for (std::size_t i = 0; i < r.h.size(); ++i) {
    const auto& e = r.errors[i];
    std::printf("%12.4e %12.4e %12.4e %12.4e %12.4e\n", r.h[i], e.x, e.q, e.p, e.w);
  }
  std::printf("observed orders:\n");
  for (std::size_t i = 0; i < r.orders.size(); ++i) {
    const auto& k = r.orders[i];
    std::printf("%12.4e %12.4f %12.4f %12.4f %12.4f   overall %.4f\n", r.h[i], k.x, k.q, k.p, k.w,
                r.overall_orders[i]);
  }
  std::cout << "report: " << report_path << '\n';
  return qlgvi::kExitOk;
}

int Validate(const SourceOptions& o) {
  const qlgvi::SimConfig config = Resolve(o);
  const qlgvi::RigidBodyModel model = qlgvi::BuildModel(config);
  const qlgvi::HamiltonianState s0 = qlgvi::InitialState(config, model.inertia_pair());
  const qlgvi::Vector3 l0 = qlgvi::AngularMomentum(s0);
  std::cout << std::setprecision(17) << "config ok\n"
            << "mass:              " << model.mass() << '\n'
            << "inertia J diag:    " << model.inertia().diagonal().transpose() << '\n'
            << "steps:             " << qlgvi::StepCount(config.t_end, config.h) << '\n'
            << "initial energy:    " << qlgvi::TotalEnergy(s0, model) << '\n'
            << "initial momentum:  " << l0.transpose() << '\n';
  return qlgvi::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie group variational integrator for rigid bodies in the unit quaternion representation"};
  app.require_subcommand(1);

  SourceOptions run_opts;
  std::string resume_path;
  CLI::App* run = app.add_subcommand("run", "Integrate a trajectory and write CSV + metadata");
  run->set_help_flag("--help", "Print this help message and exit");
  AddSourceOptions(run, run_opts);
  run->add_option("--h", run_opts.h, "Time step");
  run->add_option("--t-end", run_opts.t_end, "Final time");
  run->add_option("--out", run_opts.out, "Trajectory CSV path");
  run->add_option("--stride", run_opts.stride, "Write every N-th step")->check(CLI::PositiveNumber);
  run->add_option("--integrator", run_opts.integrator, "hamiltonian or lagrangian")
      ->check(CLI::IsMember({"hamiltonian", "lagrangian"}));
  run->add_option("--resume", resume_path, "Continue from the checkpoint in a metadata file");

  SourceOptions conv_opts;
  std::vector<double> h_list;
  std::string report_path;
  CLI::App* converge = app.add_subcommand("converge", "Observed order of accuracy study");
  AddSourceOptions(converge, conv_opts);
  converge->add_option("--h-list", h_list, "Step sizes, each half the previous")
      ->delimiter(',')
      ->required();
  converge->add_option("--t-end", conv_opts.t_end, "Final time");
  converge->add_option("--report", report_path, "Report JSON path");

  SourceOptions val_opts;
  CLI::App* validate = app.add_subcommand("validate", "Check a configuration and print its invariants");
  AddSourceOptions(validate, val_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return qlgvi::kExitConfigError;
  }

  try {
    if (*run) return Run(run_opts, resume_path);
    if (*converge) return Converge(conv_opts, h_list, report_path);
    if (*validate) return Validate(val_opts);
  } catch (const qlgvi::ConfigError& e) {
    std::cerr << "qlgvi: configuration error: " << e.what() << '\n';
    return qlgvi::kExitConfigError;
  } catch (const qlgvi::SingularityError& e) {
    std::cerr << "qlgvi: singular configuration: " << e.what() << '\n';
    return qlgvi::kExitSingularity;
  } catch (const qlgvi::SolverError& e) {
    std::cerr << "qlgvi: solver failure: " << e.what() << '\n';
    return qlgvi::kExitSolverFailure;
  } catch (const qlgvi::StepSizeError& e) {
    std::cerr << "qlgvi: solver failure: " << e.what() << '\n';
    return qlgvi::kExitSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "qlgvi: " << e.what() << '\n';
    return 1;
  }
  return qlgvi::kExitOk;
}
