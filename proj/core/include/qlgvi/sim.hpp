#pragma once

// Simulation driver: JSON configuration, the three-ball orbital preset,
// trajectory CSV output with an adjacent metadata JSON, checkpoint resume and
// convergence studies.
//
// Config document (all vectors are arrays, quaternions [s, v1, v2, v3]):
//   {
//     "geometry":   [{"mass": 1, "position": [1, 0, 0], "radius": 0.1}, ...],
//     "potential":  {"kind": "central_gravity" | "none", "mu": 1},
//     "initial":    {"x": [..], "q": [..] | "R": [[..], [..], [..]],
//                    "p": [..] | "xdot": [..], "w": [..] | "Omega": [..]},
//     "h": 0.01, "t_end": 1000, "output": "trajectory.csv", "stride": 100,
//     "integrator": "hamiltonian" | "lagrangian",
//     "solver": {"tol": 1e-14, "max_iter": 50, "fd_step": 1e-7,
//                "jacobian_refresh_interval": 0},
//     "diagnostics": true
//   }
// "geometry" defaults to the three-ball preset and "potential" to central
// gravity with mu = 1; "initial", "h" and "t_end" are required.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qlgvi/body_model.hpp"
#include "qlgvi/diagnostics.hpp"
#include "qlgvi/integrator.hpp"
#include "qlgvi/solver.hpp"

namespace qlgvi {

enum class PotentialKind { kNone, kCentralGravity };
enum class IntegratorKind { kHamiltonian, kLagrangian };

// Process exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitSolverFailure = 3,
  kExitSingularity = 4,
};

// Exactly one member of each alternative pair must be set.
struct InitialConditions {
  Vector3 x = Vector3::Zero();
  std::optional<UnitQuaternion> q;
  std::optional<Matrix3> rotation;
  std::optional<Vector3> p;
  std::optional<Vector3> xdot;
  std::optional<Vector3> w;
  std::optional<Vector3> omega;
};

struct SimConfig {
  std::vector<PointMass> geometry;
  PotentialKind potential = PotentialKind::kCentralGravity;
  double mu = 1.0;
  InitialConditions initial;
  double h = 0.01;
  double t_end = 0.0;
  std::string output_path = "trajectory.csv";
  long stride = 100;
  IntegratorKind integrator = IntegratorKind::kHamiltonian;
  BroydenConfig solver;
  bool diagnostics = true;

  // Throws ConfigError.
  void Validate() const;
};

// Three unit balls (radius 0.1, circumradius 1) in a central field with
// mu = 1: x0 = (8, 0, 0), q0 = identity, p0 = (1, 0, 0), w0 = (1, 2, 3),
// h = 0.01 over [0, 1000].
SimConfig PaperPreset();

// Throws ConfigError on malformed or inconsistent documents.
SimConfig ConfigFromJson(const nlohmann::json& doc);
nlohmann::json ConfigToJson(const SimConfig& config);
SimConfig LoadConfig(const std::filesystem::path& path);

RigidBodyModel BuildModel(const SimConfig& config);
HamiltonianState InitialState(const SimConfig& config, const InertiaPair& inertia);

// Everything needed to continue a run exactly where it stopped.
struct RunCheckpoint {
  long step = 0;
  HamiltonianState state;
  StepperCheckpoint stepper;
  // Previous configuration, for the two-step Lagrangian integrator.
  std::optional<Configuration> previous;
  // Invariants of the original initial state.
  double reference_energy = 0.0;
  Vector3 reference_momentum = Vector3::Zero();
};

// Reads the checkpoint section of a metadata file written by RunExperiment.
RunCheckpoint LoadCheckpoint(const std::filesystem::path& metadata_path);

struct RunSummary {
  ExitCode status = kExitOk;
  std::string error;
  long start_step = 0;
  long completed_step = 0;
  long requested_steps = 0;
  std::int64_t solver_iterations = 0;
  int max_iterations_per_step = 0;
  long jacobian_rebuilds = 0;
  double max_unit_norm_error = 0.0;
  double max_momentum_error = 0.0;
  double max_energy_error = 0.0;
  double energy_drift_slope = 0.0;
  RunCheckpoint checkpoint;  // last good state
};

// `trajectory.csv` -> `trajectory.meta.json`.
std::filesystem::path MetadataPath(const std::filesystem::path& csv_path);

// Column header of the trajectory CSV.
std::string_view TrajectoryHeader();

// Shortest decimal representation that parses back to the same double.
std::string FormatDouble(double value);

// Integrates the configured trajectory, writing stride-thinned CSV rows and
// the metadata file. Solver failures and singularities are reported through
// the summary status, with the last good state saved. Invariants are checked
// at every step when config.diagnostics is set. Throws ConfigError for
// invalid configurations and std::runtime_error for I/O failures.
RunSummary RunExperiment(const SimConfig& config, const std::optional<RunCheckpoint>& resume = {});

// Convergence study from the configured initial state to config.t_end,
// written as JSON to report_path.
ConvergenceReport RunConvergenceStudy(const SimConfig& config, std::span<const double> h_list,
                                      const std::filesystem::path& report_path);

nlohmann::json ReportToJson(const ConvergenceReport& report);

}  // namespace qlgvi
