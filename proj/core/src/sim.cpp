#include "qlgvi/sim.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "qlgvi/errors.hpp"

namespace qlgvi {

using nlohmann::json;

namespace {

constexpr std::string_view kHeader =
    "t,x1,x2,x3,qs,qv1,qv2,qv3,p1,p2,p3,w1,w2,w3,energy,norm_err,L1,L2,L3";

json VectorJson(const Vector3& v) { return json::array({v[0], v[1], v[2]}); }

json QuaternionJson(const UnitQuaternion& q) { return json::array({q.s(), q.v()[0], q.v()[1], q.v()[2]}); }

json MatrixJson(const Matrix3& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return rows;
}

template <std::size_t N>
std::array<double, N> ReadNumbers(const json& node, std::string_view what) {
  if (!node.is_array() || node.size() != N) {
    std::ostringstream msg;
    msg << what << ": expected an array of " << N << " numbers";
    throw ConfigError(msg.str());
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!node[i].is_number()) {
      throw ConfigError(std::string(what) + ": entries must be numbers");
    }
    out[i] = node[i].get<double>();
  }
  return out;
}

Vector3 ReadVector(const json& node, std::string_view what) {
  const auto a = ReadNumbers<3>(node, what);
  return {a[0], a[1], a[2]};
}

UnitQuaternion ReadQuaternion(const json& node, std::string_view what) {
  const auto a = ReadNumbers<4>(node, what);
  try {
    return UnitQuaternion(Quaternion(a[0], a[1], a[2], a[3]));
  } catch (const DomainError& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

Matrix3 ReadMatrix(const json& node, std::string_view what) {
  if (!node.is_array() || node.size() != 3) {
    throw ConfigError(std::string(what) + ": expected 3 rows");
  }
  Matrix3 m;
  for (int i = 0; i < 3; ++i) {
    m.row(i) = ReadVector(node[i], what).transpose();
  }
  return m;
}

double ReadNumber(const json& node, std::string_view what) {
  if (!node.is_number()) {
    throw ConfigError(std::string(what) + ": expected a number");
  }
  return node.get<double>();
}

long ReadInteger(const json& node, std::string_view what) {
  if (!node.is_number_integer()) {
    throw ConfigError(std::string(what) + ": expected an integer");
  }
  return node.get<long>();
}

const json* Find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return (it == obj.end() || it->is_null()) ? nullptr : &*it;
}

template <typename T, typename Reader>
std::optional<T> ReadOptional(const json& obj, const char* key, Reader reader) {
  if (const json* node = Find(obj, key)) return reader(*node, key);
  return std::nullopt;
}

std::vector<PointMass> PresetGeometry() { return RigidBodyGeometry::ThreeBallPreset().masses(); }

json StateJson(long step, double t, const HamiltonianState& s) {
  return {{"step", step}, {"t", t},           {"x", VectorJson(s.x)},
          {"q", QuaternionJson(s.q)}, {"p", VectorJson(s.p)}, {"w", VectorJson(s.w)}};
}

void WriteRow(std::ostream& out, double t, const HamiltonianState& s, const InvariantSample& inv) {
  out << FormatDouble(t);
  auto put = [&out](double v) { out << ',' << FormatDouble(v); };
  for (int i = 0; i < 3; ++i) put(s.x[i]);
  put(s.q.s());
  for (int i = 0; i < 3; ++i) put(s.q.v()[i]);
  for (int i = 0; i < 3; ++i) put(s.p[i]);
  for (int i = 0; i < 3; ++i) put(s.w[i]);
  put(inv.energy);
  put(inv.unit_norm_error);
  for (int i = 0; i < 3; ++i) put(inv.angular_momentum[i]);
  out << '\n';
}

std::string StatusName(ExitCode code) {
  switch (code) {
    case kExitOk: return "ok";
    case kExitConfigError: return "config_error";
    case kExitSolverFailure: return "solver_failure";
    case kExitSingularity: return "singularity";
  }
  return "unknown";
}

json CheckpointJson(const RunCheckpoint& c, double h) {
  json j;
  j["state"] = StateJson(c.step, static_cast<double>(c.step) * h, c.state);
  j["warm_start"] = c.stepper.warm_start ? VectorJson(*c.stepper.warm_start) : json(nullptr);
  j["jacobian"] = c.stepper.jacobian ? MatrixJson(*c.stepper.jacobian) : json(nullptr);
  j["previous"] = c.previous ? json{{"x", VectorJson(c.previous->x)}, {"q", QuaternionJson(c.previous->q)}}
                             : json(nullptr);
  j["reference"] = {{"energy", c.reference_energy}, {"angular_momentum", VectorJson(c.reference_momentum)}};
  return j;
}

void WriteMetadata(const std::filesystem::path& path, const SimConfig& config, const RunSummary& s) {
  json meta;
  meta["config"] = ConfigToJson(config);
  meta["status"] = StatusName(s.status);
  meta["exit_code"] = static_cast<int>(s.status);
  meta["error"] = s.error;
  meta["steps"] = {{"start", s.start_step}, {"completed", s.completed_step}, {"requested", s.requested_steps}};
  meta["solver_stats"] = {{"total_iterations", s.solver_iterations},
                          {"max_iterations_per_step", s.max_iterations_per_step},
                          {"jacobian_rebuilds", s.jacobian_rebuilds}};
  meta["invariants"] = {{"reference_energy", s.checkpoint.reference_energy},
                        {"max_energy_error", s.max_energy_error},
                        {"energy_drift_slope", s.energy_drift_slope},
                        {"max_unit_norm_error", s.max_unit_norm_error},
                        {"max_momentum_error", s.max_momentum_error},
                        {"tracked_every_step", config.diagnostics}};
  meta["checkpoint"] = CheckpointJson(s.checkpoint, config.h);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write metadata file " + path.string());
  }
  out << meta.dump(2) << '\n';
}

}  // namespace

void SimConfig::Validate() const {
  RigidBodyGeometry checked(geometry);
  if (!std::isfinite(mu)) throw ConfigError("potential.mu must be finite");
  const auto count = [](bool a, bool b) { return static_cast<int>(a) + static_cast<int>(b); };
  if (count(initial.q.has_value(), initial.rotation.has_value()) != 1) {
    throw ConfigError("initial: give exactly one of \"q\" and \"R\"");
  }
  if (count(initial.p.has_value(), initial.xdot.has_value()) != 1) {
    throw ConfigError("initial: give exactly one of \"p\" and \"xdot\"");
  }
  if (count(initial.w.has_value(), initial.omega.has_value()) != 1) {
    throw ConfigError("initial: give exactly one of \"w\" and \"Omega\"");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be nonnegative");
  try {
    StepCount(t_end, h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("t_end/h: ") + e.what());
  }
  if (stride < 1) throw ConfigError("stride must be at least 1");
  if (output_path.empty()) throw ConfigError("output path is empty");
  solver.Validate();
  if (!BuildInertia(checked).IsPositiveDefinite()) {
    throw ConfigError("geometry has a singular inertia matrix");
  }
  if (initial.rotation) {
    try {
      LiftRotation(*initial.rotation);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("initial.R: ") + e.what());
    }
  }
}

SimConfig PaperPreset() {
  SimConfig c;
  c.geometry = PresetGeometry();
  c.potential = PotentialKind::kCentralGravity;
  c.mu = 1.0;
  c.initial.x = Vector3(8.0, 0.0, 0.0);
  c.initial.q = UnitQuaternion::Identity();
  c.initial.p = Vector3(1.0, 0.0, 0.0);
  c.initial.w = Vector3(1.0, 2.0, 3.0);
  c.h = 0.01;
  c.t_end = 1000.0;
  c.output_path = "trajectory.csv";
  c.stride = 100;
  return c;
}

SimConfig ConfigFromJson(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  SimConfig c;

  if (const json* g = Find(doc, "geometry")) {
    if (!g->is_array()) throw ConfigError("geometry: expected an array of balls");
    for (const json& ball : *g) {
      if (!ball.is_object() || !Find(ball, "mass") || !Find(ball, "position")) {
        throw ConfigError("geometry: each ball needs \"mass\" and \"position\"");
      }
      PointMass pm;
      pm.mass = ReadNumber(ball["mass"], "geometry.mass");
      pm.position = ReadVector(ball["position"], "geometry.position");
      if (const json* r = Find(ball, "radius")) pm.radius = ReadNumber(*r, "geometry.radius");
      c.geometry.push_back(pm);
    }
  } else {
    c.geometry = PresetGeometry();
  }

  if (const json* pot = Find(doc, "potential")) {
    if (!pot->is_object()) throw ConfigError("potential: expected an object");
    const std::string kind = Find(*pot, "kind") ? (*pot)["kind"].get<std::string>() : "central_gravity";
    if (kind == "central_gravity") {
      c.potential = PotentialKind::kCentralGravity;
    } else if (kind == "none") {
      c.potential = PotentialKind::kNone;
    } else {
      throw ConfigError("potential.kind must be \"central_gravity\" or \"none\"");
    }
    if (const json* mu = Find(*pot, "mu")) c.mu = ReadNumber(*mu, "potential.mu");
  }

  const json* init = Find(doc, "initial");
  if (!init || !init->is_object()) throw ConfigError("missing \"initial\" object");
  if (!Find(*init, "x")) throw ConfigError("initial.x is required");
  c.initial.x = ReadVector((*init)["x"], "initial.x");
  c.initial.q = ReadOptional<UnitQuaternion>(*init, "q", ReadQuaternion);
  c.initial.rotation = ReadOptional<Matrix3>(*init, "R", ReadMatrix);
  c.initial.p = ReadOptional<Vector3>(*init, "p", ReadVector);
  c.initial.xdot = ReadOptional<Vector3>(*init, "xdot", ReadVector);
  c.initial.w = ReadOptional<Vector3>(*init, "w", ReadVector);
  c.initial.omega = ReadOptional<Vector3>(*init, "Omega", ReadVector);

  if (!Find(doc, "h")) throw ConfigError("h is required");
  if (!Find(doc, "t_end")) throw ConfigError("t_end is required");
  c.h = ReadNumber(doc["h"], "h");
  c.t_end = ReadNumber(doc["t_end"], "t_end");
  if (const json* out = Find(doc, "output")) {
    if (!out->is_string()) throw ConfigError("output: expected a path string");
    c.output_path = out->get<std::string>();
  }
  if (const json* stride = Find(doc, "stride")) c.stride = ReadInteger(*stride, "stride");
  if (const json* integ = Find(doc, "integrator")) {
    const std::string kind = integ->is_string() ? integ->get<std::string>() : "";
    if (kind == "hamiltonian") {
      c.integrator = IntegratorKind::kHamiltonian;
    } else if (kind == "lagrangian") {
      c.integrator = IntegratorKind::kLagrangian;
    } else {
      throw ConfigError("integrator must be \"hamiltonian\" or \"lagrangian\"");
    }
  }
  if (const json* solver = Find(doc, "solver")) {
    if (!solver->is_object()) throw ConfigError("solver: expected an object");
    if (const json* v = Find(*solver, "tol")) c.solver.tol_residual = ReadNumber(*v, "solver.tol");
    if (const json* v = Find(*solver, "max_iter")) {
      c.solver.max_iter = static_cast<int>(ReadInteger(*v, "solver.max_iter"));
    }
    if (const json* v = Find(*solver, "fd_step")) c.solver.fd_step = ReadNumber(*v, "solver.fd_step");
    if (const json* v = Find(*solver, "jacobian_refresh_interval")) {
      c.solver.jacobian_refresh_interval =
          static_cast<int>(ReadInteger(*v, "solver.jacobian_refresh_interval"));
    }
  }
  if (const json* diag = Find(doc, "diagnostics")) {
    if (!diag->is_boolean()) throw ConfigError("diagnostics: expected a boolean");
    c.diagnostics = diag->get<bool>();
  }
  c.Validate();
  return c;
}

json ConfigToJson(const SimConfig& c) {
  json doc;
  json balls = json::array();
  for (const PointMass& pm : c.geometry) {
    balls.push_back({{"mass", pm.mass}, {"position", VectorJson(pm.position)}, {"radius", pm.radius}});
  }
  doc["geometry"] = balls;
  doc["potential"] = {{"kind", c.potential == PotentialKind::kNone ? "none" : "central_gravity"},
                      {"mu", c.mu}};
  json init;
  init["x"] = VectorJson(c.initial.x);
  if (c.initial.q) init["q"] = QuaternionJson(*c.initial.q);
  if (c.initial.rotation) init["R"] = MatrixJson(*c.initial.rotation);
  if (c.initial.p) init["p"] = VectorJson(*c.initial.p);
  if (c.initial.xdot) init["xdot"] = VectorJson(*c.initial.xdot);
  if (c.initial.w) init["w"] = VectorJson(*c.initial.w);
  if (c.initial.omega) init["Omega"] = VectorJson(*c.initial.omega);
  doc["initial"] = init;
  doc["h"] = c.h;
  doc["t_end"] = c.t_end;
  doc["output"] = c.output_path;
  doc["stride"] = c.stride;
  doc["integrator"] = c.integrator == IntegratorKind::kLagrangian ? "lagrangian" : "hamiltonian";
  doc["solver"] = {{"tol", c.solver.tol_residual},
                   {"max_iter", c.solver.max_iter},
                   {"fd_step", c.solver.fd_step},
                   {"jacobian_refresh_interval", c.solver.jacobian_refresh_interval}};
  doc["diagnostics"] = c.diagnostics;
  return doc;
}

SimConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return ConfigFromJson(doc);
}

RigidBodyModel BuildModel(const SimConfig& config) {
  RigidBodyGeometry geometry(config.geometry);
  const InertiaPair inertia = BuildInertia(geometry);
  std::shared_ptr<const PotentialField> potential;
  if (config.potential == PotentialKind::kCentralGravity) {
    potential = std::make_shared<CentralGravityPotential>(config.mu, std::move(geometry));
  } else {
    potential = std::make_shared<ZeroPotential>();
  }
  return RigidBodyModel(inertia, std::move(potential));
}

HamiltonianState InitialState(const SimConfig& config, const InertiaPair& inertia) {
  const InitialConditions& ic = config.initial;
  HamiltonianState s;
  s.x = ic.x;
  s.q = ic.q ? *ic.q : LiftRotation(*ic.rotation);
  s.p = ic.p ? *ic.p : Vector3(inertia.total_mass * *ic.xdot);
  s.w = ic.w ? *ic.w : Vector3(2.0 * (inertia.standard * *ic.omega));
  return s;
}

RunCheckpoint LoadCheckpoint(const std::filesystem::path& metadata_path) {
  std::ifstream in(metadata_path);
  if (!in) throw ConfigError("cannot open metadata file " + metadata_path.string());
  try {
    const json meta = json::parse(in);
    const json& c = meta.at("checkpoint");
    const json& st = c.at("state");
    RunCheckpoint cp{};
    cp.step = ReadInteger(st.at("step"), "checkpoint.step");
    cp.state.x = ReadVector(st.at("x"), "checkpoint.x");
    cp.state.q = ReadQuaternion(st.at("q"), "checkpoint.q");
    cp.state.p = ReadVector(st.at("p"), "checkpoint.p");
    cp.state.w = ReadVector(st.at("w"), "checkpoint.w");
    if (const json* ws = Find(c, "warm_start")) cp.stepper.warm_start = ReadVector(*ws, "checkpoint.warm_start");
    if (const json* jac = Find(c, "jacobian")) cp.stepper.jacobian = ReadMatrix(*jac, "checkpoint.jacobian");
    if (const json* prev = Find(c, "previous")) {
      cp.previous.emplace();
      cp.previous->x = ReadVector(prev->at("x"), "checkpoint.previous.x");
      cp.previous->q = ReadQuaternion(prev->at("q"), "checkpoint.previous.q");
    }
    const json& ref = c.at("reference");
    cp.reference_energy = ReadNumber(ref.at("energy"), "checkpoint.reference.energy");
    cp.reference_momentum = ReadVector(ref.at("angular_momentum"), "checkpoint.reference.angular_momentum");
    return cp;
  } catch (const json::exception& e) {
    throw ConfigError("metadata " + metadata_path.string() + ": " + e.what());
  }
}

std::filesystem::path MetadataPath(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

std::string_view TrajectoryHeader() { return kHeader; }

std::string FormatDouble(double value) {
  std::array<char, 32> buf;
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) {
    throw std::runtime_error("FormatDouble: conversion failed");
  }
  return std::string(buf.data(), end);
}

RunSummary RunExperiment(const SimConfig& config, const std::optional<RunCheckpoint>& resume) {
  config.Validate();
  const RigidBodyModel model = BuildModel(config);
  const StepperConfig stepper_config{config.h, config.solver, ResidualForm::kSimplified};
  const long total = StepCount(config.t_end, config.h);

  RunSummary summary;
  summary.requested_steps = total;
  RunCheckpoint& cp = summary.checkpoint;
  if (resume) {
    cp = *resume;
    if (cp.step > total) {
      throw ConfigError("checkpoint lies beyond t_end");
    }
  } else {
    cp.state = InitialState(config, model.inertia_pair());
    cp.reference_energy = TotalEnergy(cp.state, model);
    cp.reference_momentum = AngularMomentum(cp.state);
  }
  summary.start_step = cp.step;
  summary.completed_step = cp.step;

  const InvariantTracker tracker(model, cp.reference_energy, cp.reference_momentum);
  HamiltonianStepper hamiltonian(model, stepper_config);
  LagrangianStepper lagrangian(model, stepper_config);
  if (config.integrator == IntegratorKind::kLagrangian && cp.previous) {
    lagrangian.Restore(cp.stepper);
  } else {
    hamiltonian.Restore(cp.stepper);
  }

  const std::filesystem::path csv_path = config.output_path;
  if (csv_path.has_parent_path()) {
    std::filesystem::create_directories(csv_path.parent_path());
  }
  std::ofstream csv(csv_path);
  if (!csv) {
    throw std::runtime_error("cannot write trajectory file " + csv_path.string());
  }
  csv << kHeader << '\n';

  LinearFit drift;
  auto record = [&](long k, const HamiltonianState& s, bool force_row) {
    const double t = static_cast<double>(k) * config.h;
    const bool row = force_row || k % config.stride == 0 || k == total;
    if (!config.diagnostics && !row) return;
    const InvariantSample inv = tracker.Sample(t, s);
    const double energy_error = std::abs(inv.energy - cp.reference_energy);
    summary.max_unit_norm_error = std::max(summary.max_unit_norm_error, inv.unit_norm_error);
    summary.max_momentum_error = std::max(summary.max_momentum_error, inv.momentum_error);
    summary.max_energy_error = std::max(summary.max_energy_error, energy_error);
    if (2 * k >= total) drift.Add(t, energy_error);
    if (row) WriteRow(csv, t, s, inv);
  };

  if (cp.step < total) {
    record(cp.step, cp.state, true);
  }
  try {
    for (long k = cp.step; k < total; ++k) {
      HamiltonianState next;
      SolveReport report;
      if (config.integrator == IntegratorKind::kLagrangian && cp.previous) {
        const Configuration current{cp.state.x, cp.state.q};
        const Configuration following = lagrangian.Step(*cp.previous, current);
        const DiscreteMomenta momenta =
            RightLegendre(current.x, current.q, following.x, following.q, model, config.h);
        next = {following.x, following.q, momenta.p, momenta.w};
        report = lagrangian.last_report();
      } else {
        next = hamiltonian.Step(cp.state);
        report = hamiltonian.last_report();
      }
      summary.solver_iterations += report.iterations;
      summary.max_iterations_per_step = std::max(summary.max_iterations_per_step, report.iterations);
      summary.jacobian_rebuilds += report.jacobian_rebuilds;

      if (config.integrator == IntegratorKind::kLagrangian) {
        cp.previous = Configuration{cp.state.x, cp.state.q};
      }
      cp.state = next;
      cp.step = k + 1;
      // In Lagrangian mode every step after the bootstrap is a Lagrangian one.
      cp.stepper = config.integrator == IntegratorKind::kLagrangian ? lagrangian.Checkpoint()
                                                                    : hamiltonian.Checkpoint();
      summary.completed_step = cp.step;
      record(cp.step, cp.state, false);
    }
  } catch (const SingularityError& e) {
    summary.status = kExitSingularity;
    summary.error = e.what();
  } catch (const SolverError& e) {
    summary.status = kExitSolverFailure;
    summary.error = e.what();
  } catch (const StepSizeError& e) {
    summary.status = kExitSolverFailure;
    summary.error = e.what();
  }
  summary.energy_drift_slope = drift.Slope();
  csv.flush();
  if (!csv) {
    throw std::runtime_error("error writing trajectory file " + csv_path.string());
  }
  WriteMetadata(MetadataPath(csv_path), config, summary);
  return summary;
}

json ReportToJson(const ConvergenceReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto err = [&](const StateError& e) {
    return json{{"x", num(e.x)}, {"q", num(e.q)}, {"p", num(e.p)}, {"w", num(e.w)}, {"max", num(e.Max())}};
  };
  json j;
  j["h"] = r.h;
  j["h_reference"] = r.h_reference;
  j["errors"] = json::array();
  for (const StateError& e : r.errors) j["errors"].push_back(err(e));
  j["orders"] = json::array();
  for (std::size_t i = 0; i < r.orders.size(); ++i) {
    json o = {{"x", num(r.orders[i].x)}, {"q", num(r.orders[i].q)}, {"p", num(r.orders[i].p)},
              {"w", num(r.orders[i].w)}, {"overall", num(r.overall_orders[i])}};
    j["orders"].push_back(o);
  }
  return j;
}

ConvergenceReport RunConvergenceStudy(const SimConfig& config, std::span<const double> h_list,
                                      const std::filesystem::path& report_path) {
  config.Validate();
  const RigidBodyModel model = BuildModel(config);
  const HamiltonianState ic = InitialState(config, model.inertia_pair());
  ConvergenceReport report;
  try {
    report = ConvergenceOrderStudy(ic, model, config.solver, h_list, config.t_end);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("convergence study: ") + e.what());
  }
  if (report_path.has_parent_path()) {
    std::filesystem::create_directories(report_path.parent_path());
  }
  std::ofstream out(report_path);
  if (!out) throw std::runtime_error("cannot write report file " + report_path.string());
  json doc = ReportToJson(report);
  doc["t_end"] = config.t_end;
  out << doc.dump(2) << '\n';
  return report;
}

}  // namespace qlgvi
