// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qlgvi/diagnostics.hpp"
#include "qlgvi/integrator.hpp"
#include "qlgvi/quaternion.hpp"
#include "qlgvi/sim.hpp"

namespace {

namespace fs = std::filesystem;
using namespace qlgvi;
using qlgvi::testing::Sampler;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RigidBodyModel PresetBody() {
  const RigidBodyGeometry geometry = RigidBodyGeometry::ThreeBallPreset();
  return RigidBodyModel(BuildInertia(geometry),
                        std::make_shared<CentralGravityPotential>(1.0, geometry));
}

class Suite {
 public:
  explicit Suite(fs::path dir) : dir_(std::move(dir)) {}

  // The full preset run shared by AC1-AC3.
  const RunSummary& PresetRun() {
    if (!preset_) {
      SimConfig c = PaperPreset();
      c.output_path = (dir_ / "preset.csv").string();
      preset_ = RunExperiment(c);
      // Orthogonality of pi(q_k), sampled on the written rows.
      std::ifstream in(c.output_path);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        std::vector<double> f;
        std::size_t pos = 0;
        while (pos <= line.size()) {
          const std::size_t next = line.find(',', pos);
          f.push_back(std::stod(line.substr(pos, next - pos)));
          if (next == std::string::npos) break;
          pos = next + 1;
        }
        const Matrix3 r = AmbientRotationMatrix(Quaternion(f[4], f[5], f[6], f[7]));
        max_orthogonality_ = std::max(max_orthogonality_, (r.transpose() * r - Matrix3::Identity()).norm());
      }
    }
    return *preset_;
  }
  double max_orthogonality() const { return max_orthogonality_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::optional<RunSummary> preset_;
  double max_orthogonality_ = 0.0;
};

Outcome Ac1(Suite& suite) {
  const RunSummary& s = suite.PresetRun();
  const bool ok = s.status == kExitOk && s.completed_step == 100000 && s.max_unit_norm_error <= 1e-11 &&
                  suite.max_orthogonality() <= 1e-11;
  return {ok, Fmt("10^5 steps, max | |q| - 1 | = %.2e (<= 1e-11), max |R^T R - I|_F = %.2e",
                  s.max_unit_norm_error, suite.max_orthogonality())};
}

Outcome Ac2(Suite& suite) {
  const RunSummary& s = suite.PresetRun();
  const bool ok = s.status == kExitOk && std::abs(s.energy_drift_slope) <= 1e-10;
  return {ok, Fmt("drift slope of |E - E0| over second half = %.2e (<= 1e-10), max |E - E0| = %.2e",
                  s.energy_drift_slope, s.max_energy_error)};
}

Outcome Ac3(Suite& suite) {
  const RunSummary& s = suite.PresetRun();
  const bool ok = s.status == kExitOk && s.max_momentum_error <= 1e-10;
  return {ok, Fmt("max relative |L - L0| = %.2e (<= 1e-10)", s.max_momentum_error)};
}

Outcome Ac4(Suite&) {
  const RigidBodyModel model = PresetBody();
  const double h = 0.01;
  HamiltonianStepper stepper(model, StepperConfig{h, {}, ResidualForm::kSimplified});
  HamiltonianState a{Vector3(8, 0, 0), UnitQuaternion::Identity(), Vector3(1, 0, 0), Vector3(1, 2, 3)};
  HamiltonianState b = stepper.Step(a);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const HamiltonianState c = stepper.Step(b);
    worst = std::max(worst, ComputeDelResidual(a.x, a.q, b.x, b.q, c.x, c.q, model, h).InfNorm());
    a = b;
    b = c;
  }
  return {worst <= 1e-10, Fmt("1000 triples, max DEL residual = %.2e (<= 1e-10)", worst)};
}

Outcome Ac5(Suite&) {
  const double h = 0.01;
  double worst_theta = 0.0, worst_w = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const Vector3 j(1.0, 2.0, 3.0);
    const RigidBodyModel model(InertiaPair::FromStandard(j.asDiagonal(), 1.0), nullptr);
    const double w_mag = 1.0 + axis;
    const Vector3 w0 = w_mag * Vector3::Unit(axis);
    const double theta = 0.5 * std::asin(h * w_mag / (2.0 * j[axis]));
    HamiltonianStepper stepper(model, StepperConfig{h, {}, ResidualForm::kSimplified});
    HamiltonianState s{Vector3::Zero(), UnitQuaternion::Identity(), Vector3::Zero(), w0};
    for (int k = 0; k < 10000; ++k) {
      s = stepper.Step(s);
      worst_theta = std::max(worst_theta, (stepper.last_xi() - theta * Vector3::Unit(axis)).cwiseAbs().maxCoeff());
      worst_w = std::max(worst_w, (s.w - w0).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = worst_theta <= 1e-13 && worst_w <= 1e-13;
  return {ok, Fmt("3 axes x 10^4 steps, max |xi - theta| = %.2e (<= 1e-13), max |w - w0| = %.2e", worst_theta,
                  worst_w)};
}

Outcome Ac6(Suite&) {
  const std::vector<double> hs{4e-3, 2e-3, 1e-3};
  const Vector3 jdiag(1.0, 2.0, 3.0);
  const RigidBodyModel free_body(InertiaPair::FromStandard(jdiag.asDiagonal(), 1.0), nullptr);
  const HamiltonianState free_ic{Vector3::Zero(), UnitQuaternion::Identity(), Vector3(1, 0, 0), Vector3(1, 4, 9)};
  const RigidBodyModel gravity = PresetBody();
  const HamiltonianState gravity_ic{Vector3(2.5, 0.5, 0.0), UnitQuaternion::Identity(), Vector3(0.3, 1.8, 0.2),
                                    Vector3(1, 2, 3)};
  const ConvergenceReport a = ConvergenceOrderStudy(free_ic, free_body, {}, hs, 1.0);
  const ConvergenceReport b = ConvergenceOrderStudy(gravity_ic, gravity, {}, hs, 1.0);
  bool ok = true;
  for (double o : a.overall_orders) ok = ok && o >= 1.8 && o <= 2.2;
  for (double o : b.overall_orders) ok = ok && o >= 1.8 && o <= 2.2;
  std::string detail = "free body orders";
  for (double o : a.overall_orders) detail += Fmt(" %.3f", o);
  detail += ", central gravity orders";
  for (double o : b.overall_orders) detail += Fmt(" %.3f", o);
  return {ok, detail + " (in [1.8, 2.2])"};
}

Outcome Ac7(Suite&) {
  constexpr int kTrials = 10000;
  Sampler rng(7);
  double hom = 0, cover = 0, f_id = 0, g_id = 0, exp_log = 0, log_exp = 0, unit = 0;
  for (int i = 0; i < kTrials; ++i) {
    const UnitQuaternion q1(Quaternion::FromVector4(rng.UnitVector4()));
    const UnitQuaternion q2(Quaternion::FromVector4(rng.UnitVector4()));
    hom = std::max(hom, (RotationMatrix(q1 * q2) - RotationMatrix(q1) * RotationMatrix(q2)).norm());
    cover = std::max(cover, (RotationMatrix(-q1) - RotationMatrix(q1)).norm());

    const Vector3 v = rng.Vector(3.0);
    const Eigen::Vector4d qv = qlgvi::testing::Multiply(q1.ToVector4(), Eigen::Vector4d(0, v[0], v[1], v[2]));
    f_id = std::max(f_id, (FMatrix(q1).transpose() * v - qv).norm());
    g_id = std::max(g_id, (GMatrix(q1).transpose() * v - qv.tail<3>()).norm());

    const Vector3 xi = rng.BallVector(std::numbers::pi * (1.0 - 1e-9));
    const UnitQuaternion e = Exp(xi);
    unit = std::max(unit, std::abs(e.quaternion().Norm() - 1.0));
    exp_log = std::max(exp_log, (Log(e) - xi).norm() / std::max(1.0, xi.norm()));
    const UnitQuaternion back = Exp(Log(q1));
    log_exp = std::max(log_exp, (back.ToVector4() - q1.ToVector4()).norm());
  }
  const bool ok = hom <= 1e-12 && cover <= 1e-14 && f_id <= 1e-14 && g_id <= 1e-14 && unit <= 1e-15 &&
                  exp_log <= 1e-9 && log_exp <= 1e-14;
  std::string d = Fmt("10^4 trials each: homomorphism %.1e (1e-12), double cover %.1e (1e-14), ", hom, cover);
  d += Fmt("F %.1e, G %.1e (1e-14), ", f_id, g_id);
  d += Fmt("|exp| %.1e (1e-15), log(exp) %.1e (1e-9), exp(log) %.1e (1e-14)", unit, exp_log, log_exp);
  return {ok, d};
}

Outcome Ac8(Suite&) {
  const CentralGravityPotential potential(1.0, RigidBodyGeometry::ThreeBallPreset());
  Sampler rng(8);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Quaternion q = Quaternion::FromVector4(rng.UnitVector4());
    const Vector3 x = rng.Vector(1.0).normalized() * rng.Uniform(2.0, 50.0);
    const PotentialGradient g = potential.Gradient(x, q);
    const PotentialGradient fd = FiniteDifferenceGradient(potential, x, q);
    Eigen::Matrix<double, 7, 1> a, b;
    a << g.x, g.q;
    b << fd.x, fd.q;
    worst = std::max(worst, (a - b).norm() / a.norm());
  }
  return {worst <= 1e-6, Fmt("10^3 states, max relative gradient error = %.2e (<= 1e-6)", worst)};
}

Outcome Ac9(Suite& suite) {
  SimConfig c = PaperPreset();
  c.output_path = (suite.dir() / "rerun.csv").string();
  RunExperiment(c);
  const bool identical = Slurp(c.output_path) == Slurp(suite.dir() / "preset.csv");

  SimConfig half = PaperPreset();
  half.t_end = 500.0;
  half.output_path = (suite.dir() / "half.csv").string();
  RunExperiment(half);
  SimConfig rest = PaperPreset();
  rest.output_path = (suite.dir() / "rest.csv").string();
  const RunSummary resumed = RunExperiment(rest, LoadCheckpoint(MetadataPath(half.output_path)));
  const double diff = CompareStates(resumed.checkpoint.state, suite.PresetRun().checkpoint.state).Max();
  return {identical && diff <= 1e-13,
          std::string(identical ? "rerun byte-identical" : "rerun DIFFERS") +
              Fmt(", split-run resume at t = 500: max component difference = %.2e (<= 1e-13)", diff)};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "qlgvi_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Suite suite(dir);

  const std::vector<std::pair<const char*, std::function<Outcome(Suite&)>>> criteria{
      {"AC1 unit-norm preservation", Ac1},   {"AC2 energy stability", Ac2},
      {"AC3 momentum-map conservation", Ac3}, {"AC4 DEL/Hamiltonian equivalence", Ac4},
      {"AC5 principal-axis closed form", Ac5}, {"AC6 order of accuracy", Ac6},
      {"AC7 algebra kernel properties", Ac7}, {"AC8 gradient correctness", Ac8},
      {"AC9 determinism and resume", Ac9},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check(suite);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
