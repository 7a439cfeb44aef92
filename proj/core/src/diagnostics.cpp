#include "qlgvi/diagnostics.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace qlgvi {
namespace {

// Errors below this are treated as exact when forming order estimates.
constexpr double kErrorFloor = 1e-13;

double Order(double coarse, double fine, double ratio) {
  if (!(coarse > kErrorFloor) || !(fine > kErrorFloor)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::log(coarse / fine) / std::log(ratio);
}

HamiltonianState Integrate(const HamiltonianState& ic, const RigidBodyModel& model,
                           const BroydenConfig& solver, double h, long steps) {
  HamiltonianStepper stepper(model, StepperConfig{h, solver, ResidualForm::kSimplified});
  HamiltonianState s = ic;
  for (long k = 0; k < steps; ++k) {
    s = stepper.Step(s);
  }
  return s;
}

}  // namespace

double TotalEnergy(const HamiltonianState& state, const RigidBodyModel& model) {
  const double translational = state.p.squaredNorm() / (2.0 * model.mass());
  const double rotational = state.w.dot(model.inverse_inertia() * state.w) / 8.0;
  return translational + rotational + model.potential().Value(state.x, state.q);
}

Vector3 AngularMomentum(const HamiltonianState& state) {
  return state.x.cross(state.p) + 0.5 * Rotate(state.q, state.w);
}

InvariantTracker::InvariantTracker(const RigidBodyModel& model, const HamiltonianState& initial)
    : model_(&model),
      initial_energy_(TotalEnergy(initial, model)),
      initial_momentum_(AngularMomentum(initial)) {}

InvariantTracker::InvariantTracker(const RigidBodyModel& model, double reference_energy,
                                   const Vector3& reference_momentum)
    : model_(&model), initial_energy_(reference_energy), initial_momentum_(reference_momentum) {}

InvariantSample InvariantTracker::Sample(double t, const HamiltonianState& state) const {
  InvariantSample s;
  s.t = t;
  s.energy = TotalEnergy(state, *model_);
  s.unit_norm_error = std::abs(state.q.NormError());
  s.angular_momentum = AngularMomentum(state);
  s.momentum_error = (s.angular_momentum - initial_momentum_).norm() /
                     std::max(1.0, initial_momentum_.norm());
  return s;
}

void LinearFit::Add(double t, double y) {
  ++n_;
  const double dt = t - mean_t_;
  mean_t_ += dt / static_cast<double>(n_);
  mean_y_ += (y - mean_y_) / static_cast<double>(n_);
  s_tt_ += dt * (t - mean_t_);
  s_ty_ += dt * (y - mean_y_);
}

double LinearFit::Slope() const { return s_tt_ > 0.0 ? s_ty_ / s_tt_ : 0.0; }

double EnergyDriftSlope(std::span<const double> t, std::span<const double> energy, double e0) {
  if (t.size() != energy.size()) {
    throw std::invalid_argument("time and energy series differ in length");
  }
  LinearFit fit;
  for (std::size_t i = t.size() / 2; i < t.size(); ++i) {
    fit.Add(t[i], std::abs(energy[i] - e0));
  }
  return fit.Slope();
}

double StateError::Max() const { return std::max({x, q, p, w}); }

StateError CompareStates(const HamiltonianState& a, const HamiltonianState& b) {
  const Vector4 qa = a.q.ToVector4();
  const Vector4 qb = b.q.ToVector4();
  return {(a.x - b.x).cwiseAbs().maxCoeff(),
          std::min((qa - qb).cwiseAbs().maxCoeff(), (qa + qb).cwiseAbs().maxCoeff()),
          (a.p - b.p).cwiseAbs().maxCoeff(), (a.w - b.w).cwiseAbs().maxCoeff()};
}

long StepCount(double t_end, double h) {
  if (!(h > 0.0) || !(t_end >= 0.0)) {
    throw std::invalid_argument("step count needs h > 0 and t_end >= 0");
  }
  const double n = std::round(t_end / h);
  if (std::abs(n * h - t_end) > 1e-9 * std::max(1.0, t_end)) {
    throw std::invalid_argument("time step does not divide the integration interval");
  }
  return static_cast<long>(n);
}

ConvergenceReport ConvergenceOrderStudy(const HamiltonianState& ic, const RigidBodyModel& model,
                                        const BroydenConfig& solver, std::span<const double> h_list,
                                        double t_end) {
  if (h_list.size() < 3) {
    throw std::invalid_argument("convergence study needs at least three step sizes");
  }
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (std::abs(h_list[i - 1] / h_list[i] - 2.0) > 1e-9) {
      throw std::invalid_argument("each step size must be half of the previous one");
    }
  }
  if (!(t_end > 0.0)) {
    throw std::invalid_argument("convergence study needs t_end > 0");
  }

  ConvergenceReport report;
  report.h.assign(h_list.begin(), h_list.end());
  report.h_reference = h_list.back() / 8.0;

  std::vector<std::future<HamiltonianState>> runs;
  for (double h : report.h) {
    const long n = StepCount(t_end, h);
    runs.push_back(std::async(std::launch::async, Integrate, ic, model, solver, h, n));
  }
  const HamiltonianState reference =
      Integrate(ic, model, solver, report.h_reference, StepCount(t_end, report.h_reference));

  for (auto& run : runs) {
    report.errors.push_back(CompareStates(run.get(), reference));
  }
  for (std::size_t i = 0; i + 1 < report.errors.size(); ++i) {
    const StateError& c = report.errors[i];
    const StateError& f = report.errors[i + 1];
    const double ratio = report.h[i] / report.h[i + 1];
    report.orders.push_back(
        {Order(c.x, f.x, ratio), Order(c.q, f.q, ratio), Order(c.p, f.p, ratio), Order(c.w, f.w, ratio)});
    report.overall_orders.push_back(Order(c.Max(), f.Max(), ratio));
  }
  return report;
}

}  // namespace qlgvi
