#pragma once

#include <span>
#include <vector>

#include "qlgvi/body_model.hpp"
#include "qlgvi/integrator.hpp"
#include "qlgvi/types.hpp"

namespace qlgvi {

// E = |p|^2 / 2m + (1/8) w^T J^-1 w + V(x, q).
double TotalEnergy(const HamiltonianState& state, const RigidBodyModel& model);

// Spatial angular momentum x cross p + pi(q) J Omega = x cross p + 1/2 pi(q) w.
Vector3 AngularMomentum(const HamiltonianState& state);

struct InvariantSample {
  double t = 0.0;
  double energy = 0.0;
  double unit_norm_error = 0.0;  // | |q| - 1 |
  Vector3 angular_momentum = Vector3::Zero();
  double momentum_error = 0.0;  // |L(t) - L(0)| / max(1, |L(0)|)
};

// Evaluates invariants relative to the state it was constructed with.
class InvariantTracker {
 public:
  InvariantTracker(const RigidBodyModel& model, const HamiltonianState& initial);
  // References carried over from an earlier segment of the same trajectory.
  InvariantTracker(const RigidBodyModel& model, double reference_energy,
                   const Vector3& reference_momentum);

  InvariantSample Sample(double t, const HamiltonianState& state) const;

  double initial_energy() const { return initial_energy_; }
  const Vector3& initial_momentum() const { return initial_momentum_; }

 private:
  const RigidBodyModel* model_;
  double initial_energy_;
  Vector3 initial_momentum_;
};

// Streaming least-squares fit y = a + b t.
class LinearFit {
 public:
  void Add(double t, double y);
  double Slope() const;
  long count() const { return n_; }

 private:
  long n_ = 0;
  double mean_t_ = 0.0;
  double mean_y_ = 0.0;
  double s_tt_ = 0.0;
  double s_ty_ = 0.0;
};

// Secular drift rate: least-squares slope of |E(t) - E(0)| over the final
// half of the samples.
double EnergyDriftSlope(std::span<const double> t, std::span<const double> energy, double e0);

// Per-block infinity-norm differences between two states; quaternions are
// compared up to sign.
struct StateError {
  double x = 0.0;
  double q = 0.0;
  double p = 0.0;
  double w = 0.0;

  double Max() const;
};

StateError CompareStates(const HamiltonianState& a, const HamiltonianState& b);

struct ConvergenceReport {
  std::vector<double> h;
  double h_reference = 0.0;
  std::vector<StateError> errors;  // against the reference, one per h
  // orders[i] compares h[i] and h[i+1]; NaN where either error is below the
  // roundoff floor (the discretization is exact there).
  std::vector<StateError> orders;
  std::vector<double> overall_orders;  // from StateError::Max()
};

// Integrates ic to t_end with every step in h_list and with h_min / 8 as the
// reference, then reports log2 error ratios. Requires at least three steps,
// each half of the previous, that divide t_end. Independent runs execute
// concurrently. Throws std::invalid_argument on bad input; solver failures
// propagate.
ConvergenceReport ConvergenceOrderStudy(const HamiltonianState& ic, const RigidBodyModel& model,
                                        const BroydenConfig& solver, std::span<const double> h_list,
                                        double t_end);

// Number of steps of size h that cover t_end; throws std::invalid_argument
// unless h divides t_end.
long StepCount(double t_end, double h);

}  // namespace qlgvi
