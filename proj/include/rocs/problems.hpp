#pragma once

#include "rocs/ocp.hpp"

namespace rocs {

/// Thrust/drag supplier for the climb problem. Units follow the problem
/// statement: km, s, kg, so forces come out in kg km/s^2.
struct AeroModel {
  std::function<double(double h, double v)> thrust;
  std::function<double(double h, double v)> drag;
  double mass = 1.0;
  double gravity = 9.80665e-3;
};

/// Crude analytic stand-in: constant-lapse thrust and an exponential-
/// atmosphere quadratic drag. Qualitative only; supply measured tables for
/// quantitative climb results.
AeroModel default_aero_model();

/// Minimum-time slewing of a rigid robot arm: six states (length coordinate,
/// two angles, their rates), three torque-like controls in [-1, 1].
OcpDefinition robot_arm();

/// Fixed-horizon regulator with solution activity confined to thin layers at
/// both ends of the horizon; quadratic cost, scalar cubic dynamics.
OcpDefinition hyper_sensitive(double tf = 10000.0);

/// Minimum-time climb scaffold; plug in an AeroModel for real aerodynamics.
OcpDefinition supersonic_climb(const AeroModel& aero = default_aero_model());

}  // namespace rocs
