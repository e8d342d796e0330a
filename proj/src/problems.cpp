#include "rocs/problems.hpp"

#include <cmath>

namespace rocs {

OcpDefinition robot_arm() {
  OcpDefinition ocp;
  ocp.name = "robot_arm";
  ocp.n_x = 6;
  ocp.n_u = 3;
  ocp.n_b = 12;

  constexpr double L = 5.0;
  ocp.dynamics = [](const Vec& x, const Vec& u, double) {
    const double rho = x[0], phi = x[2];
    const double i_phi = (std::pow(L - rho, 3) + std::pow(rho, 3)) / 3.0;
    const double s = std::sin(phi);
    Vec dx(6);
    dx << x[3], x[4], x[5], u[0] / L, u[1] / (i_phi * s * s), u[2] / i_phi;
    return dx;
  };
  ocp.mayer = [](const Vec&, double, const Vec&, double tf) { return tf; };

  const double rho0 = 4.5, theta_f = 2.0 * M_PI / 3.0, phi0 = M_PI / 4.0;
  ocp.boundary = [=](const Vec& x0, double, const Vec& xf, double) {
    Vec b(12);
    b << x0[0] - rho0, x0[1], x0[2] - phi0, x0[3], x0[4], x0[5],  //
        xf[0] - rho0, xf[1] - theta_f, xf[2] - phi0, xf[3], xf[4], xf[5];
    return b;
  };

  ocp.x_lower = (Vec(6) << 0.0, -M_PI, 0.0, -kInf, -kInf, -kInf).finished();
  ocp.x_upper = (Vec(6) << L, M_PI, M_PI, kInf, kInf, kInf).finished();
  ocp.u_lower = Vec::Constant(3, -1.0);
  ocp.u_upper = Vec::Constant(3, 1.0);
  ocp.t0_bounds = Bound::fixed_at(0.0);
  ocp.tf_bounds = {1.0, 20.0};

  ocp.x0_value = {rho0, 0.0, phi0, 0.0, 0.0, 0.0};
  ocp.xf_value = {rho0, theta_f, phi0, 0.0, 0.0, 0.0};
  ocp.finish();
  return ocp;
}

OcpDefinition hyper_sensitive(double tf) {
  OcpDefinition ocp;
  ocp.name = "hyper_sensitive";
  ocp.n_x = 1;
  ocp.n_u = 1;
  ocp.n_b = 2;

  ocp.dynamics = [](const Vec& x, const Vec& u, double) {
    Vec dx(1);
    dx[0] = -x[0] * x[0] * x[0] + u[0];
    return dx;
  };
  ocp.lagrange = [](const Vec& x, const Vec& u, double) {
    return 0.5 * (x[0] * x[0] + u[0] * u[0]);
  };
  ocp.boundary = [](const Vec& x0, double, const Vec& xf, double) {
    Vec b(2);
    b << x0[0] - 1.5, xf[0] - 1.0;
    return b;
  };
  ocp.t0_bounds = Bound::fixed_at(0.0);
  ocp.tf_bounds = Bound::fixed_at(tf);
  ocp.x0_value = {1.5};
  ocp.xf_value = {1.0};
  ocp.finish();
  return ocp;
}

AeroModel default_aero_model() {
  AeroModel a;
  a.mass = 19050.0;
  a.gravity = 9.80665e-3;
  // Thrust tapers with altitude; drag is 1/2 rho(h) v^2 S cd with a 7.16 km
  // scale height. Constants give O(1e2) kg km/s^2 forces at flight speeds.
  a.thrust = [](double h, double) { return 180.0 * std::exp(-h / 40.0); };
  a.drag = [](double h, double v) {
    const double rho = 1.225e9 * std::exp(-h / 7.16);  // kg / km^3
    const double area = 49.24e-6;                      // km^2
    return 0.5 * rho * v * v * area * 0.031;
  };
  return a;
}

OcpDefinition supersonic_climb(const AeroModel& aero) {
  OcpDefinition ocp;
  ocp.name = "supersonic_climb";
  ocp.n_x = 3;  // altitude, speed, flight path angle
  ocp.n_u = 1;  // load factor
  ocp.n_b = 6;

  const double g = aero.gravity, m = aero.mass;
  auto thrust = aero.thrust;
  auto drag = aero.drag;
  ocp.dynamics = [=](const Vec& x, const Vec& u, double) {
    const double h = x[0], v = x[1], gam = x[2];
    Vec dx(3);
    dx << v * std::sin(gam),                                    //
        (thrust(h, v) - drag(h, v)) / m - g * std::sin(gam),    //
        g * (u[0] - std::cos(gam)) / v;
    return dx;
  };
  ocp.mayer = [](const Vec&, double, const Vec&, double tf) { return tf; };

  const double h_f = 19.995, v_0 = 0.12931, v_f = 0.29509;
  ocp.boundary = [=](const Vec& x0, double, const Vec& xf, double) {
    Vec b(6);
    b << x0[0], x0[1] - v_0, x0[2], xf[0] - h_f, xf[1] - v_f, xf[2];
    return b;
  };

  // The flight-path-angle window is a pure state bound; the tiny speed floor
  // keeps the gamma dynamics away from the v = 0 singularity.
  ocp.x_lower = (Vec(3) << -kInf, 1e-3, 0.0).finished();
  ocp.x_upper = (Vec(3) << kInf, kInf, M_PI / 2.0).finished();
  ocp.t0_bounds = Bound::fixed_at(0.0);
  ocp.tf_bounds = {10.0, 1000.0};
  ocp.x0_value = {0.0, v_0, 0.0};
  ocp.xf_value = {h_f, v_f, 0.0};
  ocp.finish();
  return ocp;
}

}  // namespace rocs
