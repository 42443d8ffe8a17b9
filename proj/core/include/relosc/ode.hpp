#pragma once

// Deterministic adaptive integration of the first-order Dirac system
// u' = J (lambda*1l - phi(x)) u and of scalar angle equations, with dense
// output on a fixed stride and a continuity contract on the attached
// Prufer angle: the recorded theta never jumps by pi/2 or more between
// adjacent nodes (steps violating this are rejected and retried).

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relosc/pauli.hpp"
#include "relosc/potential.hpp"

namespace relosc {

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = 0.0;      // 0 -> no limit beyond the range
  double dense_stride = 0.0;  // 0 -> 1/256 of the integration range
};

struct IntegrationError : std::runtime_error {
  double where;
  IntegrationError(const std::string& msg, double x)
      : std::runtime_error(msg + " (at x = " + std::to_string(x) + ")"), where(x) {}
};

// A sampled solution with Prufer data: u1 = rho sin(theta), u2 = rho cos(theta),
// theta unwrapped along the solution.  Grid is strictly increasing regardless of
// the integration direction.
struct Trajectory {
  std::vector<double> x;
  std::vector<Vec2> u;
  std::vector<double> rho;
  std::vector<double> theta;
  bool launched_at_front = true;  // initial data at x.front() (else at x.back())

  std::size_t size() const { return x.size(); }
  Vec2 value_at(double xq) const;
  double theta_at(double xq) const;
};

struct ScalarAngle {
  std::vector<double> x;
  std::vector<double> angle;

  double at(double xq) const;
  double front() const { return angle.front(); }
  double back() const { return angle.back(); }
};

inline Vec2 dirac_rhs(const Potential& P, double lambda, double x, Vec2 u) {
  return dirac_rhs(P(x), lambda, u);
}

// Integrates tau u = lambda u from (x0, u0) to x1 (either direction).
// theta0, when given, anchors the Prufer angle branch; it must be consistent
// with the direction of u0.  Defaults to atan2(u0.x, u0.y).
Trajectory integrate_dirac(const Potential& P, double lambda, double x0, Vec2 u0,
                           double x1, const IntegratorConfig& cfg = {},
                           std::optional<double> theta0 = std::nullopt);

// Integrates angle' = slope(x, angle); per-step change is kept below pi/2.
ScalarAngle integrate_scalar_angle(const std::function<double(double, double)>& slope,
                                   double x0, double angle0, double x1,
                                   const IntegratorConfig& cfg = {},
                                   const std::vector<double>& breakpoints = {});

// Joint integration of several Dirac channels (each with its own potential and
// spectral parameter) plus scalar quadrature channels on one shared grid.
struct JointSpec {
  struct Channel {
    const Potential* pot = nullptr;
    double lambda = 0.0;
    Vec2 u0;
    std::optional<double> theta0;
  };
  std::vector<Channel> dirac;
  // s' = integrand(x, current values of all dirac channels); s(x_start) = 0.
  std::vector<std::function<double(double, const std::vector<Vec2>&)>> quadratures;
};

struct JointResult {
  std::vector<double> x;                    // shared grid, increasing
  std::vector<Trajectory> dirac;            // aligned to x
  std::vector<std::vector<double>> quad;    // aligned to x
};

JointResult integrate_joint(const JointSpec& spec, double x0, double x1,
                            const IntegratorConfig& cfg = {});

// Prufer angle of a solution of tau u = lambda u transported from
// (x_from, theta_from) to x_to; overflow-safe for long ranges and spectral
// parameters inside essential gaps (only the angle is integrated).
double prufer_theta_end(const Potential& P, double lambda, double x_from,
                        double theta_from, double x_to,
                        const IntegratorConfig& cfg = {});

// Full sampled Prufer angle, same equation as prufer_theta_end.
ScalarAngle prufer_angle(const Potential& P, double lambda, double x_from,
                         double theta_from, double x_to,
                         const IntegratorConfig& cfg = {});

}  // namespace relosc
