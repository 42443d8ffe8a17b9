#pragma once

// Wronskians of solution pairs, relative Prufer angles in both frames, weighted
// sign-flip counting, flip classification, second solutions, the Kepler
// transformation and period averaging.
//
// Counting convention: for a pair (u0, u1) the angle is Delta_{1,0} = theta_{u1}
// - theta_{u0} (or an equivalent Prufer angle for W(u0,u1)), and the weighted
// flip count over [c,d] is ceil(psi(d)/pi) - floor(psi(c)/pi) - 1.

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "relosc/ode.hpp"
#include "relosc/pauli.hpp"
#include "relosc/potential.hpp"

namespace relosc {

struct RelativeAngle {
  std::vector<double> x;
  std::vector<double> psi;  // unwrapped
  std::vector<double> R;    // positive

  double psi_at(double xq) const;
};

struct FlipCount {
  static constexpr long long kMinusInfinity = std::numeric_limits<long long>::min();
  static constexpr long long kPlusInfinity = std::numeric_limits<long long>::max();

  long long value = 0;
  long long lower = 0;
  long long upper = 0;
  bool converged = false;
};

struct IndeterminateSignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ceil(psi_d/pi) - floor(psi_c/pi) - 1 for one continuous unwrapped angle.
long long flip_count(double psi_c, double psi_d);

// d/dx W(u0, u1) = <u0, (phi1 - phi0) u1> for solutions at a common lambda.
double wronskian_derivative(Vec2 u0, Vec2 u1, const MatrixField& dphi);

// Frame of the introduction: (W(u1,u0), W(u1, -i sigma2 u0)) = R (sin psi, cos psi)
// with -i sigma2 u0 = (-u0_2, u0_1).  Both trajectories must share one grid.
RelativeAngle intro_frame_angle(const Trajectory& u0, const Trajectory& u1);

// Frame of the relative Prufer angle: W(u0,u1) = -R sin psi, W(v0,u1) = -R cos psi
// for a reference pair with W(u0,v0) = 1 (checked to w_tol).
RelativeAngle defpsi_angle(const Trajectory& u0, const Trajectory& v0,
                           const Trajectory& u1, double w_tol = 1e-6);

// Right-hand side of psi' = -< u0 cos psi - v0 sin psi, dphi (u0 cos psi - v0 sin psi) >.
double psi_ode_rhs(Vec2 u0, Vec2 v0, const MatrixField& dphi, double psi);

// Second solution with W(u,v) = 1:
//   v(x) = (2 int_{x0}^x <u, phihat u>/|u|^4 - i sigma2/|u|^2) u(x).
// Quadrature runs over the trajectory grid; the base point x0 defaults to the
// grid midpoint when NaN is passed.
Trajectory second_solution(const Trajectory& u,
                           const std::function<MatrixField(double)>& phihat,
                           double x0 = std::numeric_limits<double>::quiet_NaN());

// Reference pair (u, v) on one grid, integrated together with the quadrature
// channel s(x) = int_{anchor}^x <u, phihat u>/|u|^4 dr (anchor = start point).
struct ReferencePair {
  Trajectory u;
  Trajectory v;
  std::vector<double> s;
};
ReferencePair make_reference_pair(const Potential& P, double lambda, double x0, Vec2 u0,
                                  double x1, const IntegratorConfig& cfg = {});

// Classification of a Wronskian zero near x0 per the local sign of the
// perturbation's quadratic form along the unperturbed solution,
// -<u0, dphi u0>: +1, -1, or 0 when the sign changes across the zero.
// Throws IndeterminateSignError when sampling cannot resolve the sign.
int classify_flip(double x0, const Trajectory& u0, const Trajectory& u1,
                  const std::function<MatrixField(double)>& dphi, double window,
                  int refinements = 3, int samples_per_side = 8);

// Zeros of W(u0,u1) on the common grid (sign changes refined by bisection on the
// interpolant to tol_frac * grid span).
std::vector<double> wronskian_zeros(const Trajectory& u0, const Trajectory& u1,
                                    double tol_frac = 1e-10);

// Kepler transformation: continuous phi with
//   cot(phi(x)) = (cot(psi(x)) - c(x)) / x,   c = 2 int_a^x <u0,phihat0 u0>/|u0|^4,
// computed in homogeneous (sin, cos) coordinates; flip counts match psi's.
ScalarAngle kepler_angle(const RelativeAngle& psi, const std::vector<double>& s_channel);
ScalarAngle kepler_angle(const RelativeAngle& psi, const Trajectory& u0,
                         const std::function<MatrixField(double)>& phihat0, double a);

// phibar(x) = (1/alpha) int_x^{x+alpha} phi, exact on the linear interpolant.
ScalarAngle averaged_angle(const ScalarAngle& phi, double alpha);

// Running counts over monotone truncation sequences c_n down to a, d_n up to b;
// converged when the last `stable_tail` values coincide.
FlipCount truncated_flip_count(const std::function<long long(double, double)>& count,
                               const std::vector<double>& c_seq,
                               const std::vector<double>& d_seq, int stable_tail = 5,
                               std::vector<long long>* table = nullptr);

}  // namespace relosc
