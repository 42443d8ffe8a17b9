#pragma once

// Regular-interval eigenvalue machinery: boundary conditions, Prufer shooting,
// the relative counting identities, the spectral shift function, and the
// epsilon-interpolation between two operators.
//
// Boundary normalization: u_-(a) = (sin alpha, cos alpha) with theta_-(a) =
// alpha in [0, pi); u_+(b) = (sin(beta - pi), cos(beta - pi)) with theta_+(b) =
// beta - pi, beta in (0, pi].  lambda is an eigenvalue iff theta_-(lambda, b)
// = beta (mod pi); theta_-(lambda, b) is strictly increasing in lambda.

#include <functional>
#include <stdexcept>
#include <vector>

#include "relosc/ode.hpp"
#include "relosc/potential.hpp"
#include "relosc/relative.hpp"

namespace relosc {

struct BoundaryAmbiguityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoundarySpec {
  double alpha = 0.0;   // [0, pi)
  double beta = M_PI;   // (0, pi]

  // Reduces arbitrary angles modulo pi into the canonical ranges (beta = 0 maps
  // to pi: same boundary condition line).
  static BoundarySpec normalized(double alpha_raw, double beta_raw);

  Vec2 u_minus() const { return {std::sin(alpha), std::cos(alpha)}; }
  Vec2 u_plus() const { return {std::sin(beta - M_PI), std::cos(beta - M_PI)}; }
  double theta_minus() const { return alpha; }
  double theta_plus() const { return beta - M_PI; }
};

struct OperatorSpec {
  Potential potential;
  Interval interval;  // regular truncation; interval.b finite
  BoundarySpec bc;
};

enum class Endpoint { a, b };

// The regular-endpoint Weyl solution launched from the boundary vector.
Trajectory boundary_solution(const OperatorSpec& H, double lambda, Endpoint from,
                             const IntegratorConfig& cfg = {});

// Prufer angle of u_- transported to b (resp. of u_+ transported to a).
double theta_minus_at_b(const OperatorSpec& H, double lambda,
                        const IntegratorConfig& cfg = {});
double theta_plus_at_a(const OperatorSpec& H, double lambda,
                       const IntegratorConfig& cfg = {});

// All eigenvalues in (lo, hi], each located to tol (absolute).
std::vector<double> eigenvalues_regular(const OperatorSpec& H, double lo, double hi,
                                        const IntegratorConfig& cfg = {},
                                        double tol = 1e-10);

struct WindowFlags {
  bool closed_left = false;
  bool closed_right = false;
};

// Number of eigenvalues in the window; throws BoundaryAmbiguityError when an
// eigenvalue sits within ambiguity_tol of an endpoint.
long long count_window(const OperatorSpec& H, double lambda0, double lambda1,
                       WindowFlags flags = {}, const IntegratorConfig& cfg = {},
                       double ambiguity_tol = 1e-9);

// Counting function n(lambda) = #{eigenvalues <= lambda} relative to an
// arbitrary fixed offset (differences of n are window counts).
long long counting_function(const OperatorSpec& H, double lambda,
                            const IntegratorConfig& cfg = {});

// Weighted sign flips of W(u_{0,+}(lambda0), u_{1,-}(lambda1)) over (a, b):
// equals dim Ran P_{(-inf,lambda1)}(H1) - dim Ran P_{(-inf,lambda0]}(H0) in the
// relative (common lower cutoff) sense.  Requires a common interval and
// boundary conditions.
long long relative_count_regular(const OperatorSpec& H0, const OperatorSpec& H1,
                                 double lambda0, double lambda1,
                                 const IntegratorConfig& cfg = {},
                                 double ambiguity_tol = 1e-6);

// H1 = H0 case: #(u_{0,-}(lambda0), u_{0,+}(lambda1)) = dim Ran P_{(l0,l1)}(H0).
long long equal_operator_count(const OperatorSpec& H0, double lambda0, double lambda1,
                               const IntegratorConfig& cfg = {},
                               double ambiguity_tol = 1e-6);

// Spectral shift value xi(lambda) = #(u_{0,+}(lambda), u_{1,-}(lambda)) on the
// common regular interval (jumps +1 at eigenvalues of H1, -1 at eigenvalues of
// H0 under the interpolation normalization).
long long xi_flip_count(const OperatorSpec& H0, const OperatorSpec& H1, double lambda,
                        const IntegratorConfig& cfg = {}, double ambiguity_tol = 1e-6);

struct ShiftProfile {
  std::vector<double> lambdas;
  std::vector<long long> xi;
  std::vector<bool> skipped;  // lambda within guard of a detected eigenvalue
};

ShiftProfile spectral_shift(const OperatorSpec& H0, const OperatorSpec& H1,
                            const std::vector<double>& lambdas,
                            const IntegratorConfig& cfg = {});

// Truncation schedule b_n = b0 * factor^n, n = 0..count-1.
struct TruncationSchedule {
  double b0 = 100.0;
  double factor = 2.0;
  int count = 5;
  int stable_tail = 5;

  std::vector<double> points() const;
};

struct GapCountResult {
  FlipCount difference;            // xi(lambda1) - xi(lambda0) over truncations
  FlipCount at_lambda0, at_lambda1;
  std::vector<double> truncations;
  std::vector<long long> diff_table;
};

// Gap counting on a truncation family: the potentials live on (a, inf) and
// each truncation imposes the same BoundarySpec at b_n; the window difference
// of the spectral shift values is tracked until the tail stabilizes.
GapCountResult relative_count_gap(const Potential& p0, const Potential& p1, double a,
                                  BoundarySpec bc, double lambda0, double lambda1,
                                  const TruncationSchedule& sched = {},
                                  const IntegratorConfig& cfg = {});

// tau_eps = tau_0 + eps (phi1 - phi0) with the shared boundary conditions.
OperatorSpec interpolate(const OperatorSpec& H0, const OperatorSpec& H1, double eps);

struct ThetaEpsReport {
  double max_rel_error = 0.0;   // finite-difference dtheta/deps vs the integral formula
  bool minus_sign_ok = true;    // dtheta_-/deps >= 0 when phi0 - phi1 >= 0
  bool plus_sign_ok = true;     // dtheta_+/deps <= 0 when phi0 - phi1 >= 0
};

// Checks d theta_{eps,±}(x) / d eps against the closed-form integral expressions
// at the sample points, by centered differences in eps.
ThetaEpsReport theta_epsilon_derivative_check(const OperatorSpec& H0,
                                              const OperatorSpec& H1, double eps,
                                              const std::vector<double>& xs,
                                              double deps = 1e-5,
                                              const IntegratorConfig& cfg = {});

}  // namespace relosc
