#pragma once

// Matrix potentials phi(x) for the Dirac expression tau = (1/i) sigma2 d/dx + phi.
//
// A Potential is an evaluable map on an interval, together with the metadata the
// integrator and the Floquet machinery need: declared discontinuities, an optional
// period, and an optional iterated-log decay tail.

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "relosc/pauli.hpp"

namespace relosc {

struct Interval {
  double a = 0.0;
  double b = 0.0;
  bool b_infinite = false;

  bool contains(double x) const { return x >= a && (b_infinite || x <= b); }
};

// One constant matrix per scale index k of an iterated-log tail; the perturbation
// added to the base potential is (1/4) sum_k L_k(x)^{-2} phi1k.
struct TailTerm {
  int k = 0;
  MatrixField phi1k;
};

struct TailSpec {
  std::vector<TailTerm> terms;  // contiguous scale indices 0..n
  double start = 1.0;           // tail switched on for x >= start

  MatrixField eval(double x) const;
  int order() const { return terms.empty() ? -1 : terms.back().k; }
};

class Potential {
 public:
  Potential() = default;

  MatrixField operator()(double x) const { return eval_(x); }

  const Interval& interval() const { return iv_; }
  const std::optional<double>& period() const { return period_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::optional<TailSpec>& tail() const { return tail_; }

  // Presets -----------------------------------------------------------------

  static Potential constant(Interval iv, MatrixField m);

  // Piecewise constant: values.size() == breakpoints.size() + 1.
  static Potential step(Interval iv, std::vector<double> breakpoints,
                        std::vector<MatrixField> values);

  // Trigonometric polynomial per Pauli component with period alpha:
  //   comp(x) = cst + sum_m cos_m cos(2 pi m x / alpha) + sin_m sin(2 pi m x / alpha)
  struct TrigComponent {
    double cst = 0.0;
    std::vector<double> cos_coef;
    std::vector<double> sin_coef;
    double eval(double x, double alpha) const;
  };
  static Potential trig_periodic(Interval iv, double alpha, TrigComponent c0,
                                 TrigComponent c1, TrigComponent c3);

  // Sampled grid with linear interpolation (clamped outside the node range).
  static Potential grid(Interval iv, std::vector<double> x, std::vector<double> c0,
                        std::vector<double> c1, std::vector<double> c3);

  // Arbitrary evaluator.
  static Potential from_function(Interval iv, std::function<MatrixField(double)> f,
                                 std::vector<double> breakpoints = {},
                                 std::optional<double> period = std::nullopt);

  // Combinators ---------------------------------------------------------------

  // base + tail, with the tail recorded for the accumulation criterion.
  static Potential with_tail(const Potential& base, TailSpec tail);

  // (1-eps) p0 + eps p1 on the common interval.
  static Potential linear_mix(const Potential& p0, const Potential& p1, double eps);

  // p + shift*1l (gauge of the spectral parameter).
  static Potential shifted(const Potential& p, double shift);

 private:
  Interval iv_;
  std::optional<double> period_;
  std::vector<double> breakpoints_;
  std::optional<TailSpec> tail_;
  std::function<MatrixField(double)> eval_ = [](double) { return MatrixField{}; };
};

// A potential carrying a sigma2 (anomalous magnetic) component on top of the
// symmetric part; only accepted at ingestion, removed by gauge_magnetic.
struct MagneticPotential {
  Potential base;
  std::function<double(double)> mg;
};

// Gauge transformation U = exp(-i int phi_mg): removes the sigma2 component.
// The spectra of the associated operators are unchanged; solutions pick up the
// scalar phase exp(-i gauge_phase).
Potential gauge_magnetic(const MagneticPotential& p);

// int_{x0}^{x} phi_mg(r) dr, to integration tolerance.
double gauge_phase(const MagneticPotential& p, double x0, double x, double tol = 1e-12);

// Radial reduction: the operator (1/i) sigma2 d/dr + (k/r) sigma3 + phi(r) on
// (0, inf) is unitarily equivalent to the one with potential
//   (sqrt(1 + k^2/r^2) - 1) sigma3 + k/(2 (r^2 + k^2)) 1l + phi(r).
// k must be a nonzero integer.
Potential radial_transform(int k, const Potential& p);

// Coefficient of the r^{-2} leading term of the added part: (k/2)(k sigma3 + 1l).
MatrixField radial_r2_leading(int k);

// Prufer-angle shift of the boundary condition under the radial transformation:
// a boundary angle gamma for the original operator at radius r corresponds to
// gamma + radial_bc_shift(k, r) for the transformed one.
double radial_bc_shift(int k, double r);

// Adaptive Simpson quadrature used by small helpers (gauge phase, diagnostics).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

}  // namespace relosc
