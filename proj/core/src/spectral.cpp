#include "relosc/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace relosc {

namespace {

double mod_pi(double a) {
  a = std::fmod(a, M_PI);
  if (a < 0) a += M_PI;
  return a;
}

// Distance of a (in units of pi) to the nearest lattice point.
double lattice_distance(double angle) {
  const double t = angle / M_PI;
  return std::fabs(t - std::round(t));
}

void require_compatible(const OperatorSpec& H0, const OperatorSpec& H1) {
  const double tol = 1e-12;
  if (std::fabs(H0.interval.a - H1.interval.a) > tol ||
      std::fabs(H0.interval.b - H1.interval.b) > tol ||
      std::fabs(H0.bc.alpha - H1.bc.alpha) > tol ||
      std::fabs(H0.bc.beta - H1.bc.beta) > tol)
    throw std::invalid_argument("operators must share interval and boundary conditions");
}

}  // namespace

BoundarySpec BoundarySpec::normalized(double alpha_raw, double beta_raw) {
  BoundarySpec bc;
  bc.alpha = mod_pi(alpha_raw);
  double b = mod_pi(beta_raw);
  bc.beta = (b == 0.0) ? M_PI : b;
  return bc;
}

Trajectory boundary_solution(const OperatorSpec& H, double lambda, Endpoint from,
                             const IntegratorConfig& cfg) {
  if (from == Endpoint::a)
    return integrate_dirac(H.potential, lambda, H.interval.a, H.bc.u_minus(),
                           H.interval.b, cfg, H.bc.theta_minus());
  return integrate_dirac(H.potential, lambda, H.interval.b, H.bc.u_plus(), H.interval.a,
                         cfg, H.bc.theta_plus());
}

double theta_minus_at_b(const OperatorSpec& H, double lambda, const IntegratorConfig& cfg) {
  return prufer_theta_end(H.potential, lambda, H.interval.a, H.bc.theta_minus(),
                          H.interval.b, cfg);
}

double theta_plus_at_a(const OperatorSpec& H, double lambda, const IntegratorConfig& cfg) {
  return prufer_theta_end(H.potential, lambda, H.interval.b, H.bc.theta_plus(),
                          H.interval.a, cfg);
}

long long counting_function(const OperatorSpec& H, double lambda,
                            const IntegratorConfig& cfg) {
  const double theta = theta_minus_at_b(H, lambda, cfg);
  return static_cast<long long>(std::floor((theta - H.bc.beta) / M_PI));
}

std::vector<double> eigenvalues_regular(const OperatorSpec& H, double lo, double hi,
                                        const IntegratorConfig& cfg, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("eigenvalues_regular: window must be ordered");
  const double beta = H.bc.beta;
  const double th_lo = theta_minus_at_b(H, lo, cfg);
  const double th_hi = theta_minus_at_b(H, hi, cfg);
  const long long k_lo = static_cast<long long>(std::floor((th_lo - beta) / M_PI)) + 1;
  const long long k_hi = static_cast<long long>(std::floor((th_hi - beta) / M_PI));

  std::vector<double> evs;
  double bracket_lo = lo, th_bracket_lo = th_lo;
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double target = beta + static_cast<double>(k) * M_PI;
    // Illinois on the monotone function theta(lambda) - target.
    double a = bracket_lo, b = hi;
    double fa = th_bracket_lo - target;
    double fb = th_hi - target;
    if (fa > 0 || fb < 0) throw std::runtime_error("eigenvalues_regular: lost bracket");
    double root = a;
    int side = 0;
    for (int it = 0; it < 128 && (b - a) > tol; ++it) {
      root = (a * fb - b * fa) / (fb - fa);
      if (!(root > a && root < b)) root = 0.5 * (a + b);
      const double fr = theta_minus_at_b(H, root, cfg) - target;
      if (fr == 0.0) {
        a = b = root;
        break;
      }
      if (fr < 0) {
        a = root;
        fa = fr;
        if (side == -1) fb *= 0.5;
        side = -1;
      } else {
        b = root;
        fb = fr;
        if (side == +1) fa *= 0.5;
        side = +1;
      }
    }
    root = 0.5 * (a + b);
    evs.push_back(root);
    // The next root lies to the right of this one.
    bracket_lo = root;
    th_bracket_lo = target;
  }
  return evs;
}

long long count_window(const OperatorSpec& H, double lambda0, double lambda1,
                       WindowFlags flags, const IntegratorConfig& cfg,
                       double ambiguity_tol) {
  if (!(lambda0 < lambda1)) throw std::invalid_argument("count_window: window must be ordered");
  const double d = ambiguity_tol;
  auto check_endpoint = [&](double lam) {
    const long long below = counting_function(H, lam - d, cfg);
    const long long above = counting_function(H, lam + d, cfg);
    if (above == below) return;  // no eigenvalue within the guard band
    const auto evs = eigenvalues_regular(H, lam - d, lam + d, cfg, d * 1e-3);
    for (double ev : evs)
      if (std::fabs(ev - lam) > 0.1 * d)
        throw BoundaryAmbiguityError("count_window: eigenvalue within guard of endpoint");
  };
  check_endpoint(lambda0);
  check_endpoint(lambda1);
  const double eff0 = flags.closed_left ? lambda0 - d : lambda0 + d;
  const double eff1 = flags.closed_right ? lambda1 + d : lambda1 - d;
  return counting_function(H, eff1, cfg) - counting_function(H, eff0, cfg);
}

namespace {

long long pair_flip_count(double delta_a, double delta_b, double ambiguity_tol) {
  if (lattice_distance(delta_a) < ambiguity_tol || lattice_distance(delta_b) < ambiguity_tol)
    throw BoundaryAmbiguityError(
        "flip count: boundary angle within guard of a multiple of pi");
  return flip_count(delta_a, delta_b);
}

}  // namespace

long long relative_count_regular(const OperatorSpec& H0, const OperatorSpec& H1,
                                 double lambda0, double lambda1,
                                 const IntegratorConfig& cfg, double ambiguity_tol) {
  require_compatible(H0, H1);
  // Slots (u_{0,+}(lambda0), u_{1,-}(lambda1)); Delta = theta_second - theta_first.
  const double delta_a = H0.bc.alpha - theta_plus_at_a(H0, lambda0, cfg);
  const double delta_b = theta_minus_at_b(H1, lambda1, cfg) - H0.bc.theta_plus();
  return pair_flip_count(delta_a, delta_b, ambiguity_tol);
}

long long equal_operator_count(const OperatorSpec& H0, double lambda0, double lambda1,
                               const IntegratorConfig& cfg, double ambiguity_tol) {
  // Slots (u_{0,-}(lambda0), u_{0,+}(lambda1)).
  const double delta_a = theta_plus_at_a(H0, lambda1, cfg) - H0.bc.alpha;
  const double delta_b = H0.bc.theta_plus() - theta_minus_at_b(H0, lambda0, cfg);
  return pair_flip_count(delta_a, delta_b, ambiguity_tol);
}

long long xi_flip_count(const OperatorSpec& H0, const OperatorSpec& H1, double lambda,
                        const IntegratorConfig& cfg, double ambiguity_tol) {
  return relative_count_regular(H0, H1, lambda, lambda, cfg, ambiguity_tol);
}

ShiftProfile spectral_shift(const OperatorSpec& H0, const OperatorSpec& H1,
                            const std::vector<double>& lambdas,
                            const IntegratorConfig& cfg) {
  ShiftProfile out;
  out.lambdas = lambdas;
  out.xi.resize(lambdas.size(), 0);
  out.skipped.resize(lambdas.size(), false);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    try {
      out.xi[i] = xi_flip_count(H0, H1, lambdas[i], cfg);
    } catch (const BoundaryAmbiguityError&) {
      out.skipped[i] = true;
    }
  }
  return out;
}

std::vector<double> TruncationSchedule::points() const {
  std::vector<double> pts;
  double b = b0;
  for (int i = 0; i < count; ++i) {
    pts.push_back(b);
    b *= factor;
  }
  return pts;
}

GapCountResult relative_count_gap(const Potential& p0, const Potential& p1, double a,
                                  BoundarySpec bc, double lambda0, double lambda1,
                                  const TruncationSchedule& sched,
                                  const IntegratorConfig& cfg) {
  GapCountResult res;
  res.truncations = sched.points();
  auto xi_at = [&](double lambda, double bn) {
    OperatorSpec H0{p0, Interval{a, bn, false}, bc};
    OperatorSpec H1{p1, Interval{a, bn, false}, bc};
    return xi_flip_count(H0, H1, lambda, cfg);
  };
  std::vector<double> c_seq(res.truncations.size(), a);
  std::vector<long long> t0, t1;
  res.at_lambda0 = truncated_flip_count(
      [&](double, double d) { return xi_at(lambda0, d); }, c_seq, res.truncations,
      sched.stable_tail, &t0);
  res.at_lambda1 = truncated_flip_count(
      [&](double, double d) { return xi_at(lambda1, d); }, c_seq, res.truncations,
      sched.stable_tail, &t1);
  res.diff_table.resize(t0.size());
  for (std::size_t i = 0; i < t0.size(); ++i) res.diff_table[i] = t1[i] - t0[i];

  const std::size_t tail = std::min<std::size_t>(
      res.diff_table.size(), static_cast<std::size_t>(std::max(1, sched.stable_tail)));
  long long lo = res.diff_table.back(), hi = lo;
  for (std::size_t i = res.diff_table.size() - tail; i < res.diff_table.size(); ++i) {
    lo = std::min(lo, res.diff_table[i]);
    hi = std::max(hi, res.diff_table[i]);
  }
  res.difference.value = res.diff_table.back();
  res.difference.lower = lo;
  res.difference.upper = hi;
  res.difference.converged = (lo == hi);
  return res;
}

OperatorSpec interpolate(const OperatorSpec& H0, const OperatorSpec& H1, double eps) {
  require_compatible(H0, H1);
  OperatorSpec H;
  H.potential = Potential::linear_mix(H0.potential, H1.potential, eps);
  H.interval = H0.interval;
  H.bc = H0.bc;
  return H;
}

ThetaEpsReport theta_epsilon_derivative_check(const OperatorSpec& H0,
                                              const OperatorSpec& H1, double eps,
                                              const std::vector<double>& xs,
                                              double deps, const IntegratorConfig& cfg) {
  require_compatible(H0, H1);
  ThetaEpsReport rep;

  auto make_traj = [&](double e, Endpoint from) {
    OperatorSpec He = interpolate(H0, H1, e);
    JointSpec spec;
    const bool from_a = (from == Endpoint::a);
    const double x_start = from_a ? He.interval.a : He.interval.b;
    const double x_end = from_a ? He.interval.b : He.interval.a;
    const Vec2 u0 = from_a ? He.bc.u_minus() : He.bc.u_plus();
    const double th0 = from_a ? He.bc.theta_minus() : He.bc.theta_plus();
    const Potential pot = He.potential;  // keep alive for the call
    JointSpec::Channel ch;
    ch.pot = &pot;
    ch.lambda = 0.0;
    ch.u0 = u0;
    ch.theta0 = th0;
    spec.dirac.push_back(ch);
    const Potential& pref0 = H0.potential;
    const Potential& pref1 = H1.potential;
    spec.quadratures.push_back([&pref0, &pref1](double x, const std::vector<Vec2>& us) {
      const MatrixField d = pref0(x) - pref1(x);  // phi0 - phi1
      return d.quad(us[0]);
    });
    return integrate_joint(spec, x_start, x_end, cfg);
  };

  for (const Endpoint from : {Endpoint::a, Endpoint::b}) {
    const JointResult mid = make_traj(eps, from);
    const JointResult hi = make_traj(eps + deps, from);
    const JointResult lo = make_traj(eps - deps, from);
    const Trajectory& t = mid.dirac[0];
    const bool from_a = (from == Endpoint::a);
    for (double xq : xs) {
      // s(x) = int_{start}^{x} <u, (phi0-phi1) u>; for the b-launch this is
      // -int_x^b, matching the displayed formula directly.
      const auto& sx = mid.quad[0];
      double s_at;
      {
        const auto it = std::lower_bound(t.x.begin(), t.x.end(), xq);
        const std::size_t i =
            std::min(t.x.size() - 1,
                     static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - t.x.begin())));
        const double tt = (xq - t.x[i - 1]) / (t.x[i] - t.x[i - 1]);
        s_at = sx[i - 1] + tt * (sx[i] - sx[i - 1]);
      }
      // For the b-launch s(x) = -int_x^b, so the same expression covers both
      // displayed formulas.
      const double rho2 = t.value_at(xq).norm2();
      const double formula = s_at / rho2;
      const double fd =
          (hi.dirac[0].theta_at(xq) - lo.dirac[0].theta_at(xq)) / (2.0 * deps);
      const double scale = std::max({std::fabs(formula), std::fabs(fd), 1e-12});
      rep.max_rel_error = std::max(rep.max_rel_error, std::fabs(fd - formula) / scale);
      if (from_a && formula < -1e-9) rep.minus_sign_ok = false;
      if (!from_a && formula > 1e-9) rep.plus_sign_ok = false;
    }
  }
  return rep;
}

}  // namespace relosc
