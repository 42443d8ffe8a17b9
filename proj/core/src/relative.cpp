#include "relosc/relative.hpp"

#include <algorithm>
#include <cmath>

namespace relosc {

namespace {

double wrap_to_pm_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

// Reduce a to (-pi/2, pi/2] modulo pi.
double wrap_to_half_pi(double a) {
  a = std::fmod(a, M_PI);
  if (a <= -0.5 * M_PI) a += M_PI;
  if (a > 0.5 * M_PI) a -= M_PI;
  return a;
}

void check_common_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("trajectories must share a common grid");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::fabs(a[i] - b[i]) > 1e-9 * (1.0 + std::fabs(a[i])))
      throw std::invalid_argument("trajectories must share a common grid");
}

RelativeAngle unwrap_frame(const std::vector<double>& x, const std::vector<double>& ws,
                           const std::vector<double>& wc) {
  RelativeAngle out;
  out.x = x;
  out.psi.resize(x.size());
  out.R.resize(x.size());
  double prev = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::hypot(ws[i], wc[i]);
    if (!(r > 0.0))
      throw std::runtime_error("relative angle: defining Wronskians vanish simultaneously");
    out.R[i] = r;
    const double raw = std::atan2(ws[i], wc[i]);
    if (i == 0) {
      out.psi[0] = raw;
    } else {
      out.psi[i] = prev + wrap_to_pm_pi(raw - prev);
    }
    prev = out.psi[i];
  }
  return out;
}

}  // namespace

double RelativeAngle::psi_at(double xq) const {
  const auto it = std::lower_bound(x.begin(), x.end(), xq);
  if (it == x.begin()) return psi.front();
  if (it == x.end()) return psi.back();
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return psi[i - 1] + t * (psi[i] - psi[i - 1]);
}

long long flip_count(double psi_c, double psi_d) {
  return static_cast<long long>(std::ceil(psi_d / M_PI)) -
         static_cast<long long>(std::floor(psi_c / M_PI)) - 1;
}

double wronskian_derivative(Vec2 u0, Vec2 u1, const MatrixField& dphi) {
  return u0.dot(dphi.apply(u1));
}

RelativeAngle intro_frame_angle(const Trajectory& u0, const Trajectory& u1) {
  check_common_grid(u0.x, u1.x);
  std::vector<double> ws(u0.size()), wc(u0.size());
  for (std::size_t i = 0; i < u0.size(); ++i) {
    ws[i] = wronskian(u1.u[i], u0.u[i]);
    // W(u1, -i sigma2 u0) with -i sigma2 u0 = (-u0_2, u0_1)
    wc[i] = u1.u[i].dot(u0.u[i]);
  }
  return unwrap_frame(u0.x, ws, wc);
}

RelativeAngle defpsi_angle(const Trajectory& u0, const Trajectory& v0,
                           const Trajectory& u1, double w_tol) {
  check_common_grid(u0.x, v0.x);
  check_common_grid(u0.x, u1.x);
  for (std::size_t i = 0; i < u0.size(); ++i)
    if (std::fabs(wronskian(u0.u[i], v0.u[i]) - 1.0) > w_tol)
      throw std::invalid_argument("defpsi_angle: W(u0, v0) deviates from 1");
  std::vector<double> ws(u0.size()), wc(u0.size());
  for (std::size_t i = 0; i < u0.size(); ++i) {
    ws[i] = -wronskian(u0.u[i], u1.u[i]);
    wc[i] = -wronskian(v0.u[i], u1.u[i]);
  }
  return unwrap_frame(u0.x, ws, wc);
}

double psi_ode_rhs(Vec2 u0, Vec2 v0, const MatrixField& dphi, double psi) {
  const Vec2 q = std::cos(psi) * u0 - std::sin(psi) * v0;
  return -dphi.quad(q);
}

Trajectory second_solution(const Trajectory& u,
                           const std::function<MatrixField(double)>& phihat,
                           double x0) {
  const std::size_t n = u.size();
  if (n < 2) throw std::invalid_argument("second_solution: trajectory too short");
  std::vector<double> c(n, 0.0);
  auto integrand = [&](std::size_t i) {
    const double n2 = u.u[i].norm2();
    return phihat(u.x[i]).quad(u.u[i]) / (n2 * n2);
  };
  double prev = integrand(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = integrand(i);
    c[i] = c[i - 1] + 0.5 * (u.x[i] - u.x[i - 1]) * (prev + cur);
    prev = cur;
  }
  for (double& ci : c) ci *= 2.0;

  if (std::isnan(x0)) x0 = 0.5 * (u.x.front() + u.x.back());
  // c is only determined up to a constant; rebase at x0.
  double c0;
  {
    const auto it = std::lower_bound(u.x.begin(), u.x.end(), x0);
    if (it == u.x.begin())
      c0 = c.front();
    else if (it == u.x.end())
      c0 = c.back();
    else {
      const std::size_t i = static_cast<std::size_t>(it - u.x.begin());
      const double t = (x0 - u.x[i - 1]) / (u.x[i] - u.x[i - 1]);
      c0 = c[i - 1] + t * (c[i] - c[i - 1]);
    }
  }

  Trajectory v;
  v.x = u.x;
  v.launched_at_front = u.launched_at_front;
  v.u.resize(n);
  v.rho.resize(n);
  v.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ci = c[i] - c0;
    v.u[i] = ci * u.u[i] - (1.0 / u.u[i].norm2()) * jmul(u.u[i]);
    v.rho[i] = v.u[i].norm();
    if (i == 0) {
      v.theta[0] = std::atan2(v.u[0].x, v.u[0].y);
    } else {
      const double d = std::atan2(wronskian(v.u[i], v.u[i - 1]), v.u[i - 1].dot(v.u[i]));
      v.theta[i] = v.theta[i - 1] + d;
    }
  }
  return v;
}

ReferencePair make_reference_pair(const Potential& P, double lambda, double x0, Vec2 u0,
                                  double x1, const IntegratorConfig& cfg) {
  JointSpec spec;
  spec.dirac.push_back({&P, lambda, u0, std::nullopt});
  spec.quadratures.push_back([&P](double x, const std::vector<Vec2>& us) {
    const MatrixField f = P(x);
    const MatrixField fhat{0.0, f.c1, f.c3};
    const double n2 = us[0].norm2();
    return fhat.quad(us[0]) / (n2 * n2);
  });
  JointResult r = integrate_joint(spec, x0, x1, cfg);

  ReferencePair out;
  out.u = std::move(r.dirac[0]);
  out.s = std::move(r.quad[0]);
  const std::size_t n = out.u.size();
  out.v.x = out.u.x;
  out.v.launched_at_front = out.u.launched_at_front;
  out.v.u.resize(n);
  out.v.rho.resize(n);
  out.v.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ci = 2.0 * out.s[i];
    out.v.u[i] = ci * out.u.u[i] - (1.0 / out.u.u[i].norm2()) * jmul(out.u.u[i]);
    out.v.rho[i] = out.v.u[i].norm();
    if (i == 0) {
      out.v.theta[0] = std::atan2(out.v.u[0].x, out.v.u[0].y);
    } else {
      const double d = std::atan2(wronskian(out.v.u[i], out.v.u[i - 1]),
                                  out.v.u[i - 1].dot(out.v.u[i]));
      out.v.theta[i] = out.v.theta[i - 1] + d;
    }
  }
  return out;
}

int classify_flip(double x0, const Trajectory& u0, const Trajectory& u1,
                  const std::function<MatrixField(double)>& dphi, double window,
                  int refinements, int samples_per_side) {
  (void)u1;  // the classifying sign is the quadratic form along u0: at a zero
             // the two solutions are parallel, and the angle difference moves
             // with slope -<u0, dphi u0>/|u0|^2 regardless of orientation
  for (int r = 0; r <= refinements; ++r) {
    const double w = window / std::pow(2.0, r);
    double scale = 0.0;
    std::vector<double> left, right;
    for (int j = 0; j < samples_per_side; ++j) {
      const double off = (j + 0.5) * w / samples_per_side;
      for (const double xs : {x0 - off, x0 + off}) {
        const double s = -dphi(xs).quad(u0.value_at(xs));
        scale = std::max(scale, std::fabs(s));
        (xs < x0 ? left : right).push_back(s);
      }
    }
    const double tol = 1e-12 * scale;
    auto sign_of = [tol](const std::vector<double>& v) {
      bool pos = true, neg = true;
      for (double s : v) {
        if (!(s > tol)) pos = false;
        if (!(s < -tol)) neg = false;
      }
      return pos ? 1 : (neg ? -1 : 0);
    };
    const int sl = sign_of(left), sr = sign_of(right);
    if (sl != 0 && sr != 0) {
      if (sl == sr) return sl;
      return 0;  // sign changes across the zero: the Wronskian keeps its sign
    }
  }
  throw IndeterminateSignError(
      "classify_flip: sign of the perturbation not resolved near the zero");
}

std::vector<double> wronskian_zeros(const Trajectory& u0, const Trajectory& u1,
                                    double tol_frac) {
  check_common_grid(u0.x, u1.x);
  std::vector<double> zeros;
  const double span = u0.x.back() - u0.x.front();
  const double tol = tol_frac * span;
  auto w_at = [&](double xq) {
    return wronskian(u0.value_at(xq), u1.value_at(xq));
  };
  for (std::size_t i = 0; i + 1 < u0.size(); ++i) {
    double wa = wronskian(u0.u[i], u1.u[i]);
    double wb = wronskian(u0.u[i + 1], u1.u[i + 1]);
    if (wa == 0.0) {
      zeros.push_back(u0.x[i]);
      continue;
    }
    if (wa * wb < 0.0) {
      double a = u0.x[i], b = u0.x[i + 1];
      for (int it = 0; it < 64 && (b - a) > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double wm = w_at(m);
        if (wm == 0.0) {
          a = b = m;
          break;
        }
        if (wa * wm < 0.0)
          b = m;
        else {
          a = m;
          wa = wm;
        }
      }
      zeros.push_back(0.5 * (a + b));
    }
  }
  if (!u0.u.empty() && wronskian(u0.u.back(), u1.u.back()) == 0.0)
    zeros.push_back(u0.x.back());
  return zeros;
}

namespace {

// Strip-angle of the Kepler image, defined modulo pi.
double kepler_strip(double x, double psi, double c) {
  const double sp = std::sin(psi), cp = std::cos(psi);
  return std::atan2(x * sp, cp - c * sp);
}

// Advance phi continuously from (x_a, psi_a, c_a) to (x_b, psi_b, c_b),
// subdividing on the linear interpolant until every move is below pi/2.
double advance_kepler(double phi, double xa, double pa, double ca, double xb, double pb,
                      double cb, int depth) {
  const double target = kepler_strip(xb, pb, cb);
  const double d = wrap_to_half_pi(target - phi);
  if (depth <= 0 || std::fabs(d) < 0.45 * M_PI) return phi + d;
  const double xm = 0.5 * (xa + xb), pm = 0.5 * (pa + pb), cm = 0.5 * (ca + cb);
  phi = advance_kepler(phi, xa, pa, ca, xm, pm, cm, depth - 1);
  return advance_kepler(phi, xm, pm, cm, xb, pb, cb, depth - 1);
}

ScalarAngle kepler_core(const RelativeAngle& psi, const std::vector<double>& c) {
  if (psi.x.size() != c.size())
    throw std::invalid_argument("kepler_angle: channel not aligned with psi");
  if (!(psi.x.front() > 0.0))
    throw std::invalid_argument("kepler_angle: domain must satisfy x > 0");
  ScalarAngle out;
  out.x = psi.x;
  out.angle.resize(psi.x.size());
  // Anchor phi in the same pi-strip as psi.
  const double strip = std::floor(psi.psi.front() / M_PI);
  double t0 = std::fmod(kepler_strip(psi.x.front(), psi.psi.front(), c.front()), M_PI);
  if (t0 < 0) t0 += M_PI;
  double phi = t0 + M_PI * strip;
  out.angle[0] = phi;
  for (std::size_t i = 1; i < psi.x.size(); ++i) {
    phi = advance_kepler(phi, psi.x[i - 1], psi.psi[i - 1], c[i - 1], psi.x[i],
                         psi.psi[i], c[i], 24);
    out.angle[i] = phi;
  }
  return out;
}

}  // namespace

ScalarAngle kepler_angle(const RelativeAngle& psi, const std::vector<double>& s_channel) {
  std::vector<double> c(s_channel.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.0 * s_channel[i];
  return kepler_core(psi, c);
}

ScalarAngle kepler_angle(const RelativeAngle& psi, const Trajectory& u0,
                         const std::function<MatrixField(double)>& phihat0, double a) {
  check_common_grid(psi.x, u0.x);
  if (std::fabs(a - psi.x.front()) > 1e-9 * (1.0 + std::fabs(a)))
    throw std::invalid_argument("kepler_angle: base point must be the grid front");
  const std::size_t n = psi.x.size();
  std::vector<double> c(n, 0.0);
  auto integrand = [&](std::size_t i) {
    const double n2 = u0.u[i].norm2();
    return phihat0(u0.x[i]).quad(u0.u[i]) / (n2 * n2);
  };
  double prev = integrand(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = integrand(i);
    c[i] = c[i - 1] + 0.5 * (psi.x[i] - psi.x[i - 1]) * (prev + cur);
    prev = cur;
  }
  for (double& ci : c) ci *= 2.0;
  return kepler_core(psi, c);
}

ScalarAngle averaged_angle(const ScalarAngle& phi, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("averaged_angle: period must be positive");
  const std::size_t n = phi.x.size();
  if (n < 2 || phi.x.back() - phi.x.front() < alpha)
    throw std::invalid_argument("averaged_angle: domain shorter than one period");
  // Prefix integral of the linear interpolant.
  std::vector<double> I(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    I[i] = I[i - 1] + 0.5 * (phi.x[i] - phi.x[i - 1]) * (phi.angle[i] + phi.angle[i - 1]);
  auto I_at = [&](double xq) {
    const auto it = std::upper_bound(phi.x.begin(), phi.x.end(), xq);
    if (it == phi.x.begin()) return I.front();
    if (it == phi.x.end()) return I.back();
    const std::size_t i = static_cast<std::size_t>(it - phi.x.begin());
    const double h = xq - phi.x[i - 1];
    const double slope = (phi.angle[i] - phi.angle[i - 1]) / (phi.x[i] - phi.x[i - 1]);
    return I[i - 1] + phi.angle[i - 1] * h + 0.5 * slope * h * h;
  };
  ScalarAngle out;
  for (std::size_t i = 0; i < n; ++i) {
    if (phi.x[i] + alpha > phi.x.back() + 1e-12 * alpha) break;
    out.x.push_back(phi.x[i]);
    out.angle.push_back((I_at(phi.x[i] + alpha) - I[i]) / alpha);
  }
  return out;
}

FlipCount truncated_flip_count(const std::function<long long(double, double)>& count,
                               const std::vector<double>& c_seq,
                               const std::vector<double>& d_seq, int stable_tail,
                               std::vector<long long>* table) {
  if (c_seq.size() != d_seq.size() || c_seq.empty())
    throw std::invalid_argument("truncated_flip_count: sequences must align");
  std::vector<long long> counts;
  counts.reserve(c_seq.size());
  for (std::size_t i = 0; i < c_seq.size(); ++i) counts.push_back(count(c_seq[i], d_seq[i]));
  if (table) *table = counts;

  const std::size_t tail =
      std::min<std::size_t>(counts.size(), static_cast<std::size_t>(std::max(1, stable_tail)));
  long long lo = counts.back(), hi = counts.back();
  for (std::size_t i = counts.size() - tail; i < counts.size(); ++i) {
    lo = std::min(lo, counts[i]);
    hi = std::max(hi, counts[i]);
  }
  FlipCount fc;
  fc.value = counts.back();
  fc.lower = lo;
  fc.upper = hi;
  fc.converged = (lo == hi) && counts.size() >= tail;
  return fc;
}

}  // namespace relosc
