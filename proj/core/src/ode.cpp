#include "relosc/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relosc {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// b - bhat
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kAngleGuard = 0.45 * M_PI;

struct StepInterpolant {
  double x_old = 0, h = 0;
  std::vector<double> r1, r2, r3, r4, r5;

  void build(std::size_t n, double x0, double hstep, const std::vector<double>& y0,
             const std::vector<double>& y1, const std::vector<double>& k1,
             const std::vector<double>& k3, const std::vector<double>& k4,
             const std::vector<double>& k5, const std::vector<double>& k6,
             const std::vector<double>& k7) {
    x_old = x0;
    h = hstep;
    r1.assign(y0.begin(), y0.end());
    r2.resize(n);
    r3.resize(n);
    r4.resize(n);
    r5.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ydiff = y1[i] - y0[i];
      const double bspl = h * k1[i] - ydiff;
      r2[i] = ydiff;
      r3[i] = bspl;
      r4[i] = ydiff - h * k7[i] - bspl;
      r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                   d7 * k7[i]);
    }
  }

  void eval(double xq, std::vector<double>& out) const {
    const double s = (xq - x_old) / h;
    const double s1 = 1.0 - s;
    out.resize(r1.size());
    for (std::size_t i = 0; i < r1.size(); ++i)
      out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
  }
};

// One integration driver shared by all public entry points.  State layout:
// dirac channels first (2 doubles each), then scalar angle channels, then
// quadrature channels.
class Driver {
 public:
  struct DiracCh {
    const Potential* pot;
    double lambda;
  };
  struct AngleCh {
    std::function<double(double, double)> slope;
  };
  struct QuadCh {
    std::function<double(double, const std::vector<Vec2>&)> integrand;
  };

  std::vector<DiracCh> dirac;
  std::vector<AngleCh> angle;
  std::vector<QuadCh> quad;

  std::size_t dim() const { return 2 * dirac.size() + angle.size() + quad.size(); }

  // Called for every recorded node, in integration order.
  std::function<void(double, const std::vector<double>&)> record;

  void rhs(double x, const std::vector<double>& y, std::vector<double>& dy) {
    scratch_u_.resize(dirac.size());
    for (std::size_t j = 0; j < dirac.size(); ++j)
      scratch_u_[j] = Vec2{y[2 * j], y[2 * j + 1]};
    for (std::size_t j = 0; j < dirac.size(); ++j) {
      const Vec2 du = dirac_rhs(*dirac[j].pot, dirac[j].lambda, x, scratch_u_[j]);
      dy[2 * j] = du.x;
      dy[2 * j + 1] = du.y;
    }
    std::size_t off = 2 * dirac.size();
    for (std::size_t j = 0; j < angle.size(); ++j)
      dy[off + j] = angle[j].slope(x, y[off + j]);
    off += angle.size();
    for (std::size_t j = 0; j < quad.size(); ++j)
      dy[off + j] = quad[j].integrand(x, scratch_u_);
  }

  // Integrates over [x0, x1] split at the sorted breakpoints; records nodes on
  // the stride lattice plus every accepted step end.
  void run(double x0, std::vector<double> y, double x1, const IntegratorConfig& cfg,
           const std::vector<double>& breakpoints) {
    if (x0 == x1) {
      record(x0, y);
      return;
    }
    const double dir = x1 > x0 ? 1.0 : -1.0;
    stride_ = cfg.dense_stride > 0 ? cfg.dense_stride : std::fabs(x1 - x0) / 256.0;
    next_lattice_ = x0 + dir * stride_;
    record(x0, y);

    std::vector<double> cuts;
    for (double b : breakpoints)
      if ((b - x0) * dir > 0 && (x1 - b) * dir > 0) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    if (dir < 0) std::reverse(cuts.begin(), cuts.end());
    cuts.push_back(x1);

    double x = x0;
    h_ = 0.0;
    facold_ = 1e-4;
    for (double seg_end : cuts) {
      if ((seg_end - x) * dir <= 0) continue;
      integrate_segment(x, y, seg_end, dir, cfg);
      x = seg_end;
    }
  }

 private:
  void integrate_segment(double x0, std::vector<double>& y, double x1, double dir,
                         const IntegratorConfig& cfg) {
    const std::size_t n = dim();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n),
        ynew(n), yerr(n);
    double x = x0;
    rhs(x, y, k1);

    const double span = std::fabs(x1 - x0);
    double hmax = cfg.max_step > 0 ? std::min(cfg.max_step, span) : span;
    if (h_ == 0.0) h_ = initial_step(x, y, k1, cfg, hmax, dir);
    double h = std::fabs(h_) * dir;

    StepInterpolant interp;
    int rejected_in_row = 0;
    while ((x1 - x) * dir > 0) {
      const double remaining = (x1 - x) * dir;
      if (std::fabs(h) > remaining) h = remaining * dir;
      if (std::fabs(h) < 16.0 * std::numeric_limits<double>::epsilon() * std::fabs(x) +
                             1e-300)
        throw IntegrationError("step size underflow (input too rough at tolerance)", x);

      auto stage = [&](double cx, const std::vector<double>& cy, std::vector<double>& k) {
        rhs(cx, cy, k);
      };
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
      stage(x + c2 * h, ytmp, k2);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      stage(x + c3 * h, ytmp, k3);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      stage(x + c4 * h, ytmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      stage(x + c5 * h, ytmp, k5);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                              a65 * k5[i]);
      stage(x + h, ytmp, k6);
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                              a76 * k6[i]);
      stage(x + h, ynew, k7);

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                       e7 * k7[i]);
        const double sk =
            cfg.atol + cfg.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
        const double r = yerr[i] / sk;
        err += r * r;
      }
      err = std::sqrt(err / static_cast<double>(n));

      const double expo1 = 0.2 - 0.04 * 0.75;
      const double fac11 = std::pow(std::max(err, 1e-32), expo1);
      if (err <= 1.0) {
        double guard_excess = angle_step_excess(y, ynew);
        if (guard_excess > 1.0) {
          h *= std::clamp(0.8 / guard_excess, 0.1, 0.7);
          ++rejected_in_row;
          if (rejected_in_row > 200)
            throw IntegrationError("angle step control failed to converge", x);
          continue;
        }
        rejected_in_row = 0;
        interp.build(n, x, h, y, ynew, k1, k3, k4, k5, k6, k7);
        emit_nodes(interp, x, x + h, ynew, dir);
        x += h;
        y = ynew;
        k1 = k7;  // FSAL
        double fac = fac11 / std::pow(facold_, 0.04);
        fac = std::max(0.2, std::min(10.0, fac / 0.9));
        facold_ = std::max(err, 1e-4);
        h = h / fac;
        if (std::fabs(h) > hmax) h = hmax * dir;
      } else {
        ++rejected_in_row;
        if (rejected_in_row > 200)
          throw IntegrationError("step control failed to converge", x);
        h = h / std::min(5.0, fac11 / 0.9);
      }
    }
    h_ = h;
  }

  double initial_step(double x, const std::vector<double>& y,
                      const std::vector<double>& f, const IntegratorConfig& cfg,
                      double hmax, double dir) {
    double ny = 0, nf = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double sk = cfg.atol + cfg.rtol * std::fabs(y[i]);
      ny += (y[i] / sk) * (y[i] / sk);
      nf += (f[i] / sk) * (f[i] / sk);
    }
    double h = (ny > 0 && nf > 0) ? 0.01 * std::sqrt(ny / nf) : 1e-6;
    h = std::min(h, hmax);
    (void)dir;
    (void)x;
    return h;
  }

  // Returns max over guarded channels of |delta angle| / kAngleGuard.
  double angle_step_excess(const std::vector<double>& y0, const std::vector<double>& y1) {
    double worst = 0.0;
    for (std::size_t j = 0; j < dirac.size(); ++j) {
      const Vec2 a{y0[2 * j], y0[2 * j + 1]};
      const Vec2 b{y1[2 * j], y1[2 * j + 1]};
      const double dtheta = std::atan2(wronskian(b, a), a.dot(b));
      worst = std::max(worst, std::fabs(dtheta) / kAngleGuard);
    }
    const std::size_t off = 2 * dirac.size();
    for (std::size_t j = 0; j < angle.size(); ++j)
      worst = std::max(worst, std::fabs(y1[off + j] - y0[off + j]) / kAngleGuard);
    return worst;
  }

  void emit_nodes(const StepInterpolant& interp, double x_old, double x_new,
                  const std::vector<double>& y_new, double dir) {
    std::vector<double> yq;
    while ((x_new - next_lattice_) * dir > 0) {
      if ((next_lattice_ - x_old) * dir > 0) {
        interp.eval(next_lattice_, yq);
        record(next_lattice_, yq);
      }
      next_lattice_ += dir * stride_;
    }
    record(x_new, y_new);
  }

  std::vector<Vec2> scratch_u_;
  double stride_ = 0;
  double next_lattice_ = 0;
  double h_ = 0;
  double facold_ = 1e-4;
};

// Assembles Prufer data over recorded nodes of one Dirac channel.
struct PruferAccum {
  std::vector<Vec2> u;
  std::vector<double> rho, theta;
  double theta_prev = 0;
  bool first = true;
  double theta0 = 0;

  void push(Vec2 v, double x) {
    const double r = v.norm();
    if (!(r > 0.0)) throw IntegrationError("solution vanished (rho = 0)", x);
    double th;
    if (first) {
      th = theta0;
      first = false;
    } else {
      const Vec2 prev = u.back();
      const double dtheta = std::atan2(wronskian(v, prev), prev.dot(v));
      th = theta_prev + dtheta;
    }
    u.push_back(v);
    rho.push_back(r);
    theta.push_back(th);
    theta_prev = th;
  }
};

double default_theta0(Vec2 u0) { return std::atan2(u0.x, u0.y); }

template <typename T>
void reverse_all(std::vector<T>& v) {
  std::reverse(v.begin(), v.end());
}

}  // namespace

Vec2 Trajectory::value_at(double xq) const {
  const auto it = std::lower_bound(x.begin(), x.end(), xq);
  if (it == x.begin()) return u.front();
  if (it == x.end()) return u.back();
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return u[i - 1] + t * (u[i] - u[i - 1]);
}

double Trajectory::theta_at(double xq) const {
  const auto it = std::lower_bound(x.begin(), x.end(), xq);
  if (it == x.begin()) return theta.front();
  if (it == x.end()) return theta.back();
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return theta[i - 1] + t * (theta[i] - theta[i - 1]);
}

double ScalarAngle::at(double xq) const {
  const bool inc = x.back() > x.front();
  auto cmp_lo = [inc](double a, double b) { return inc ? a < b : a > b; };
  auto it = std::lower_bound(x.begin(), x.end(), xq, cmp_lo);
  if (it == x.begin()) return angle.front();
  if (it == x.end()) return angle.back();
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return angle[i - 1] + t * (angle[i] - angle[i - 1]);
}

Trajectory integrate_dirac(const Potential& P, double lambda, double x0, Vec2 u0,
                           double x1, const IntegratorConfig& cfg,
                           std::optional<double> theta0) {
  if (!(u0.norm2() > 0.0))
    throw std::invalid_argument("integrate_dirac: initial vector must be nonzero");
  Driver drv;
  drv.dirac.push_back({&P, lambda});
  Trajectory out;
  PruferAccum acc;
  acc.theta0 = theta0.value_or(default_theta0(u0));
  drv.record = [&](double x, const std::vector<double>& y) {
    out.x.push_back(x);
    acc.push(Vec2{y[0], y[1]}, x);
  };
  drv.run(x0, {u0.x, u0.y}, x1, cfg, P.breakpoints());
  out.u = std::move(acc.u);
  out.rho = std::move(acc.rho);
  out.theta = std::move(acc.theta);
  out.launched_at_front = x1 >= x0;
  if (x1 < x0) {
    reverse_all(out.x);
    reverse_all(out.u);
    reverse_all(out.rho);
    reverse_all(out.theta);
  }
  return out;
}

ScalarAngle integrate_scalar_angle(const std::function<double(double, double)>& slope,
                                   double x0, double angle0, double x1,
                                   const IntegratorConfig& cfg,
                                   const std::vector<double>& breakpoints) {
  Driver drv;
  drv.angle.push_back({slope});
  ScalarAngle out;
  drv.record = [&](double x, const std::vector<double>& y) {
    out.x.push_back(x);
    out.angle.push_back(y[0]);
  };
  drv.run(x0, {angle0}, x1, cfg, breakpoints);
  return out;
}

JointResult integrate_joint(const JointSpec& spec, double x0, double x1,
                            const IntegratorConfig& cfg) {
  if (spec.dirac.empty()) throw std::invalid_argument("integrate_joint: no channels");
  Driver drv;
  std::vector<double> y0;
  std::vector<PruferAccum> accs(spec.dirac.size());
  std::vector<double> bps;
  for (std::size_t j = 0; j < spec.dirac.size(); ++j) {
    const auto& ch = spec.dirac[j];
    if (!(ch.u0.norm2() > 0.0))
      throw std::invalid_argument("integrate_joint: initial vector must be nonzero");
    drv.dirac.push_back({ch.pot, ch.lambda});
    y0.push_back(ch.u0.x);
    y0.push_back(ch.u0.y);
    accs[j].theta0 = ch.theta0.value_or(default_theta0(ch.u0));
    const auto& b = ch.pot->breakpoints();
    bps.insert(bps.end(), b.begin(), b.end());
  }
  for (const auto& q : spec.quadratures) drv.quad.push_back({q});
  for (std::size_t j = 0; j < spec.quadratures.size(); ++j) y0.push_back(0.0);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  JointResult res;
  res.quad.resize(spec.quadratures.size());
  const std::size_t nd = spec.dirac.size();
  drv.record = [&](double x, const std::vector<double>& y) {
    res.x.push_back(x);
    for (std::size_t j = 0; j < nd; ++j) accs[j].push(Vec2{y[2 * j], y[2 * j + 1]}, x);
    for (std::size_t j = 0; j < res.quad.size(); ++j)
      res.quad[j].push_back(y[2 * nd + j]);
  };
  drv.run(x0, y0, x1, cfg, bps);

  const bool backward = x1 < x0;
  res.dirac.resize(nd);
  for (std::size_t j = 0; j < nd; ++j) {
    Trajectory t;
    t.x = res.x;
    t.u = std::move(accs[j].u);
    t.rho = std::move(accs[j].rho);
    t.theta = std::move(accs[j].theta);
    t.launched_at_front = !backward;
    res.dirac[j] = std::move(t);
  }
  if (backward) {
    reverse_all(res.x);
    for (auto& t : res.dirac) {
      reverse_all(t.x);
      reverse_all(t.u);
      reverse_all(t.rho);
      reverse_all(t.theta);
    }
    for (auto& q : res.quad) reverse_all(q);
  }
  return res;
}

namespace {

std::function<double(double, double)> prufer_slope(const Potential& P, double lambda) {
  return [&P, lambda](double x, double th) {
    const MatrixField f = P(x);
    const double s = std::sin(th), c = std::cos(th);
    // <e(th), (lambda - phi) e(th)>
    return (lambda - f.c0 - f.c3) * s * s - 2.0 * f.c1 * s * c +
           (lambda - f.c0 + f.c3) * c * c;
  };
}

}  // namespace

double prufer_theta_end(const Potential& P, double lambda, double x_from,
                        double theta_from, double x_to, const IntegratorConfig& cfg) {
  if (x_from == x_to) return theta_from;
  Driver drv;
  drv.angle.push_back({prufer_slope(P, lambda)});
  double last = theta_from;
  drv.record = [&](double, const std::vector<double>& y) { last = y[0]; };
  drv.run(x_from, {theta_from}, x_to, cfg, P.breakpoints());
  return last;
}

ScalarAngle prufer_angle(const Potential& P, double lambda, double x_from,
                         double theta_from, double x_to, const IntegratorConfig& cfg) {
  return integrate_scalar_angle(prufer_slope(P, lambda), x_from, theta_from, x_to, cfg,
                                P.breakpoints());
}

}  // namespace relosc
