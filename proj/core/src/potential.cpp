#include "relosc/potential.hpp"

#include <algorithm>
#include <cmath>

#include "relosc/logscale.hpp"

namespace relosc {

MatrixField TailSpec::eval(double x) const {
  if (x < start) return {};
  MatrixField acc{};
  for (const auto& t : terms) {
    const double L = iterated_log_scale(t.k, x);
    acc = acc + (0.25 / (L * L)) * t.phi1k;
  }
  return acc;
}

double Potential::TrigComponent::eval(double x, double alpha) const {
  const double w = 2.0 * M_PI / alpha;
  double v = cst;
  for (std::size_t m = 0; m < cos_coef.size(); ++m)
    v += cos_coef[m] * std::cos(w * static_cast<double>(m + 1) * x);
  for (std::size_t m = 0; m < sin_coef.size(); ++m)
    v += sin_coef[m] * std::sin(w * static_cast<double>(m + 1) * x);
  return v;
}

Potential Potential::constant(Interval iv, MatrixField m) {
  Potential p;
  p.iv_ = iv;
  p.eval_ = [m](double) { return m; };
  return p;
}

Potential Potential::step(Interval iv, std::vector<double> breakpoints,
                          std::vector<MatrixField> values) {
  if (values.size() != breakpoints.size() + 1)
    throw std::invalid_argument("step potential: values.size() != breakpoints.size() + 1");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    throw std::invalid_argument("step potential: breakpoints must be sorted");
  Potential p;
  p.iv_ = iv;
  p.breakpoints_ = breakpoints;
  auto bp = std::make_shared<std::vector<double>>(std::move(breakpoints));
  auto vals = std::make_shared<std::vector<MatrixField>>(std::move(values));
  p.eval_ = [bp, vals](double x) {
    const auto it = std::upper_bound(bp->begin(), bp->end(), x);
    return (*vals)[static_cast<std::size_t>(it - bp->begin())];
  };
  return p;
}

Potential Potential::trig_periodic(Interval iv, double alpha, TrigComponent c0,
                                   TrigComponent c1, TrigComponent c3) {
  if (!(alpha > 0.0)) throw std::invalid_argument("trig_periodic: period must be positive");
  Potential p;
  p.iv_ = iv;
  p.period_ = alpha;
  p.eval_ = [alpha, c0, c1, c3](double x) {
    return MatrixField{c0.eval(x, alpha), c1.eval(x, alpha), c3.eval(x, alpha)};
  };
  return p;
}

Potential Potential::grid(Interval iv, std::vector<double> x, std::vector<double> c0,
                          std::vector<double> c1, std::vector<double> c3) {
  const std::size_t n = x.size();
  if (n < 2 || c0.size() != n || c1.size() != n || c3.size() != n)
    throw std::invalid_argument("grid potential: arrays must share a length >= 2");
  if (!std::is_sorted(x.begin(), x.end()))
    throw std::invalid_argument("grid potential: x must be sorted");
  Potential p;
  p.iv_ = iv;
  struct Data {
    std::vector<double> x, c0, c1, c3;
  };
  auto d = std::make_shared<Data>(Data{std::move(x), std::move(c0), std::move(c1), std::move(c3)});
  p.eval_ = [d](double xq) {
    const auto& xs = d->x;
    if (xq <= xs.front()) return MatrixField{d->c0.front(), d->c1.front(), d->c3.front()};
    if (xq >= xs.back()) return MatrixField{d->c0.back(), d->c1.back(), d->c3.back()};
    const auto it = std::upper_bound(xs.begin(), xs.end(), xq);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (xq - xs[i - 1]) / (xs[i] - xs[i - 1]);
    auto lerp = [t](double u, double v) { return u + t * (v - u); };
    return MatrixField{lerp(d->c0[i - 1], d->c0[i]), lerp(d->c1[i - 1], d->c1[i]),
                       lerp(d->c3[i - 1], d->c3[i])};
  };
  return p;
}

Potential Potential::from_function(Interval iv, std::function<MatrixField(double)> f,
                                   std::vector<double> breakpoints,
                                   std::optional<double> period) {
  Potential p;
  p.iv_ = iv;
  p.eval_ = std::move(f);
  p.breakpoints_ = std::move(breakpoints);
  p.period_ = period;
  return p;
}

Potential Potential::with_tail(const Potential& base, TailSpec tail) {
  for (std::size_t i = 0; i < tail.terms.size(); ++i)
    if (tail.terms[i].k != static_cast<int>(i))
      throw std::invalid_argument("tail: scale indices must be contiguous 0..n");
  Potential p;
  p.iv_ = base.iv_;
  p.breakpoints_ = base.breakpoints_;
  p.breakpoints_.push_back(tail.start);
  std::sort(p.breakpoints_.begin(), p.breakpoints_.end());
  p.tail_ = tail;
  auto beval = base.eval_;
  p.eval_ = [beval, tail](double x) { return beval(x) + tail.eval(x); };
  return p;
}

Potential Potential::linear_mix(const Potential& p0, const Potential& p1, double eps) {
  Potential p;
  p.iv_ = p0.iv_;
  p.breakpoints_ = p0.breakpoints_;
  p.breakpoints_.insert(p.breakpoints_.end(), p1.breakpoints_.begin(), p1.breakpoints_.end());
  std::sort(p.breakpoints_.begin(), p.breakpoints_.end());
  p.breakpoints_.erase(std::unique(p.breakpoints_.begin(), p.breakpoints_.end()),
                       p.breakpoints_.end());
  auto e0 = p0.eval_;
  auto e1 = p1.eval_;
  p.eval_ = [e0, e1, eps](double x) { return (1.0 - eps) * e0(x) + eps * e1(x); };
  return p;
}

Potential Potential::shifted(const Potential& p, double shift) {
  Potential q = p;
  auto e = p.eval_;
  q.eval_ = [e, shift](double x) { return e(x) + MatrixField::identity(shift); };
  return q;
}

Potential gauge_magnetic(const MagneticPotential& p) { return p.base; }

double gauge_phase(const MagneticPotential& p, double x0, double x, double tol) {
  return adaptive_simpson(p.mg, x0, x, tol);
}

Potential radial_transform(int k, const Potential& p) {
  if (k == 0)
    throw std::invalid_argument("radial_transform: k must be a nonzero integer");
  const Interval iv = p.interval();
  if (iv.a < 0.0)
    throw std::invalid_argument("radial_transform: potential must live on (0, inf)");
  const double kk = static_cast<double>(k);
  return Potential::from_function(
      iv,
      [p, kk](double r) {
        const double c3 = std::sqrt(1.0 + kk * kk / (r * r)) - 1.0;
        const double c0 = kk / (2.0 * (r * r + kk * kk));
        return p(r) + MatrixField{c0, 0.0, c3};
      },
      p.breakpoints(), p.period());
}

MatrixField radial_r2_leading(int k) {
  const double kk = static_cast<double>(k);
  return {kk / 2.0, 0.0, kk * kk / 2.0};
}

double radial_bc_shift(int k, double r) {
  return 0.5 * std::atan(static_cast<double>(k) / r);
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson(a, b, fa, fm, fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace relosc
