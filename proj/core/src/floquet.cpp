#include "relosc/floquet.hpp"

#include <algorithm>
#include <cmath>

#include "relosc/logscale.hpp"

namespace relosc {

namespace {

double require_period(const Potential& P) {
  if (!P.period()) throw std::invalid_argument("periodic potential required (period unset)");
  return *P.period();
}

}  // namespace

FloquetData monodromy(const Potential& P, double lambda, const IntegratorConfig& cfg,
                      std::optional<double> x_anchor) {
  const double alpha = require_period(P);
  const double x0 = x_anchor.value_or(P.interval().a);
  JointSpec spec;
  spec.dirac.push_back({&P, lambda, Vec2{1.0, 0.0}, std::nullopt});
  spec.dirac.push_back({&P, lambda, Vec2{0.0, 1.0}, std::nullopt});
  const JointResult r = integrate_joint(spec, x0, x0 + alpha, cfg);
  const Vec2 col1 = r.dirac[0].u.back();
  const Vec2 col2 = r.dirac[1].u.back();
  FloquetData fd;
  fd.lambda = lambda;
  fd.monodromy = Mat2{col1.x, col2.x, col1.y, col2.y};
  fd.discriminant = fd.monodromy.trace();
  if (std::fabs(fd.monodromy.det() - 1.0) > 1e-6)
    throw std::runtime_error("monodromy: det M deviates from 1 (integration failure)");
  return fd;
}

namespace {

BandEdge make_edge(const Potential& P, double E, EdgeKind kind, bool degenerate,
                   double scan_step, const IntegratorConfig& cfg) {
  const double alpha = *P.period();
  const double anchor = P.interval().a;
  BandEdge edge;
  edge.E = E;
  edge.kind = kind;
  edge.degenerate = degenerate;
  edge.period = alpha;
  edge.x_anchor = anchor;

  const double s = (kind == EdgeKind::periodic) ? 1.0 : -1.0;
  const Mat2 M = monodromy(P, E, cfg).monodromy;
  const Vec2 v1{M.a12, s - M.a11};
  const Vec2 v2{s - M.a22, M.a21};
  Vec2 v = (v1.norm2() >= v2.norm2()) ? v1 : v2;
  if (!(v.norm2() > 0)) v = Vec2{1.0, 0.0};  // M = s*1l (free-type closed gap)
  v = (1.0 / v.norm()) * v;
  edge.u0 = integrate_dirac(P, E, anchor, v, anchor + alpha, cfg);

  // Side: which neighbor is inside a band.
  auto disc = [&](double lam) { return monodromy(P, lam, cfg).discriminant; };
  const double h = std::max(1e-8, 0.01 * scan_step);
  const bool band_below = std::fabs(disc(E - h)) < 2.0;
  const bool band_above = std::fabs(disc(E + h)) < 2.0;
  if (band_below && band_above) edge.degenerate = true;
  edge.side = band_below ? GapSide::lower : GapSide::upper;
  (void)band_above;
  return edge;
}

}  // namespace

std::vector<BandEdge> band_edges(const Potential& P, double lo, double hi,
                                 const BandEdgeOptions& opts, const IntegratorConfig& cfg) {
  require_period(P);
  if (!(lo < hi)) throw std::invalid_argument("band_edges: window must be ordered");
  const int n = std::max(8, opts.scan_points);
  const double step = (hi - lo) / n;
  std::vector<double> lam(n + 1), disc(n + 1);
  for (int i = 0; i <= n; ++i) {
    lam[i] = lo + step * i;
    disc[i] = monodromy(P, lam[i], cfg).discriminant;
  }

  std::vector<BandEdge> edges;
  auto refine_cross = [&](double a, double b, double fa, double fb, double target) {
    // Bisection on disc - target.
    for (int it = 0; it < 200 && (b - a) > opts.root_tol; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = monodromy(P, m, cfg).discriminant - target;
      if (fm == 0.0) return m;
      if (fa * fm < 0.0) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    (void)fb;
    return 0.5 * (a + b);
  };
  // Golden-section minimum of |disc - target| for touching detection.
  auto refine_touch = [&](double a, double b, double target) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = std::fabs(monodromy(P, c, cfg).discriminant - target);
    double fd = std::fabs(monodromy(P, d, cfg).discriminant - target);
    while (b - a > opts.root_tol) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = std::fabs(monodromy(P, c, cfg).discriminant - target);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = std::fabs(monodromy(P, d, cfg).discriminant - target);
      }
    }
    const double m = 0.5 * (a + b);
    return std::make_pair(m, std::fabs(monodromy(P, m, cfg).discriminant - target));
  };

  for (const double target : {2.0, -2.0}) {
    const EdgeKind kind = target > 0 ? EdgeKind::periodic : EdgeKind::antiperiodic;
    // Roots landing exactly on scan nodes (common for closed-form backgrounds).
    for (int i = 0; i <= n; ++i) {
      if (disc[i] - target != 0.0) continue;
      if (i > 0 && disc[i - 1] - target == 0.0) continue;  // deduplicate
      const double left = (i > 0) ? disc[i - 1] - target : 0.0;
      const double right = (i < n) ? disc[i + 1] - target : 0.0;
      const bool touching = left * right > 0.0;
      edges.push_back(make_edge(P, lam[i], kind, touching, step, cfg));
    }
    // Transversal crossings.
    for (int i = 0; i < n; ++i) {
      const double fa = disc[i] - target, fb = disc[i + 1] - target;
      if (fa * fb < 0.0) {
        const double E = refine_cross(lam[i], lam[i + 1], fa, fb, target);
        edges.push_back(make_edge(P, E, kind, false, step, cfg));
      }
    }
    // Touchings: interior local minima of |disc - target| with no sign change
    // across them (closed gaps), refined before testing the tolerance.
    for (int i = 1; i < n; ++i) {
      const double fa = disc[i - 1] - target, f1 = disc[i] - target,
                   fb = disc[i + 1] - target;
      if (fa == 0.0 || f1 == 0.0 || fb == 0.0) continue;
      const double g0 = std::fabs(fa), g1 = std::fabs(f1), g2 = std::fabs(fb);
      if (g1 <= g0 && g1 <= g2 && fa * fb > 0.0 && g1 < 0.5) {
        const auto [E, gmin] = refine_touch(lam[i - 1], lam[i + 1], target);
        if (gmin < opts.touch_tol) edges.push_back(make_edge(P, E, kind, true, step, cfg));
      }
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const BandEdge& a, const BandEdge& b) { return a.E < b.E; });
  return edges;
}

namespace {

struct PeriodConstants {
  double A = 0.0;
  std::vector<double> B;
};

PeriodConstants period_constants(const BandEdge& edge, const Potential& phi0,
                                 const std::vector<TailTerm>& tail,
                                 const IntegratorConfig& cfg) {
  if (edge.u0.size() == 0) throw std::invalid_argument("band edge carries no solution");
  JointSpec spec;
  const Vec2 v0 = edge.u0.u.front();
  spec.dirac.push_back({&phi0, edge.E, v0, std::nullopt});
  spec.quadratures.push_back([&phi0](double x, const std::vector<Vec2>& us) {
    const MatrixField f = phi0(x);
    const MatrixField fhat{0.0, f.c1, f.c3};
    const double n2 = us[0].norm2();
    return fhat.quad(us[0]) / (n2 * n2);
  });
  for (const auto& t : tail) {
    const MatrixField m = t.phi1k;
    spec.quadratures.push_back(
        [m](double, const std::vector<Vec2>& us) { return m.quad(us[0]); });
  }
  const JointResult r =
      integrate_joint(spec, edge.x_anchor, edge.x_anchor + edge.period, cfg);
  PeriodConstants pc;
  pc.A = 2.0 * r.quad[0].back() / edge.period;
  for (std::size_t k = 0; k < tail.size(); ++k)
    pc.B.push_back(-r.quad[k + 1].back() / edge.period);
  return pc;
}

}  // namespace

Verdict verdict_of(const std::vector<double>& products, double A, double eq_tol) {
  if (products.empty()) return Verdict::indeterminate;
  if (std::fabs(A) < 1e-10) return Verdict::indeterminate;  // degenerate A = 0 case
  const std::size_t n = products.size() - 1;
  for (std::size_t k = 0; k < n; ++k)
    if (std::fabs(products[k] - 1.0) > eq_tol) return Verdict::indeterminate;
  if (products[n] > 1.0 + eq_tol) return Verdict::accumulate;
  if (products[n] < 1.0 - eq_tol) return Verdict::finite;
  return Verdict::indeterminate;
}

AccumulationReport accumulation_constants(const BandEdge& edge, const Potential& phi0,
                                          const std::vector<TailTerm>& tail,
                                          double eq_tol, const IntegratorConfig& cfg) {
  if (edge.degenerate)
    throw std::invalid_argument("accumulation criterion refuses closed (degenerate) gaps");
  for (std::size_t i = 0; i < tail.size(); ++i)
    if (tail[i].k != static_cast<int>(i))
      throw std::invalid_argument("tail scale indices must be contiguous 0..n");
  const PeriodConstants pc = period_constants(edge, phi0, tail, cfg);
  AccumulationReport rep;
  rep.n = static_cast<int>(tail.size()) - 1;
  rep.A = pc.A;
  rep.B = pc.B;
  rep.eq_tol = eq_tol;
  for (double b : pc.B) rep.products.push_back(pc.A * b);
  rep.verdict = verdict_of(rep.products, rep.A, eq_tol);
  return rep;
}

namespace {

ProbeResult probe_core(const std::function<double(double, double)>& slope_x, int n,
                       double x_start, const ProbeOptions& opts,
                       const IntegratorConfig& cfg) {
  if (n < 0 || n > kMaxLogDepth) throw std::invalid_argument("probe: bad log depth");
  const double s0 = iterated_log(n + 1, x_start);
  const double s1 = iterated_log(n + 1, opts.x_max);
  if (!(s1 > s0)) throw std::invalid_argument("probe: x_max too small");

  auto slope_s = [&](double s, double phi) {
    const double x = iterated_exp(n + 1, s);
    const double ln = iterated_log_scale(n, x);
    return ln * slope_x(x, phi);
  };
  IntegratorConfig pcfg = cfg;
  if (pcfg.rtol > 1e-9) pcfg.rtol = 1e-9;
  const ScalarAngle phi = integrate_scalar_angle(slope_s, s0, 0.0, s1, pcfg);

  ProbeResult res;
  res.n = n;
  res.x_start = x_start;
  res.x_max = opts.x_max;
  const int K = std::max(4, opts.windows);
  for (int j = 0; j <= K; ++j) {
    const double s = s0 + (s1 - s0) * j / K;
    res.s_checkpoints.push_back(s);
    res.phibar.push_back(phi.at(s));
  }
  for (int j = 0; j < K; ++j)
    res.advances.push_back(res.phibar[j + 1] - res.phibar[j]);

  const auto& adv = res.advances;
  const int k = static_cast<int>(adv.size());
  bool unbounded = k >= 3;
  for (int j = k - 3; j < k && unbounded; ++j)
    if (!(adv[static_cast<std::size_t>(j)] >= opts.unbounded_threshold)) unbounded = false;
  bool bounded = k >= 2;
  for (int j = k - 2; j < k && bounded; ++j)
    if (!(std::fabs(adv[static_cast<std::size_t>(j)]) <= opts.bounded_threshold))
      bounded = false;
  res.classification = unbounded  ? Boundedness::unbounded
                       : bounded ? Boundedness::bounded
                                 : Boundedness::unresolved;
  return res;
}

}  // namespace

ProbeResult boundedness_probe(const BandEdge& edge, const Potential& phi0,
                              const std::function<MatrixField(double)>& dphi,
                              double x_max, int n, const ProbeOptions& opts,
                              const IntegratorConfig& cfg) {
  const double alpha = edge.period;
  const double anchor = edge.x_anchor;

  // Fine one-period solution for the averaged coefficients.
  IntegratorConfig fine = cfg;
  fine.dense_stride = alpha / 1024.0;
  const Trajectory u0 =
      integrate_dirac(phi0, edge.E, anchor, edge.u0.u.front(), anchor + alpha, fine);
  auto u0_periodic = [&](double r) {
    double t = std::fmod(r - anchor, alpha);
    if (t < 0) t += alpha;
    return u0.value_at(anchor + t);
  };

  const double A = period_constants(edge, phi0, {}, cfg).A;

  // Bbar(x) = -(1/alpha) int_x^{x+alpha} <u0(r), r^2 dphi(r) u0(r)> dr (composite
  // Simpson; the solution enters through periodic quadratic forms only).
  auto bbar = [&](double x) {
    const int panels = 128;
    const double h = alpha / panels;
    auto f = [&](double r) {
      const Vec2 u = u0_periodic(r);
      return -(r * r) * dphi(r).quad(u);
    };
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
      const double a = x + i * h;
      acc += f(a) + 4.0 * f(a + 0.5 * h) + f(a + h);
    }
    return acc * h / 6.0 / alpha;
  };

  auto slope_x = [&](double x, double phi) {
    const double sp = std::sin(phi), cp = std::cos(phi);
    return (A * sp * sp + sp * cp + bbar(x) * cp * cp) / x;
  };

  ProbeOptions o = opts;
  o.x_max = x_max;
  double x_start = opts.x_start;
  if (x_start <= 0.0)
    x_start = std::max({anchor + alpha, 2.0 * log_threshold(n), 1.0});
  return probe_core(slope_x, n, x_start, o, cfg);
}

ProbeResult scalar_boundedness_probe(const std::function<double(double)>& Q, int n,
                                     double x_start, const ProbeOptions& opts,
                                     const IntegratorConfig& cfg) {
  auto slope_x = [&](double x, double phi) {
    const double sp = std::sin(phi), cp = std::cos(phi);
    return (sp * sp + sp * cp - x * x * Q(x) * cp * cp) / x;
  };
  return probe_core(slope_x, n, x_start, opts, cfg);
}

long long CensusTable::count_at(double delta, int n_index) const {
  for (const auto& r : rows)
    if (r.n_index == n_index && std::fabs(r.delta - delta) < 1e-12 * (1.0 + delta))
      return r.count;
  throw std::out_of_range("census: no such row");
}

bool CensusTable::stabilized(int tail) const {
  // Group rows by delta; require the last `tail` counts equal in each group.
  std::vector<double> deltas;
  for (const auto& r : rows)
    if (std::find(deltas.begin(), deltas.end(), r.delta) == deltas.end())
      deltas.push_back(r.delta);
  for (double d : deltas) {
    std::vector<long long> counts;
    for (const auto& r : rows)
      if (r.delta == d) counts.push_back(r.count);
    if (static_cast<int>(counts.size()) < tail) return false;
    for (std::size_t i = counts.size() - tail + 1; i < counts.size(); ++i)
      if (counts[i] != counts[i - 1]) return false;
  }
  return true;
}

CensusTable gap_eigenvalue_census(const Potential& p1, double a, BoundarySpec bc,
                                  const BandEdge& edge,
                                  const std::vector<double>& deltas,
                                  const TruncationSchedule& sched,
                                  const IntegratorConfig& cfg) {
  CensusTable table;
  const auto truncations = sched.points();
  for (std::size_t m = 0; m < deltas.size(); ++m) {
    for (std::size_t j = 0; j < truncations.size(); ++j) {
      const double bn = truncations[j];
      OperatorSpec H1{p1, Interval{a, bn, false}, bc};
      double delta = deltas[m];
      long long count = 0;
      bool done = false;
      for (int attempt = 0; attempt < 6 && !done; ++attempt) {
        const double l0 = edge.side == GapSide::upper ? edge.E - delta : edge.E;
        const double l1 = edge.side == GapSide::upper ? edge.E : edge.E + delta;
        try {
          count = count_window(H1, l0, l1, WindowFlags{}, cfg);
          done = true;
        } catch (const BoundaryAmbiguityError&) {
          delta *= 1.0 + 3e-7;  // nudge the window off the eigenvalue
        }
      }
      if (!done)
        throw BoundaryAmbiguityError("census: window endpoint could not be disambiguated");
      table.rows.push_back(CensusRow{deltas[m], static_cast<int>(j), bn, count});
    }
  }
  return table;
}

}  // namespace relosc
