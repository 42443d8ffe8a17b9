#include <doctest.h>

#include <cmath>

#include "relosc/ode.hpp"
#include "support/testutil.hpp"

using namespace relosc;

namespace {

Potential free_potential(double a, double b) {
  return Potential::constant(Interval{a, b, false}, MatrixField{});
}

}  // namespace

TEST_CASE("free massless solution is a rotation") {
  // phi = 0, lambda = 1, u0 = (0,1): u(x) = (sin x, cos x), theta(x) = x
  const Potential P = free_potential(0.0, 10.0);
  const Trajectory t = integrate_dirac(P, 1.0, 0.0, Vec2{0, 1}, 10.0);
  REQUIRE(t.size() > 10);
  for (std::size_t i = 0; i < t.size(); i += t.size() / 17 + 1) {
    CHECK(t.u[i].x == doctest::Approx(std::sin(t.x[i])).epsilon(1e-9));
    CHECK(t.u[i].y == doctest::Approx(std::cos(t.x[i])).epsilon(1e-9));
    CHECK(t.theta[i] == doctest::Approx(t.x[i]).epsilon(1e-9));
    CHECK(t.rho[i] == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Trajectory invariants: reconstruction and angle continuity.
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    CHECK(t.u[i].x == doctest::Approx(t.rho[i] * std::sin(t.theta[i])).epsilon(1e-9));
    CHECK(t.u[i].y == doctest::Approx(t.rho[i] * std::cos(t.theta[i])).epsilon(1e-9));
    CHECK(std::fabs(t.theta[i + 1] - t.theta[i]) < 0.5 * M_PI);
  }
}

TEST_CASE("lambda = 0 free solution is constant") {
  const Potential P = free_potential(0.0, 5.0);
  const Trajectory t = integrate_dirac(P, 0.0, 0.0, Vec2{0.6, -0.8}, 5.0);
  CHECK(t.u.back().x == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(t.u.back().y == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(t.theta.back() == doctest::Approx(t.theta.front()).epsilon(1e-12));
}

TEST_CASE("flow reversal returns the initial data") {
  testutil::Rng rng(23);
  const Potential P = testutil::random_step_potential(rng, 0.0, 1.0, 5, 2.0);
  const double lam = 1.3;
  const Vec2 u0{0.3, 1.1};
  const Trajectory fwd = integrate_dirac(P, lam, 0.0, u0, 1.0);
  const Vec2 u1 = fwd.u.back();
  const Trajectory bwd = integrate_dirac(P, lam, 1.0, u1, 0.0);
  // round trip at ~100x the local tolerance (global error accumulation)
  const Vec2 u0r = bwd.u.front();
  CHECK(std::fabs(u0r.x - u0.x) < 1e-8);
  CHECK(std::fabs(u0r.y - u0.y) < 1e-8);
}

TEST_CASE("linearity in the initial data") {
  testutil::Rng rng(29);
  const Potential P = testutil::random_step_potential(rng, 0.0, 1.0, 4, 1.5);
  const Vec2 u0{1.0, -0.4};
  const double c = 2.7;
  const Trajectory t1 = integrate_dirac(P, 0.8, 0.0, u0, 1.0);
  const Trajectory t2 = integrate_dirac(P, 0.8, 0.0, c * u0, 1.0);
  CHECK(t2.u.back().x == doctest::Approx(c * t1.u.back().x).epsilon(1e-9));
  CHECK(t2.u.back().y == doctest::Approx(c * t1.u.back().y).epsilon(1e-9));
}

TEST_CASE("Wronskian conservation for equal potentials") {
  testutil::Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Potential P = testutil::random_step_potential(rng, 0.0, 1.0, 6, 2.0);
    const double lam = rng.uniform(-2, 2);
    JointSpec spec;
    spec.dirac.push_back({&P, lam, Vec2{1, 0}, std::nullopt});
    spec.dirac.push_back({&P, lam, Vec2{0.3, 0.9}, std::nullopt});
    const JointResult r = integrate_joint(spec, 0.0, 1.0);
    const double w0 = wronskian(r.dirac[0].u.front(), r.dirac[1].u.front());
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      const double w = wronskian(r.dirac[0].u[i], r.dirac[1].u[i]);
      CHECK(w == doctest::Approx(w0).epsilon(1e-8));
    }
  }
}

TEST_CASE("determinism: identical inputs give bit-identical output") {
  testutil::Rng rng(37);
  const Potential P = testutil::random_step_potential(rng, 0.0, 1.0, 5, 2.0);
  const Trajectory a = integrate_dirac(P, 1.1, 0.0, Vec2{0.2, 1.0}, 1.0);
  const Trajectory b = integrate_dirac(P, 1.1, 0.0, Vec2{0.2, 1.0}, 1.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.x[i] == b.x[i]);
    CHECK(a.u[i].x == b.u[i].x);
    CHECK(a.u[i].y == b.u[i].y);
    CHECK(a.theta[i] == b.theta[i]);
  }
}

TEST_CASE("scalar angle integration") {
  const auto zero = [](double, double) { return 0.0; };
  const ScalarAngle s0 = integrate_scalar_angle(zero, 0.0, 0.7, 3.0);
  CHECK(s0.back() == doctest::Approx(0.7));

  const auto one = [](double, double) { return 1.0; };
  const ScalarAngle s1 = integrate_scalar_angle(one, 0.0, 0.2, 3.0);
  CHECK(s1.back() == doctest::Approx(3.2).epsilon(1e-10));

  // per-step change below pi/2
  const auto fast = [](double, double) { return 40.0; };
  const ScalarAngle s2 = integrate_scalar_angle(fast, 0.0, 0.0, 2.0);
  for (std::size_t i = 0; i + 1 < s2.x.size(); ++i)
    CHECK(std::fabs(s2.angle[i + 1] - s2.angle[i]) < 0.5 * M_PI);
}

TEST_CASE("prufer endpoint transport matches the cartesian integration") {
  testutil::Rng rng(41);
  for (int trial = 0; trial < 4; ++trial) {
    const Potential P = testutil::random_step_potential(rng, 0.0, 1.5, 5, 2.0);
    const double lam = rng.uniform(-3, 3);
    const double th0 = rng.uniform(0, M_PI);
    const Trajectory t =
        integrate_dirac(P, lam, 0.0, Vec2{std::sin(th0), std::cos(th0)}, 1.5, {}, th0);
    const double th_end = prufer_theta_end(P, lam, 0.0, th0, 1.5);
    CHECK(th_end == doctest::Approx(t.theta.back()).epsilon(1e-8));
  }
}

TEST_CASE("dense stride produces the requested lattice") {
  const Potential P = free_potential(0.0, 1.0);
  IntegratorConfig cfg;
  cfg.dense_stride = 0.125;
  const Trajectory t = integrate_dirac(P, 1.0, 0.0, Vec2{0, 1}, 1.0, cfg);
  for (double want : {0.125, 0.25, 0.5, 0.875}) {
    bool found = false;
    for (double x : t.x)
      if (std::fabs(x - want) < 1e-12) found = true;
    CHECK(found);
  }
}

TEST_CASE("grid potential integrates like its closed form") {
  // a grid sampling of a linear-in-x electrostatic component: theta' = lam - c0(x)
  std::vector<double> xs, c0;
  for (int i = 0; i <= 100; ++i) {
    xs.push_back(i * 0.01);
    c0.push_back(0.5 * i * 0.01);  // c0(x) = 0.5 x, exactly representable
  }
  const Potential g = Potential::grid(Interval{0, 1, false}, xs, c0,
                                      std::vector<double>(xs.size(), 0.0),
                                      std::vector<double>(xs.size(), 0.0));
  const double lam = 2.0;
  const double theta = prufer_theta_end(g, lam, 0.0, 0.0, 1.0);
  // integral of lam - 0.5 x over [0, 1]
  CHECK(theta == doctest::Approx(lam - 0.25).epsilon(1e-8));
}

TEST_CASE("breakpoints are honored (step potential accuracy)") {
  // A potential jump inside the range must not degrade the local error:
  // compare against the closed-form composition of two constant pieces.
  const double m1 = 0.7, m2 = -1.3, xj = 0.37, L = 1.0, lam = 2.0;
  const Potential P = Potential::step(Interval{0, L, false}, {xj},
                                      {MatrixField{m1, 0, 0}, MatrixField{m2, 0, 0}});
  const Trajectory t = integrate_dirac(P, lam, 0.0, Vec2{0, 1}, L);
  // constant electrostatic piece: rotation at rate (lam - m)
  const double th_exact = (lam - m1) * xj + (lam - m2) * (L - xj);
  CHECK(t.theta.back() == doctest::Approx(th_exact).epsilon(1e-10));
}
