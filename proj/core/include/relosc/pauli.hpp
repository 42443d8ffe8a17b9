#pragma once

// Small fixed-size linear algebra for the 2x2 real Dirac system, and the
// Pauli-basis representation of symmetric matrix potentials.
//
// Conventions: a spinor u = (u1, u2) is real; the symplectic unit
// J = i*sigma2 = [[0, 1], [-1, 0]] so that tau u = lambda u reads
// u' = J (lambda*1l - phi(x)) u.

#include <cmath>

namespace relosc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

// W(u, v) = u1 v2 - u2 v1.
inline double wronskian(Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; }

// J u = (u2, -u1) with J = i*sigma2.
inline Vec2 jmul(Vec2 u) { return {u.y, -u.x}; }

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  Vec2 operator*(Vec2 u) const { return {a11 * u.x + a12 * u.y, a21 * u.x + a22 * u.y}; }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
  }
  friend Mat2 operator*(double s, const Mat2& a) {
    return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
  }
  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

inline Mat2 pauli1() { return {0.0, 1.0, 1.0, 0.0}; }
inline Mat2 pauli3() { return {1.0, 0.0, 0.0, -1.0}; }

// A real symmetric 2x2 matrix field in the Pauli basis:
//   c0*1l + c1*sigma1 + c3*sigma3 = [[c0+c3, c1], [c1, c0-c3]].
// The sigma2 (magnetic) component is excluded by construction; magnetic
// inputs are removed by the gauge transformation at ingestion.
struct MatrixField {
  double c0 = 0.0;
  double c1 = 0.0;
  double c3 = 0.0;

  Mat2 as_matrix() const { return {c0 + c3, c1, c1, c0 - c3}; }

  Vec2 apply(Vec2 u) const {
    return {(c0 + c3) * u.x + c1 * u.y, c1 * u.x + (c0 - c3) * u.y};
  }

  // <u, phi u>
  double quad(Vec2 u) const { return u.dot(apply(u)); }

  double trace() const { return 2.0 * c0; }

  friend MatrixField operator+(MatrixField a, MatrixField b) {
    return {a.c0 + b.c0, a.c1 + b.c1, a.c3 + b.c3};
  }
  friend MatrixField operator-(MatrixField a, MatrixField b) {
    return {a.c0 - b.c0, a.c1 - b.c1, a.c3 - b.c3};
  }
  friend MatrixField operator*(double s, MatrixField a) {
    return {s * a.c0, s * a.c1, s * a.c3};
  }

  static MatrixField identity(double s = 1.0) { return {s, 0.0, 0.0}; }
};

inline double quadratic_form(const MatrixField& f, Vec2 u) { return f.quad(u); }

// Right-hand side of the first-order system: u' = J (lambda*1l - phi) u.
// Substituting back, (1/i) sigma2 u' + phi u = lambda u holds identically.
inline Vec2 dirac_rhs(const MatrixField& phi, double lambda, Vec2 u) {
  const Vec2 w{(lambda - phi.c0 - phi.c3) * u.x - phi.c1 * u.y,
               -phi.c1 * u.x + (lambda - phi.c0 + phi.c3) * u.y};
  return jmul(w);
}

}  // namespace relosc
