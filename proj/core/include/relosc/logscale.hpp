#pragma once

// Iterated logarithms log_n and the scale functions L_n(x) = x log(x) ... log_n(x),
// with the convention log(x) = log|x| for negative arguments.
//
// Thresholds: e_{-1} = -inf, e_n = exp(e_{n-1});  log_n is continuous for
// x > e_{n-1} and positive for x > e_n.

#include <vector>

namespace relosc {

// Largest supported iteration depth; e_4 ~ 3.8e6 already exceeds any input
// this library is used on at desk scale.
inline constexpr int kMaxLogDepth = 4;

// e_n for n in [-1, kMaxLogDepth].
double log_threshold(int n);

// log_0(x) = x, log_n(x) = log|log_{n-1}(x)|.  Requires x > e_{n-1}.
double iterated_log(int n, double x);

// L_n(x) = prod_{j=0}^{n} log_j(x) = 1 / log_{n+1}'(x).  Requires x > e_{n-1};
// positive for x > e_n.
double iterated_log_scale(int n, double x);

// x = exp_n(s), the inverse of s = log_n(x) on the positive branch.
double iterated_exp(int n, double s);

struct LogScaleTable {
  int n = 0;
  std::vector<double> thresholds;  // e_{-1} .. e_n

  static LogScaleTable make(int n);
};

}  // namespace relosc
