#include "relosc/logscale.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relosc {

namespace {

const std::vector<double>& thresholds_table() {
  // e_{-1} = -inf, e_0 = 0, e_1 = 1, e_2 = e, e_3 = e^e, e_4 = e^(e^e)
  static const std::vector<double> table = [] {
    std::vector<double> t;
    t.push_back(-std::numeric_limits<double>::infinity());
    for (int n = 0; n <= kMaxLogDepth; ++n) t.push_back(std::exp(t.back()));
    return t;
  }();
  return table;
}

void check_depth(int n) {
  if (n < 0 || n > kMaxLogDepth)
    throw std::invalid_argument("iterated log depth must be in [0, 4]");
}

}  // namespace

double log_threshold(int n) {
  if (n < -1 || n > kMaxLogDepth)
    throw std::invalid_argument("log_threshold: n must be in [-1, 4]");
  return thresholds_table()[static_cast<std::size_t>(n + 1)];
}

double iterated_log(int n, double x) {
  check_depth(n);
  if (!(x > log_threshold(n - 1)))
    throw std::domain_error("iterated_log: x at or below continuity threshold");
  double v = x;
  for (int j = 1; j <= n; ++j) {
    if (v == 0.0) throw std::domain_error("iterated_log: log of zero");
    v = std::log(std::fabs(v));
  }
  return v;
}

double iterated_log_scale(int n, double x) {
  check_depth(n);
  double prod = x;
  double v = x;
  for (int j = 1; j <= n; ++j) {
    if (v == 0.0) throw std::domain_error("iterated_log_scale: log of zero");
    v = std::log(std::fabs(v));
    prod *= v;
  }
  return prod;
}

double iterated_exp(int n, double s) {
  check_depth(n);
  double v = s;
  for (int j = 0; j < n; ++j) v = std::exp(v);
  return v;
}

LogScaleTable LogScaleTable::make(int n) {
  check_depth(n);
  LogScaleTable t;
  t.n = n;
  for (int j = -1; j <= n; ++j) t.thresholds.push_back(log_threshold(j));
  return t;
}

}  // namespace relosc
