#pragma once

// Floquet theory for periodic Dirac backgrounds: monodromy and discriminant,
// band-edge location, the band-edge accumulation criterion with iterated-log
// tails, the averaged-angle boundedness probe and the gap eigenvalue census.

#include <functional>
#include <optional>
#include <vector>

#include "relosc/ode.hpp"
#include "relosc/potential.hpp"
#include "relosc/spectral.hpp"

namespace relosc {

struct FloquetData {
  double lambda = 0.0;
  Mat2 monodromy;       // solution data at x mapped to x + alpha
  double discriminant = 0.0;  // tr M(lambda)
};

FloquetData monodromy(const Potential& P, double lambda,
                      const IntegratorConfig& cfg = {},
                      std::optional<double> x_anchor = std::nullopt);

enum class EdgeKind { periodic, antiperiodic };
enum class GapSide { lower, upper };  // E is the lower/upper endpoint of the gap

struct BandEdge {
  double E = 0.0;
  EdgeKind kind = EdgeKind::periodic;
  GapSide side = GapSide::lower;
  bool degenerate = false;  // |disc| = 2 touching without crossing (closed gap)
  Trajectory u0;            // (anti-)periodic solution over one period
  double period = 0.0;
  double x_anchor = 0.0;
};

struct BandEdgeOptions {
  int scan_points = 400;
  double root_tol = 1e-10;
  double touch_tol = 1e-8;
};

std::vector<BandEdge> band_edges(const Potential& P, double lo, double hi,
                                 const BandEdgeOptions& opts = {},
                                 const IntegratorConfig& cfg = {});

enum class Verdict { accumulate, finite, indeterminate };

struct AccumulationReport {
  int n = 0;
  double A = 0.0;
  std::vector<double> B;         // B_0 .. B_n
  std::vector<double> products;  // A * B_k
  Verdict verdict = Verdict::indeterminate;
  double eq_tol = 1e-6;
};

// A = (2/alpha) int_0^alpha <u,((m+phi_sc) sigma3 + phi_am sigma1) u>/|u|^4 dx,
// B_k = -(1/alpha) int_0^alpha <u, phi1k u> dx, products and chain verdict.
AccumulationReport accumulation_constants(const BandEdge& edge, const Potential& phi0,
                                          const std::vector<TailTerm>& tail,
                                          double eq_tol = 1e-6,
                                          const IntegratorConfig& cfg = {});

// Chain condition: A B_0 = ... = A B_{n-1} = 1 within eq_tol, then
// A B_n > 1 -> accumulate, A B_n < 1 -> finite, within eq_tol of 1 (or broken
// chain, or A = 0) -> indeterminate.
Verdict verdict_of(const std::vector<double>& products, double A, double eq_tol);

enum class Boundedness { bounded, unbounded, unresolved };

struct ProbeResult {
  Boundedness classification = Boundedness::unresolved;
  int n = 0;
  double x_start = 0.0, x_max = 0.0;
  std::vector<double> s_checkpoints;  // in the log_{n+1} clock
  std::vector<double> phibar;         // averaged angle at the checkpoints
  std::vector<double> advances;       // per-window angle advance
};

struct ProbeOptions {
  double x_max = 1e12;
  int windows = 12;
  double unbounded_threshold = 0.03;  // rad per window, sustained
  double bounded_threshold = 0.01;    // rad per window, final windows
  double x_start = 0.0;               // 0 -> automatic
};

// Integrates the Kepler-transformed, period-averaged relative Prufer angle
//   phibar' = (1/x) (A sin^2 + sin cos + Bbar(x) cos^2)
// in the log_{n+1} clock and classifies its growth.  dphi is the perturbation
// phi1 - phi0 (x^2 dphi bounded).
ProbeResult boundedness_probe(const BandEdge& edge, const Potential& phi0,
                              const std::function<MatrixField(double)>& dphi,
                              double x_max, int n, const ProbeOptions& opts = {},
                              const IntegratorConfig& cfg = {});

// Scalar model probe for phi' = (1/x)(sin^2 + sin cos - x^2 Q(x) cos^2).
ProbeResult scalar_boundedness_probe(const std::function<double(double)>& Q, int n,
                                     double x_start, const ProbeOptions& opts = {},
                                     const IntegratorConfig& cfg = {});

struct CensusRow {
  double delta = 0.0;
  int n_index = 0;
  double b_n = 0.0;
  long long count = 0;
};

struct CensusTable {
  std::vector<CensusRow> rows;

  long long count_at(double delta, int n_index) const;
  // Counts equal over the last `tail` truncations for every delta.
  bool stabilized(int tail = 2) const;
};

// Eigenvalue counts of H1 in gap windows hugging the edge, over a truncation
// schedule: windows (E - delta, E) for an upper gap endpoint, (E, E + delta)
// for a lower one.
CensusTable gap_eigenvalue_census(const Potential& p1, double a, BoundarySpec bc,
                                  const BandEdge& edge,
                                  const std::vector<double>& deltas,
                                  const TruncationSchedule& sched = {},
                                  const IntegratorConfig& cfg = {});

}  // namespace relosc
