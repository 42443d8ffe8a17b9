// relosc: command-line front end for relative oscillation analysis of 1-D
// Dirac operators.  Jobs are JSON documents (see docs/schemas.md); results are
// written as schema-versioned JSON plus plot-ready CSV tables.
//
// Exit codes: 0 success, 1 input error, 2 numerical non-convergence (partial
// artifacts are still written).

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "relosc/floquet.hpp"
#include "relosc/json_io.hpp"
#include "relosc/logscale.hpp"
#include "relosc/ode.hpp"
#include "relosc/potential.hpp"
#include "relosc/relative.hpp"
#include "relosc/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace relosc;

namespace {

struct CommonArgs {
  std::string input;
  std::string outdir = ".";
  double rtol = 0.0;
  double atol = 0.0;
  std::vector<double> window;
  int n_tail = -1;
};

IntegratorConfig make_cfg(const CommonArgs& a) {
  IntegratorConfig cfg;
  if (a.rtol > 0) cfg.rtol = a.rtol;
  if (a.atol > 0) cfg.atol = a.atol;
  return cfg;
}

json read_job(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
}

int thread_cap() {
  if (const char* env = std::getenv("RELOSC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Deterministic parallel map: results land in preallocated slots, merged in
// index order regardless of scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_cap()), n ? n : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        f(i);
      }
    });
  for (auto& t : pool) t.join();
}

OperatorSpec operator_from(const json& j, const char* field) {
  if (!j.contains(field)) throw ValidationError(std::string("missing field: ") + field);
  return operator_from_json(j[field].dump());
}

Potential potential_from(const json& j, const char* field) {
  if (!j.contains(field)) throw ValidationError(std::string("missing field: ") + field);
  return potential_from_json(j[field].dump());
}

BoundarySpec bc_from(const json& j) {
  double alpha = 0.0, beta = M_PI;
  if (j.contains("bc")) {
    if (j["bc"].contains("alpha")) alpha = j["bc"]["alpha"].get<double>();
    if (j["bc"].contains("beta")) beta = j["bc"]["beta"].get<double>();
  }
  return BoundarySpec::normalized(alpha, beta);
}

TruncationSchedule truncation_from(const json& j) {
  TruncationSchedule s;
  if (j.contains("truncation")) {
    const auto& t = j["truncation"];
    if (t.contains("b0")) s.b0 = t["b0"].get<double>();
    if (t.contains("factor")) s.factor = t["factor"].get<double>();
    if (t.contains("count")) s.count = t["count"].get<int>();
    if (t.contains("stable_tail")) s.stable_tail = t["stable_tail"].get<int>();
  }
  return s;
}

std::vector<TailTerm> tail_from(const json& j) {
  std::vector<TailTerm> terms;
  if (!j.contains("tail") || !j["tail"].contains("terms"))
    throw ValidationError("missing field: tail.terms");
  for (const auto& t : j["tail"]["terms"]) {
    TailTerm term;
    term.k = t.value("k", -1);
    term.phi1k = MatrixField{t.value("c0", 0.0), t.value("c1", 0.0), t.value("c3", 0.0)};
    terms.push_back(term);
  }
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].k != static_cast<int>(i))
      throw ValidationError("tail: scale indices must be contiguous 0..n");
  return terms;
}

json flip_json(const FlipCount& fc) { return json::parse(to_json(fc)); }

json result_header(const std::string& command) {
  json j;
  j["schema"] = "relosc/v1";
  j["command"] = command;
  return j;
}

std::pair<double, double> window_of(const json& job, const CommonArgs& args) {
  if (args.window.size() == 2) return {args.window[0], args.window[1]};
  if (job.contains("window") && job["window"].is_array() && job["window"].size() == 2)
    return {job["window"][0].get<double>(), job["window"][1].get<double>()};
  throw ValidationError("window required ([lo, hi] in the job or --window)");
}

int run_solve(const json& job, const CommonArgs& args) {
  const OperatorSpec H = operator_from(job, "operator");
  const double lambda = job.value("lambda", 0.0);
  const Endpoint from =
      job.value("launch", std::string("a")) == "b" ? Endpoint::b : Endpoint::a;
  const Trajectory t = boundary_solution(H, lambda, from, make_cfg(args));
  std::ostringstream csv;
  write_csv(csv, t);
  write_text(fs::path(args.outdir) / "trajectory.csv", csv.str());
  json res = result_header("solve");
  res["lambda"] = lambda;
  res["theta_front"] = t.theta.front();
  res["theta_back"] = t.theta.back();
  res["nodes"] = t.size();
  write_text(fs::path(args.outdir) / "result.json", res.dump(2));
  return 0;
}

int run_flips(const json& job, const CommonArgs& args) {
  const OperatorSpec H0 = operator_from(job, "operator0");
  const OperatorSpec H1 = job.contains("operator1") ? operator_from(job, "operator1") : H0;
  const IntegratorConfig cfg = make_cfg(args);

  // Each slot is a boundary solution of one of the two operators; the count
  // uses the angle difference (second minus first) at both interval ends.
  auto slot_angles = [&](const json& s) {
    const OperatorSpec& H = (s.value("op", 0) == 1) ? H1 : H0;
    const double lam = s.value("lambda", 0.0);
    const bool from_a = s.value("endpoint", std::string("a")) == "a";
    if (from_a)
      return std::pair<double, double>{H.bc.theta_minus(),
                                       theta_minus_at_b(H, lam, cfg)};
    return std::pair<double, double>{theta_plus_at_a(H, lam, cfg), H.bc.theta_plus()};
  };
  if (!job.contains("first") || !job.contains("second"))
    throw ValidationError("flips: first and second solution slots required");
  const auto [fa, fb] = slot_angles(job["first"]);
  const auto [sa, sb] = slot_angles(job["second"]);
  const long long count = flip_count(sa - fa, sb - fb);

  json res = result_header("flips");
  res["value"] = count;
  res["delta_a"] = sa - fa;
  res["delta_b"] = sb - fb;
  write_text(fs::path(args.outdir) / "result.json", res.dump(2));
  std::cout << "value " << count << "\n";
  return 0;
}

int run_count(const json& job, const CommonArgs& args) {
  const OperatorSpec H = operator_from(job, "operator");
  const auto [lo, hi] = window_of(job, args);
  const IntegratorConfig cfg = make_cfg(args);
  const auto evs = eigenvalues_regular(H, lo, hi, cfg);
  json res = result_header("count");
  res["window"] = {lo, hi};
  res["count"] = evs.size();
  res["eigenvalues"] = evs;
  write_text(fs::path(args.outdir) / "result.json", res.dump(2));
  std::ostringstream csv;
  csv << "index,lambda\n";
  for (std::size_t i = 0; i < evs.size(); ++i) csv << i << ',' << csv_num(evs[i]) << '\n';
  write_text(fs::path(args.outdir) / "eigenvalues.csv", csv.str());
  std::cout << "count " << evs.size() << "\n";
  return 0;
}

int run_gap_count(const json& job, const CommonArgs& args) {
  const Potential p0 = potential_from(job, "potential0");
  const Potential p1 = potential_from(job, "potential1");
  const double a = job.value("a", p0.interval().a);
  const BoundarySpec bc = bc_from(job);
  const double l0 = job.at("lambda0").get<double>();
  const double l1 = job.at("lambda1").get<double>();
  const TruncationSchedule sched = truncation_from(job);
  const GapCountResult r =
      relative_count_gap(p0, p1, a, bc, l0, l1, sched, make_cfg(args));

  json res = result_header("gap-count");
  res["difference"] = flip_json(r.difference);
  res["at_lambda0"] = flip_json(r.at_lambda0);
  res["at_lambda1"] = flip_json(r.at_lambda1);
  res["truncations"] = r.truncations;
  res["diff_table"] = r.diff_table;
  write_text(fs::path(args.outdir) / "result.json", res.dump(2));
  std::ostringstream csv;
  csv << "b_n,count_diff\n";
  for (std::size_t i = 0; i < r.truncations.size(); ++i)
    csv << csv_num(r.truncations[i]) << ',' << r.diff_table[i] << '\n';
  write_text(fs::path(args.outdir) / "gap_counts.csv", csv.str());
  return r.difference.converged ? 0 : 2;
}

int run_ssf(const json& job, const CommonArgs& args) {
  const OperatorSpec H0 = operator_from(job, "operator0");
  const OperatorSpec H1 = operator_from(job, "operator1");
  std::vector<double> lambdas;
  if (job.contains("lambdas")) {
    lambdas = job["lambdas"].get<std::vector<double>>();
  } else if (job.contains("lambda_grid")) {
    const auto& g = job["lambda_grid"];
    const double from = g.at("from").get<double>(), to = g.at("to").get<double>();
    const int points = g.value("points", 101);
    for (int i = 0; i < points; ++i)
      lambdas.push_back(from + (to - from) * i / (points - 1));
  } else {
    throw ValidationError("ssf: lambdas or lambda_grid required");
  }
  const IntegratorConfig cfg = make_cfg(args);

  ShiftProfile prof;
  prof.lambdas = lambdas;
  prof.xi.resize(lambdas.size(), 0);
  std::vector<char> skip(lambdas.size(), 0);
  parallel_for(lambdas.size(), [&](std::size_t i) {
    try {
      prof.xi[i] = xi_flip_count(H0, H1, lambdas[i], cfg);
    } catch (const BoundaryAmbiguityError&) {
      skip[i] = 1;
    }
  });
  prof.skipped.assign(lambdas.size(), false);
  for (std::size_t i = 0; i < skip.size(); ++i)
    if (skip[i]) prof.skipped[i] = true;

  std::ostringstream csv;
  write_csv(csv, prof);
  write_text(fs::path(args.outdir) / "ssf.csv", csv.str());
  json res = result_header("ssf");
  res["lambdas"] = prof.lambdas;
  res["xi"] = prof.xi;
  json sk = json::array();
  for (std::size_t i = 0; i < prof.skipped.size(); ++i)
    sk.push_back(static_cast<bool>(prof.skipped[i]));
  res["skipped"] = sk;
  write_text(fs::path(args.outdir) / "result.json", res.dump(2));
  return 0;
}

int run_floquet(const json& job, const CommonArgs& args) {
  const Potential P = potential_from(job, "potential");
  if (!P.period()) throw ValidationError("floquet: potential has no period");
  const auto [lo, hi] = window_of(job, args);
  BandEdgeOptions opts;
  if (job.contains("scan_points")) opts.scan_points = job["scan_points"].get<int>();
  const IntegratorConfig cfg = make_cfg(args);
  const auto edges = band_edges(P, lo, hi, opts, cfg);

  json res = result_header("floquet");
  json je = json::array();
  for (const auto& e : edges) {
    json o;
    o["E"] = e.E;
    o["kind"] = e.kind == EdgeKind::periodic ? "periodic" : "antiperiodic";
    o["side"] = e.side == GapSide::lower ? "lower" : "upper";
    o["degenerate"] = e.degenerate;
    je.push_back(o);
  }
  res["edges"] = je;
  write_text(fs::path(args.outdir) / "result.json", res.dump(2));

  std::ostringstream csv;
  csv << "lambda,discriminant\n";
  const int n = opts.scan_points;
  std::vector<double> disc(static_cast<std::size_t>(n) + 1);
  parallel_for(disc.size(), [&](std::size_t i) {
    const double lam = lo + (hi - lo) * static_cast<double>(i) / n;
    disc[i] = monodromy(P, lam, cfg).discriminant;
  });
  for (int i = 0; i <= n; ++i)
    csv << csv_num(lo + (hi - lo) * static_cast<double>(i) / n) << ','
        << csv_num(disc[static_cast<std::size_t>(i)]) << '\n';
  write_text(fs::path(args.outdir) / "discriminant.csv", csv.str());
  return 0;
}

int run_accumulate(const json& job, const CommonArgs& args) {
  const Potential P = potential_from(job, "potential");
  if (!P.period()) throw ValidationError("accumulate: potential has no period");
  std::vector<TailTerm> tail = tail_from(job);
  if (args.n_tail >= 0 && args.n_tail + 1 != static_cast<int>(tail.size()))
    throw ValidationError("accumulate: --n does not match tail length");
  const IntegratorConfig cfg = make_cfg(args);

  const double near = job.at("edge").at("near").get<double>();
  const double span = job["edge"].value("search_width", 1.0);
  const auto edges = band_edges(P, near - span, near + span, {}, cfg);
  const BandEdge* edge = nullptr;
  double best = 1e300;
  for (const auto& e : edges)
    if (std::fabs(e.E - near) < best) {
      best = std::fabs(e.E - near);
      edge = &e;
    }
  if (!edge) throw ValidationError("accumulate: no band edge near the requested energy");

  const double eq_tol = job.value("eq_tol", 1e-6);
  const AccumulationReport rep = accumulation_constants(*edge, P, tail, eq_tol, cfg);

  json res = result_header("accumulate");
  res["edge"] = edge->E;
  res["report"] = json::parse(to_json(rep));

  TailSpec ts;
  ts.terms = tail;
  ts.start = job.value("tail_start", 1.0);

  if (job.value("probe", true)) {
    ProbeOptions popts;
    const double x_max = job.value("probe_x_max", popts.x_max);
    const int n = static_cast<int>(tail.size()) - 1;
    const ProbeResult pr = boundedness_probe(
        *edge, P, [ts](double x) { return ts.eval(x); }, x_max, n, popts, cfg);
    res["probe"] = json::parse(to_json(pr));
  }

  if (job.contains("census")) {
    const auto& cj = job["census"];
    const std::vector<double> deltas = cj.at("deltas").get<std::vector<double>>();
    const TruncationSchedule sched = truncation_from(cj);
    const Potential p1 = Potential::with_tail(P, ts);
    const CensusTable table = gap_eigenvalue_census(
        p1, P.interval().a, bc_from(job), *edge, deltas, sched, cfg);
    std::ostringstream csv;
    write_csv(csv, table);
    write_text(fs::path(args.outdir) / "census.csv", csv.str());
    res["census_stabilized"] = table.stabilized();
  }

  write_text(fs::path(args.outdir) / "result.json", res.dump(2));
  std::cout << "verdict "
            << (rep.verdict == Verdict::accumulate ? "accumulate"
                : rep.verdict == Verdict::finite   ? "finite"
                                                   : "indeterminate")
            << "\n";
  return 0;
}

int run_radial(const json& job, const CommonArgs& args) {
  const int k = job.at("k").get<int>();
  const Potential base = potential_from(job, "base");
  const Potential transformed = radial_transform(k, base);
  const MatrixField lead = radial_r2_leading(k);

  std::ostringstream csv;
  csv << "r,c0,c1,c3,residual_c0,residual_c3\n";
  const double r0 = std::max(base.interval().a, 0.1);
  const double r1 = base.interval().b_infinite ? 1e3 : base.interval().b;
  for (double r = r0; r <= r1 * (1 + 1e-12); r *= 1.1) {
    const MatrixField f = transformed(r);
    const MatrixField add = f - base(r);
    const MatrixField res = add - (1.0 / (r * r)) * lead;
    csv << csv_num(r) << ',' << csv_num(f.c0) << ',' << csv_num(f.c1) << ','
        << csv_num(f.c3) << ',' << csv_num(res.c0) << ',' << csv_num(res.c3) << '\n';
  }
  write_text(fs::path(args.outdir) / "radial.csv", csv.str());

  json res = result_header("radial");
  res["k"] = k;
  res["leading_c0"] = lead.c0;
  res["leading_c3"] = lead.c3;

  // Optional spectral cross-check on a truncation: the operator with the
  // explicit k/r sigma3 term versus the transformed one with rotated boundary
  // angles.
  if (job.contains("check_interval")) {
    const auto iv = job["check_interval"].get<std::vector<double>>();
    const auto win = window_of(job, args);
    const BoundarySpec bc = bc_from(job);
    const double ra = iv.at(0), rb = iv.at(1);
    const Potential before = Potential::from_function(
        Interval{ra, rb, false},
        [base, k](double r) {
          return base(r) + MatrixField{0.0, 0.0, static_cast<double>(k) / r};
        },
        base.breakpoints());
    const OperatorSpec Hb{before, Interval{ra, rb, false}, bc};
    const BoundarySpec bc2 = BoundarySpec::normalized(
        bc.alpha + radial_bc_shift(k, ra), bc.beta + radial_bc_shift(k, rb));
    const OperatorSpec Ha{transformed, Interval{ra, rb, false}, bc2};
    const IntegratorConfig cfg = make_cfg(args);
    res["eigenvalues_before"] = eigenvalues_regular(Hb, win.first, win.second, cfg);
    res["eigenvalues_after"] = eigenvalues_regular(Ha, win.first, win.second, cfg);
  }
  write_text(fs::path(args.outdir) / "result.json", res.dump(2));
  return 0;
}

int run_validate(const json& job, const CommonArgs&) {
  const ValidationReport rep = validate_job_json(job.dump());
  if (rep.ok()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& e : rep.errors) std::cerr << "error: " << e << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relative oscillation analysis for one-dimensional Dirac operators"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string command;
  for (const char* name : {"solve", "flips", "count", "gap-count", "ssf", "floquet",
                           "accumulate", "radial", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--input", args.input, "job JSON document")->required();
    sub->add_option("--output", args.outdir, "output directory");
    sub->add_option("--rtol", args.rtol, "integrator relative tolerance override");
    sub->add_option("--atol", args.atol, "integrator absolute tolerance override");
    sub->add_option("--window", args.window, "spectral window override")->expected(2);
    if (std::string(name) == "accumulate")
      sub->add_option("--n", args.n_tail, "tail order (consistency check)");
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const json job = read_job(args.input);
    if (command == "solve") return run_solve(job, args);
    if (command == "flips") return run_flips(job, args);
    if (command == "count") return run_count(job, args);
    if (command == "gap-count") return run_gap_count(job, args);
    if (command == "ssf") return run_ssf(job, args);
    if (command == "floquet") return run_floquet(job, args);
    if (command == "accumulate") return run_accumulate(job, args);
    if (command == "radial") return run_radial(job, args);
    if (command == "validate") return run_validate(job, args);
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
