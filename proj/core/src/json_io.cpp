#include "relosc/json_io.hpp"

#include <cstdio>
#include <limits>

#include <json.hpp>

namespace relosc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

double get_num(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number())
    fail(std::string("missing or non-numeric field: ") + field);
  return j[field].get<double>();
}

double get_num_or(const json& j, const char* field, double dflt) {
  if (!j.contains(field)) return dflt;
  if (!j[field].is_number()) fail(std::string("non-numeric field: ") + field);
  return j[field].get<double>();
}

Interval parse_interval(const json& j) {
  if (!j.contains("interval") || !j["interval"].is_array() || j["interval"].size() != 2)
    fail("interval must be [a, b]");
  const auto& iv = j["interval"];
  Interval out;
  out.a = iv[0].is_number() ? iv[0].get<double>()
                            : (fail("interval[0] must be a number"), 0.0);
  if (iv[1].is_number()) {
    out.b = iv[1].get<double>();
  } else if (iv[1].is_string() &&
             (iv[1] == "inf" || iv[1] == "Infinity" || iv[1] == "infinity")) {
    out.b = std::numeric_limits<double>::infinity();
    out.b_infinite = true;
  } else {
    fail("interval[1] must be a number or \"inf\"");
  }
  if (!out.b_infinite && !(out.a < out.b)) fail("interval must satisfy a < b");
  return out;
}

MatrixField parse_matrix(const json& j) {
  return MatrixField{get_num_or(j, "c0", 0.0), get_num_or(j, "c1", 0.0),
                     get_num_or(j, "c3", 0.0)};
}

Potential::TrigComponent parse_trig_component(const json& j, const char* name) {
  Potential::TrigComponent c;
  if (!j.contains(name)) return c;
  const auto& t = j[name];
  if (t.is_number()) {
    c.cst = t.get<double>();
    return c;
  }
  if (!t.is_object()) fail(std::string(name) + " must be a number or an object");
  c.cst = get_num_or(t, "const", 0.0);
  if (t.contains("cos")) c.cos_coef = t["cos"].get<std::vector<double>>();
  if (t.contains("sin")) c.sin_coef = t["sin"].get<std::vector<double>>();
  return c;
}

Potential parse_potential(const json& j);

TailSpec parse_tail(const json& j) {
  TailSpec tail;
  tail.start = get_num_or(j, "start", 1.0);
  if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
    fail("log-tail: terms must be a non-empty array");
  int expected = 0;
  for (const auto& t : j["terms"]) {
    TailTerm term;
    term.k = t.contains("k") ? t["k"].get<int>() : -1;
    if (term.k != expected)
      fail("log-tail: scale indices must be contiguous 0..n");
    ++expected;
    term.phi1k = parse_matrix(t);
    tail.terms.push_back(term);
  }
  return tail;
}

Potential parse_potential(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    fail("potential: missing kind");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "constant") {
    return Potential::constant(parse_interval(j), parse_matrix(j));
  }
  if (kind == "step") {
    const Interval iv = parse_interval(j);
    if (!j.contains("breakpoints") || !j.contains("values"))
      fail("step: breakpoints and values required");
    std::vector<double> bps = j["breakpoints"].get<std::vector<double>>();
    std::vector<MatrixField> vals;
    for (const auto& v : j["values"]) vals.push_back(parse_matrix(v));
    if (vals.size() != bps.size() + 1) fail("step: values.size() must be breakpoints.size()+1");
    return Potential::step(iv, std::move(bps), std::move(vals));
  }
  if (kind == "periodic-trig") {
    const Interval iv = parse_interval(j);
    const double alpha = get_num(j, "period");
    if (!(alpha > 0)) fail("periodic-trig: period must be positive");
    return Potential::trig_periodic(iv, alpha, parse_trig_component(j, "c0"),
                                    parse_trig_component(j, "c1"),
                                    parse_trig_component(j, "c3"));
  }
  if (kind == "grid") {
    const Interval iv = parse_interval(j);
    for (const char* f : {"x", "c0", "c1", "c3"})
      if (!j.contains(f) || !j[f].is_array()) fail(std::string("grid: array field ") + f);
    return Potential::grid(iv, j["x"].get<std::vector<double>>(),
                           j["c0"].get<std::vector<double>>(),
                           j["c1"].get<std::vector<double>>(),
                           j["c3"].get<std::vector<double>>());
  }
  if (kind == "log-tail") {
    if (!j.contains("base")) fail("log-tail: base potential required");
    const Potential base = parse_potential(j["base"]);
    return Potential::with_tail(base, parse_tail(j));
  }
  if (kind == "radial") {
    if (!j.contains("base")) fail("radial: base potential required");
    if (!j.contains("k") || !j["k"].is_number_integer()) fail("radial: integer k required");
    const int k = j["k"].get<int>();
    if (k == 0) fail("radial: k must be nonzero");
    return radial_transform(k, parse_potential(j["base"]));
  }
  fail("potential: unknown kind \"" + kind + "\"");
}

OperatorSpec parse_operator(const json& j) {
  if (!j.is_object()) fail("operator must be an object");
  if (!j.contains("potential")) fail("operator: potential required");
  OperatorSpec op;
  op.potential = parse_potential(j["potential"]);
  if (j.contains("interval")) {
    op.interval = parse_interval(j);
  } else {
    op.interval = op.potential.interval();
  }
  if (op.interval.b_infinite)
    fail("operator: interval must be a regular truncation (finite b)");
  double alpha = 0.0, beta = M_PI;
  if (j.contains("bc")) {
    alpha = get_num_or(j["bc"], "alpha", 0.0);
    beta = get_num_or(j["bc"], "beta", M_PI);
  }
  op.bc = BoundarySpec::normalized(alpha, beta);
  return op;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

Potential potential_from_json(const std::string& json_text) {
  return parse_potential(parse_text(json_text));
}

OperatorSpec operator_from_json(const std::string& json_text) {
  return parse_operator(parse_text(json_text));
}

std::string potential_kind(const std::string& json_text) {
  const json j = parse_text(json_text);
  if (!j.contains("kind") || !j["kind"].is_string()) fail("potential: missing kind");
  return j["kind"].get<std::string>();
}

ValidationReport validate_job_json(const std::string& json_text) {
  ValidationReport rep;
  json j;
  try {
    j = parse_text(json_text);
  } catch (const ValidationError& e) {
    rep.errors.push_back(e.what());
    return rep;
  }
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      rep.errors.push_back(e.what());
    }
  };
  if (j.contains("operator")) check([&] { parse_operator(j["operator"]); });
  if (j.contains("operator0")) check([&] { parse_operator(j["operator0"]); });
  if (j.contains("operator1")) check([&] { parse_operator(j["operator1"]); });
  if (j.contains("potential")) check([&] { parse_potential(j["potential"]); });
  if (j.contains("tail")) check([&] { parse_tail(j["tail"]); });
  if (j.contains("truncation")) {
    check([&] {
      const auto& t = j["truncation"];
      if (!(get_num(t, "b0") > 0)) fail("truncation: b0 must be positive");
      if (!(get_num_or(t, "factor", 2.0) > 1.0)) fail("truncation: factor must exceed 1");
      if (t.contains("count") && !(t["count"].get<int>() >= 1))
        fail("truncation: count must be >= 1");
    });
  }
  if (j.contains("window")) {
    check([&] {
      const auto& w = j["window"];
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number() ||
          !(w[0].get<double>() < w[1].get<double>()))
        fail("window must be [lo, hi] with lo < hi");
    });
  }
  if (!rep.ok()) return rep;
  // Cross-field sanity for periodic jobs.
  if (j.contains("command") && j["command"].is_string()) {
    const std::string cmd = j["command"].get<std::string>();
    if ((cmd == "floquet" || cmd == "accumulate") && j.contains("potential")) {
      const Potential p = parse_potential(j["potential"]);
      if (!p.period()) rep.errors.push_back("periodic job: potential has no period");
    }
  }
  return rep;
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

std::string json_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& os, const Trajectory& t) {
  os << "x,u1,u2,rho,theta\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << csv_num(t.x[i]) << ',' << csv_num(t.u[i].x) << ',' << csv_num(t.u[i].y) << ','
       << csv_num(t.rho[i]) << ',' << csv_num(t.theta[i]) << '\n';
}

void write_csv(std::ostream& os, const RelativeAngle& a) {
  os << "x,psi,R\n";
  for (std::size_t i = 0; i < a.x.size(); ++i)
    os << csv_num(a.x[i]) << ',' << csv_num(a.psi[i]) << ',' << csv_num(a.R[i]) << '\n';
}

void write_csv(std::ostream& os, const ScalarAngle& a) {
  os << "x,angle\n";
  for (std::size_t i = 0; i < a.x.size(); ++i)
    os << csv_num(a.x[i]) << ',' << csv_num(a.angle[i]) << '\n';
}

void write_csv(std::ostream& os, const ShiftProfile& p) {
  os << "lambda,xi,skipped\n";
  for (std::size_t i = 0; i < p.lambdas.size(); ++i)
    os << csv_num(p.lambdas[i]) << ',' << p.xi[i] << ',' << (p.skipped[i] ? 1 : 0) << '\n';
}

void write_csv(std::ostream& os, const CensusTable& t) {
  os << "delta,n,b_n,count\n";
  for (const auto& r : t.rows)
    os << csv_num(r.delta) << ',' << r.n_index << ',' << csv_num(r.b_n) << ',' << r.count
       << '\n';
}

std::string to_json(const FlipCount& fc) {
  json j;
  if (fc.lower == FlipCount::kMinusInfinity)
    j["lower"] = "-inf";
  else
    j["lower"] = fc.lower;
  if (fc.upper == FlipCount::kPlusInfinity)
    j["upper"] = "+inf";
  else
    j["upper"] = fc.upper;
  j["value"] = fc.value;
  j["converged"] = fc.converged;
  return j.dump();
}

std::string to_json(const AccumulationReport& rep) {
  json j;
  j["n"] = rep.n;
  j["A"] = json::parse(json_num(rep.A));
  json b = json::array(), prod = json::array();
  for (double v : rep.B) b.push_back(json::parse(json_num(v)));
  for (double v : rep.products) prod.push_back(json::parse(json_num(v)));
  j["B"] = b;
  j["products"] = prod;
  j["eq_tol"] = rep.eq_tol;
  j["verdict"] = rep.verdict == Verdict::accumulate ? "accumulate"
                 : rep.verdict == Verdict::finite   ? "finite"
                                                    : "indeterminate";
  return j.dump();
}

std::string to_json(const ProbeResult& pr) {
  json j;
  j["classification"] = pr.classification == Boundedness::bounded     ? "bounded"
                        : pr.classification == Boundedness::unbounded ? "unbounded"
                                                                      : "unresolved";
  j["n"] = pr.n;
  j["x_start"] = pr.x_start;
  j["x_max"] = pr.x_max;
  j["checkpoints"] = pr.s_checkpoints;
  j["phibar"] = pr.phibar;
  j["advances"] = pr.advances;
  return j.dump();
}

}  // namespace relosc
