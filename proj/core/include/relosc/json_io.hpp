#pragma once

// JSON ingestion of potential/operator/job documents and CSV/JSON export of
// results.  Schemas are documented in docs/schemas.md; all numbers are IEEE
// doubles.  Parsing is strict: unknown "kind" values and malformed fields
// produce ValidationError with the offending field named.

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "relosc/floquet.hpp"
#include "relosc/ode.hpp"
#include "relosc/potential.hpp"
#include "relosc/relative.hpp"
#include "relosc/spectral.hpp"

namespace relosc {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Parsing (throws ValidationError naming the field on failure).
Potential potential_from_json(const std::string& json_text);
OperatorSpec operator_from_json(const std::string& json_text);

// Non-throwing schema/sanity check of a full job document.
ValidationReport validate_job_json(const std::string& json_text);

// Serialization.
std::string potential_kind(const std::string& json_text);  // convenience for tools

void write_csv(std::ostream& os, const Trajectory& t);
void write_csv(std::ostream& os, const RelativeAngle& a);
void write_csv(std::ostream& os, const ScalarAngle& a);
void write_csv(std::ostream& os, const ShiftProfile& p);
void write_csv(std::ostream& os, const CensusTable& t);

std::string to_json(const FlipCount& fc);
std::string to_json(const AccumulationReport& rep);
std::string to_json(const ProbeResult& pr);

// Formats one double for CSV output (9 significant digits).
std::string csv_num(double v);

}  // namespace relosc
