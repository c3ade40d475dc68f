#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scenver/analysis.hpp"
#include "scenver/cases.hpp"
#include "scenver/sim.hpp"
#include "scenver/summary.hpp"

namespace scenver {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& origin, int line, const std::string& reason)
      : IoError(origin + ":" + std::to_string(line) + ": " + reason), line(line), reason(reason) {}
  int line;
  std::string reason;
};

class NegativeCount : public IoError {
 public:
  using IoError::IoError;
};

class DuplicateLabel : public IoError {
 public:
  using IoError::IoError;
};

// --- contingency matrices ---------------------------------------------------

/// CSV grammar: header `state,<y_0>,...`; then `<label>,<count>,...` with
/// non-negative integer counts.
ContingencyMatrix load_contingency_csv(const std::string& path);
ContingencyMatrix parse_contingency_csv(std::istream& in, const std::string& origin);

// --- explicit-state chains --------------------------------------------------

/// Text format: `STATES n` header, then one `src dst prob` line per nonzero
/// transition (probabilities as shortest round-trip decimals), transitions in
/// row order. State labels go to a sidecar `<path>.labels`, one per line,
/// error state last.
void export_explicit_chain(const ClosedLoopDtmc& m, const std::string& path);
ClosedLoopDtmc load_explicit_chain(const std::string& path);

// --- JSON artifacts ---------------------------------------------------------

nlohmann::json summary_to_json(const Summary& c, const std::vector<std::string>& labels);
std::pair<Summary, std::vector<std::string>> summary_from_json(const nlohmann::json& j);
void save_summary_json(const Summary& c, const std::vector<std::string>& labels,
                       const std::string& path);
std::pair<Summary, std::vector<std::string>> load_summary_json(const std::string& path);

nlohmann::json predicate_to_json(const AffinePredicate& pred);
AffinePredicate predicate_from_json(const nlohmann::json& j);
void save_predicate_json(const AffinePredicate& pred, const std::string& path);
AffinePredicate load_predicate_json(const std::string& path);

/// Controller JSON: {"format_version":1, "envs":{env:{estimate:control}}}.
ControllerTable load_controller_json(const std::string& path);
/// Dynamics JSON: {"format_version":1, "envs":{env:{"state|control":succ}}}.
DynamicsTable load_dynamics_json(const std::string& path);

nlohmann::json certificate_to_json(const AccelerationCertificate& cert, long k_max);

nlohmann::json sim_report_to_json(const SimReport& report);

// --- spec runner ------------------------------------------------------------

struct RunOutcome {
  bool any_query_error = false;     // a query raised (recorded, not fatal)
  bool any_negative_result = false; // e.g. an assertion failed to hold
  std::string report_path;
};

/// Loads a scenario spec file, builds every referenced environment chain,
/// executes the queries and writes report.json plus per-query CSVs under
/// out_dir. Per-query errors are collected into the report.
RunOutcome run_spec(const std::string& spec_path, const std::string& out_dir);

}  // namespace scenver
