#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "seqgrad/lojasiewicz.hpp"
#include "seqgrad/process.hpp"

namespace seqgrad {

using nlohmann::json;

// JSON conversions; index sets are 1-based in all text interfaces.
json point_to_json(const Point& p);
Point point_from_json(const json& j);
json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const json& j);
json domain_to_json(const Domain& d);
Domain domain_from_json(const json& j, int dim);
json flow_settings_to_json(const FlowSettings& s);
FlowSettings flow_settings_from_json(const json& j);
json stopping_to_json(const StoppingCriteria& s);
StoppingCriteria stopping_from_json(const json& j);
json classification_to_json(const CriticalPointInfo& info);
json loja_to_json(const LojaEstimate& est);
json length_bound_to_json(const LengthBoundReport& r);

struct RunMetadata {
  std::string scenario;
  std::string function_text;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

/// Stable run summary document; field names are part of the interface and
/// are pinned by schemas/run_summary.schema.json.
json run_to_json(const ProcessRun& run, const AnalyticFunction& f, const Domain& domain,
                 const Schedule& schedule, const FlowSettings& flow,
                 const StoppingCriteria& stop, const RunMetadata& meta);

/// Trajectory CSV: columns step, t, y_1..y_M, phi, grad_norm,
/// slice_grad_norm; 17 significant digits. Requires trajectories retained
/// in the run.
void write_trajectory_csv(std::ostream& out, const ProcessRun& run, int dim);

/// The run-summary JSON schema shipped with the repo (embedded copy).
const json& run_summary_schema();

/// Minimal structural validator (type/required/properties/items/enum);
/// returns human-readable problems, empty when the document conforms.
std::vector<std::string> validate_schema(const json& doc, const json& schema);

struct VerifyIssue {
  std::string invariant;
  std::string detail;
};

/// Re-checks a written run summary (and its trajectory CSV when given):
/// schema conformance, monotone descent across steps and samples, slice
/// consistency of frozen coordinates, limit criticality of converged
/// verdicts, and recorded length-bound reports.
std::vector<VerifyIssue> verify_run_artifacts(const json& run, const std::string* csv_text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace seqgrad
