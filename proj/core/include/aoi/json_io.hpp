#pragma once

#include <iosfwd>
#include <nlohmann/json.hpp>

#include "aoi/analysis.hpp"
#include "aoi/evaluation.hpp"
#include "aoi/policies.hpp"
#include "aoi/policy.hpp"
#include "aoi/queue_model.hpp"
#include "aoi/solvers.hpp"

namespace aoi {

using nlohmann::json;

/// Reads {"p": [...]}.
ServiceDistribution distribution_from_json(const json& j);
/// {"p", "q", "L", "mean_service"}.
json to_json(const ServiceDistribution& d);

/// {"kind": "always_preempt"}, {"kind": "double_threshold", "vth1", "vth2"}
/// or {"kind": "table", "K", "L", "actions": {"v1:v2": "sample", ...}}.
json to_json(const Policy& policy);
/// The table form regardless of kind.
json policy_table_json(const Policy& policy);
/// Builds a policy on S_K from any of the forms above. Table entries missing
/// from "actions" are an error.
Policy policy_from_json(const json& j, int K, int L);

/// {gain, iterations, span_residual, K, tol, policy, value}.
json solver_report_json(const RviResult& result);
/// {discount, iterations, residual, K, tol, value}.
json discounted_report_json(const ValueFunction& V);

json to_json(const EvalReport& report);
json to_json(const ConditionReport& report);
json to_json(const ThresholdSearchResult& result);
json to_json(const Classification& c);

/// "state,value" rows.
void write_value_csv(std::ostream& os, const ValueFunction& V);
/// "vth1,vth2,gain" rows.
void write_surface_csv(std::ostream& os, const ThresholdSearchResult& result);
/// "i,S_i,D_i,M_i" rows, i starting at 1.
void write_trace_csv(std::ostream& os, const CycleTrace& trace);

}  // namespace aoi
