#include "aoi/json_io.hpp"

#include <ostream>
#include <string>

#include "aoi/error.hpp"

namespace aoi {

namespace {

json witness_json(const Witness& w) {
  return std::visit(
      [](const auto& value) -> json {
        using T = std::decay_t<decltype(value)>;
        if constexpr (std::is_same_v<T, State>) {
          return to_string(value);
        } else {
          return value;
        }
      },
      w);
}

json values_json(const ValueFunction& V) {
  json out = json::object();
  for (std::size_t i = 0; i < V.space.size(); ++i) out[to_string(V.space[i])] = V.values[i];
  return out;
}

}  // namespace

ServiceDistribution distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("p") || !j.at("p").is_array()) {
    throw Error(ErrorCode::InvalidInput, "distribution JSON must be an object with array \"p\"");
  }
  std::vector<double> p;
  for (const auto& x : j.at("p")) {
    if (!x.is_number()) throw Error(ErrorCode::InvalidInput, "\"p\" entries must be numbers");
    p.push_back(x.get<double>());
  }
  return ServiceDistribution(std::move(p));
}

json to_json(const ServiceDistribution& d) {
  return json{{"p", std::vector<double>(d.pmf_values().begin(), d.pmf_values().end())},
              {"q", std::vector<double>(d.hazards().begin(), d.hazards().end())},
              {"L", d.support()},
              {"mean_service", d.mean_service()}};
}

json policy_table_json(const Policy& policy) {
  json actions = json::object();
  const StateSpace& space = policy.space();
  for (std::size_t i = 0; i < space.size(); ++i) {
    actions[to_string(space[i])] = std::string(to_string(policy.at_index(i)));
  }
  return json{{"kind", "table"},
              {"K", space.age_cap()},
              {"L", space.support()},
              {"actions", std::move(actions)}};
}

json to_json(const Policy& policy) {
  switch (policy.kind()) {
    case PolicyKind::AlwaysPreempt:
      return json{{"kind", "always_preempt"}};
    case PolicyKind::DoubleThreshold:
      return json{{"kind", "double_threshold"},
                  {"vth1", policy.thresholds()->vth1},
                  {"vth2", policy.thresholds()->vth2}};
    case PolicyKind::Table:
      break;
  }
  return policy_table_json(policy);
}

Policy policy_from_json(const json& j, int K, int L) {
  const std::string kind = j.value("kind", std::string("table"));
  if (kind == "always_preempt") return always_preempt(K, L);
  if (kind == "double_threshold") {
    return double_threshold(DoubleThresholdSpec{j.at("vth1").get<int>(), j.at("vth2").get<int>()},
                            K, L);
  }
  if (kind != "table") throw Error(ErrorCode::InvalidPolicy, "unknown policy kind", kind);
  if (!j.contains("actions") || !j.at("actions").is_object()) {
    throw Error(ErrorCode::InvalidPolicy, "table policy needs an \"actions\" object");
  }
  StateSpace space(K, L);
  const auto& table = j.at("actions");
  std::vector<Action> actions(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::string key = to_string(space[i]);
    if (!table.contains(key)) {
      throw Error(ErrorCode::InvalidPolicy, "table policy has no entry for a grid state", key);
    }
    const auto& entry = table.at(key);
    actions[i] = entry.is_number() ? static_cast<Action>(entry.get<int>())
                                   : parse_action(entry.get<std::string>());
  }
  return Policy(std::move(space), std::move(actions));
}

json solver_report_json(const RviResult& result) {
  const ValueFunction& V = result.value;
  return json{{"gain", V.gain.value_or(0.0)},
              {"iterations", V.iterations},
              {"span_residual", V.residual},
              {"K", V.space.age_cap()},
              {"L", V.space.support()},
              {"tol", V.tol},
              {"reference_state", to_string(V.reference)},
              {"policy", policy_table_json(result.policy)},
              {"value", values_json(V)}};
}

json discounted_report_json(const ValueFunction& V) {
  return json{{"discount", V.discount.value_or(0.0)},
              {"iterations", V.iterations},
              {"residual", V.residual},
              {"K", V.space.age_cap()},
              {"L", V.space.support()},
              {"tol", V.tol},
              {"value", values_json(V)}};
}

json to_json(const EvalReport& report) {
  json out{{"method", std::string(to_string(report.method))}, {"average_age", report.average_age}};
  if (report.K > 0) out["K"] = report.K;
  std::visit(
      [&out](const auto& detail) {
        using T = std::decay_t<decltype(detail)>;
        if constexpr (std::is_same_v<T, ChainDetail>) {
          out["recurrent_states"] = detail.recurrent_states;
          out["mass_at_cap"] = detail.mass_at_cap;
          out["power_iteration"] = detail.power_iteration;
        } else if constexpr (std::is_same_v<T, RenewalDetail>) {
          out["expected_cycle_length"] = detail.expected_cycle_length;
          out["expected_cycle_age_sum"] = detail.expected_cycle_age_sum;
          out["start_age_distribution"] = detail.start_age_distribution;
          out["residual_mass"] = detail.residual_mass;
        } else {
          out["ci_halfwidth"] = detail.ci_halfwidth;
          out["slots"] = detail.slots;
          out["replications"] = detail.replications;
          out["seed"] = detail.seed;
          out["replication_means"] = detail.replication_means;
        }
      },
      report.detail);
  return out;
}

json to_json(const ConditionReport& report) {
  json out{{"condition", report.name}, {"holds", report.holds}};
  out["witness"] = report.witness ? witness_json(*report.witness) : json(nullptr);
  if (!report.intermediate.empty()) out["intermediate"] = report.intermediate;
  if (!report.clauses.empty()) out["clauses"] = report.clauses;
  if (!report.note.empty()) out["note"] = report.note;
  return out;
}

json to_json(const ThresholdSearchResult& result) {
  json surface = json::array();
  for (const auto& point : result.surface) {
    surface.push_back(json{{"vth1", point.spec.vth1}, {"vth2", point.spec.vth2}, {"gain", point.gain}});
  }
  return json{{"vth1", result.best.vth1},
              {"vth2", result.best.vth2},
              {"gain", result.gain},
              {"surface", std::move(surface)}};
}

json to_json(const Classification& c) {
  json conditions = json::array();
  for (const auto& report : c.conditions) conditions.push_back(to_json(report));
  json dt = to_json(c.double_threshold);
  dt.erase("surface");
  json baseline = to_json(c.baseline);
  baseline.erase("surface");
  return json{{"gains",
               {{"optimal", c.optimal_gain},
                {"optimal_policy_exact", c.optimal_policy_gain},
                {"always_preempt", c.always_preempt_gain},
                {"double_threshold", std::move(dt)},
                {"baseline_vth1_1", std::move(baseline)}}},
              {"verdicts",
               {{"always_preempt_optimal", c.always_preempt_optimal},
                {"always_preempt_strictly_suboptimal", c.always_preempt_strictly_suboptimal},
                {"double_threshold_optimal", c.double_threshold_optimal},
                {"baseline_optimal", c.baseline_optimal},
                {"tolerance", kGainTolerance}}},
              {"mass_at_cap", c.mass_at_cap},
              {"conditions", std::move(conditions)},
              {"consistency", c.consistency},
              {"consistent", c.consistent}};
}

void write_value_csv(std::ostream& os, const ValueFunction& V) {
  const auto old = os.precision(17);
  os << "state,v1,v2,value\n";
  for (std::size_t i = 0; i < V.space.size(); ++i) {
    const State& s = V.space[i];
    os << to_string(s) << ',' << s.v1 << ',' << (s.empty() ? std::string("E") : std::to_string(s.v2))
       << ',' << V.values[i] << '\n';
  }
  os.precision(old);
}

void write_surface_csv(std::ostream& os, const ThresholdSearchResult& result) {
  const auto old = os.precision(17);
  os << "vth1,vth2,gain\n";
  for (const auto& point : result.surface) {
    os << point.spec.vth1 << ',' << point.spec.vth2 << ',' << point.gain << '\n';
  }
  os.precision(old);
}

void write_trace_csv(std::ostream& os, const CycleTrace& trace) {
  os << "i,S_i,D_i,M_i\n";
  for (std::size_t i = 0; i < trace.deliveries.size(); ++i) {
    const auto& r = trace.deliveries[i];
    os << (i + 1) << ',' << r.generated << ',' << r.delivered << ',' << r.preempted << '\n';
  }
}

}  // namespace aoi
