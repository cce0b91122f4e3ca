#include "aoi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aoi/evaluation.hpp"
#include "aoi/policies.hpp"

namespace aoi {

namespace {

constexpr double kHazardTolerance = 1e-12;
constexpr double kImprovementMargin = 1e-9;
constexpr int kImprovementRounds = 50;

ConditionReport named_report(std::string name) {
  ConditionReport report;
  report.name = std::move(name);
  report.holds = true;
  return report;
}

ConditionReport hazard_dominance(std::string name, const ServiceDistribution& d, int first_j) {
  ConditionReport report = named_report(std::move(name));
  const double q1 = d.hazard(1);
  for (int j = first_j; j <= d.support(); ++j) {
    if (q1 + kHazardTolerance < d.hazard(j)) {
      report.holds = false;
      report.witness = j;
      report.note = "q_" + std::to_string(j) + " exceeds q_1";
      break;
    }
  }
  for (double q : d.hazards()) report.intermediate.push_back(q);
  return report;
}

// Last monitor age included in structural checks; rows v1 >= K - L are
// distorted by the truncation.
int last_structural_age(int K, int L) { return K - L - 1; }

std::size_t action_slot(Action a) { return static_cast<std::size_t>(a); }

}  // namespace

ConditionReport sufficient_condition_always_preempt(const ServiceDistribution& d) {
  return hazard_dominance("sufficient", d, 2);
}

ConditionReport nopreempt_condition(const ServiceDistribution& d) {
  return hazard_dominance("nopreempt", d, 3);
}

ConditionReport necessary_condition_always_preempt(const ServiceDistribution& d) {
  ConditionReport report = named_report("necessary");
  const int L = d.support();
  if (L == 1) {
    report.note = "L = 1: no busy states, always-preempt is the only zero-wait policy";
    return report;
  }
  const double f1 = 1.0 / d.hazard(1);
  if (L == 2) {
    report.holds = false;
    report.intermediate = {f1};
    report.note = "L = 2: always-preempt cannot be optimal";
    return report;
  }
  // f[i] holds f_i for i = 1..L-1; index 0 unused.
  std::vector<double> f(static_cast<std::size_t>(L), 0.0);
  f[1] = f1;
  f[static_cast<std::size_t>(L - 1)] = 1.0;
  for (int i = L - 2; i >= 2; --i) {
    const auto k = static_cast<std::size_t>(i);
    f[k] = std::min(1.0 + (1.0 - d.hazard(i + 1)) * f[k + 1], f1);
  }
  const double lhs = 1.0 + (1.0 - d.hazard(2)) * f[2];
  report.holds = lhs + kHazardTolerance >= f1;
  report.intermediate.assign(f.begin() + 1, f.end());
  report.note = "1 + (1 - q_2) f_2 = " + std::to_string(lhs) + ", 1/q_1 = " + std::to_string(f1);
  return report;
}

ConditionReport verify_zero_wait(const Policy& policy) {
  ConditionReport report = named_report("zero-wait");
  const StateSpace& space = policy.space();
  for (int v1 = 1; v1 <= space.age_cap(); ++v1) {
    const State s = empty_state(v1);
    if (policy.at(s) == Action::Idle) {
      report.holds = false;
      report.witness = s;
      break;
    }
  }
  return report;
}

ConditionReport verify_threshold_in_v1(const Policy& policy, int L) {
  ConditionReport report = named_report("threshold");
  const StateSpace& space = policy.space();
  const int last = last_structural_age(space.age_cap(), L);
  bool last_row_ok = true;
  for (int v2 = 1; v2 <= L - 1; ++v2) {
    bool seen_continue = false;
    for (int v1 = v2; v1 <= last; ++v1) {
      const State s{v1, v2};
      const bool cont = policy.at(s) == Action::Continue;
      if (cont) {
        seen_continue = true;
      } else if (seen_continue) {
        if (report.holds) report.witness = s;
        report.holds = false;
        if (v2 == L - 1) last_row_ok = false;
        break;
      }
    }
  }
  report.clauses["all_rows"] = report.holds;
  report.clauses["row_L_minus_1"] = last_row_ok;
  report.note = "checked on v1 <= " + std::to_string(last);
  return report;
}

ConditionReport verify_concavity(const ValueFunction& V, int L, int K) {
  ConditionReport report = named_report("concavity");
  const StateSpace& space = V.space;
  const int last_start = K - L - 2;
  double worst = -std::numeric_limits<double>::infinity();
  auto check_column = [&](int first_v1, int v2) {
    for (int v1 = first_v1; v1 <= last_start; ++v1) {
      const double second = V.values[space.index(State{v1 + 2, v2})] -
                            2.0 * V.values[space.index(State{v1 + 1, v2})] +
                            V.values[space.index(State{v1, v2})];
      worst = std::max(worst, second);
      if (second > kConcavityTolerance && report.holds) {
        report.holds = false;
        report.witness = State{v1, v2};
      }
    }
  };
  for (int v2 = 1; v2 <= L - 1; ++v2) check_column(v2, v2);
  check_column(1, State::kEmpty);
  if (std::isfinite(worst)) report.intermediate = {worst};
  report.note = "max second difference over v1 <= " + std::to_string(last_start + 2);
  return report;
}

IterationHook RviTraceRecorder::hook() {
  return [this](const IterationSnapshot& snapshot) { record(snapshot); };
}

void RviTraceRecorder::record(const IterationSnapshot& snapshot) {
  const StateSpace& space = *snapshot.space;
  K_ = space.age_cap();
  L_ = space.support();
  TraceIteration it;
  it.iteration = snapshot.iteration;
  it.continue_optimal.assign(space.size(), 0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space[i].empty()) continue;
    const auto& q = snapshot.action_values[i];
    it.continue_optimal[i] =
        q[action_slot(Action::Continue)] <= q[action_slot(Action::Sample)] + kActionTieTolerance;
  }
  const int last = last_structural_age(K_, L_);
  for (int v2 = 1; v2 <= L_ - 1; ++v2) {
    std::optional<int> crossing;
    int initial_sign = 0;
    for (int v1 = v2; v1 <= last; ++v1) {
      const auto& q = snapshot.action_values[space.index(State{v1, v2})];
      const double diff = q[action_slot(Action::Sample)] - q[action_slot(Action::Continue)];
      const int sign = std::abs(diff) <= kActionTieTolerance ? 0 : (diff > 0 ? 1 : -1);
      if (v1 == v2) initial_sign = sign;
      if (sign == 0 || sign != initial_sign) {
        crossing = v1 - v2;
        break;
      }
    }
    it.crossing.push_back(crossing);
  }
  iterations_.push_back(std::move(it));
}

ConditionReport verify_assumption1(const ServiceDistribution& d, const RviTraceRecorder& trace) {
  ConditionReport report = named_report("assumption1");
  const bool hazard_clause = has_nondecreasing_hazard(d);
  bool action_clause = true;
  if (!trace.iterations().empty()) {
    const StateSpace space(trace.age_cap(), trace.support());
    const int L = trace.support();
    const int last = last_structural_age(trace.age_cap(), L);
    for (const auto& it : trace.iterations()) {
      for (int v1 = 1; v1 <= last && action_clause; ++v1) {
        bool seen = false;
        for (int v2 = 1; v2 <= std::min(L - 1, v1); ++v2) {
          const bool cont = it.continue_optimal[space.index(State{v1, v2})] != 0;
          if (cont) {
            seen = true;
          } else if (seen) {
            action_clause = false;
            report.witness = State{v1, v2};
            report.note = "continue set not monotone in v2 at iteration " +
                          std::to_string(it.iteration);
            break;
          }
        }
      }
      if (!action_clause) break;
    }
  }
  if (!hazard_clause && !report.witness) {
    for (int k = 2; k <= d.support() - 1; ++k) {
      if (d.hazard(k) + 1e-12 < d.hazard(k - 1)) {
        report.witness = k;
        break;
      }
    }
  }
  report.clauses["hazard_nondecreasing"] = hazard_clause;
  report.clauses["continue_monotone_in_v2"] = action_clause;
  report.holds = hazard_clause && action_clause;
  if (report.note.empty()) {
    report.note = "checked on grid, n <= " + std::to_string(trace.iterations().size());
  }
  for (double q : d.hazards()) report.intermediate.push_back(q);
  return report;
}

ConditionReport verify_assumption2(const ServiceDistribution& d, const RviTraceRecorder& trace) {
  ConditionReport report = named_report("assumption2");
  const int L = d.support();
  const auto& iterations = trace.iterations();
  std::size_t checked = 0;
  for (std::size_t n = 1; n < iterations.size() && report.holds; ++n) {
    const auto& now = iterations[n].crossing;
    const auto& before = iterations[n - 1].crossing;
    for (int v2 = 1; v2 <= L - 1; ++v2) {
      const auto row = static_cast<std::size_t>(v2 - 1);
      const auto& x1 = now[row];
      const auto& x2 = before[0];
      const bool has_next_row = v2 + 1 <= L - 1;
      const std::optional<int> x3 = has_next_row ? before[row + 1] : std::nullopt;
      bool ok = true;
      if (x1) {
        if (x2 && (*x2 < 0 || *x2 > *x1 + v2)) ok = false;
        if (x3 && (*x3 < 0 || *x3 > *x1)) ok = false;
      } else {
        if (x2) ok = false;
        if (x3) ok = false;
      }
      ++checked;
      if (!ok) {
        report.holds = false;
        report.witness = State{v2 + x1.value_or(0), v2};
        report.note = "crossing order violated between iterations " +
                      std::to_string(iterations[n - 1].iteration) + " and " +
                      std::to_string(iterations[n].iteration) + " on row " + std::to_string(v2);
        break;
      }
    }
  }
  if (report.holds) {
    report.note = "checked on grid, n <= " + std::to_string(iterations.size()) + ", " +
                  std::to_string(checked) + " row constraints";
  }
  return report;
}

ConditionReport strict_improvement_certificate(const Policy& policy, const ServiceDistribution& d,
                                               int K) {
  ConditionReport report = named_report("strictly_improvable");
  report.holds = false;
  const StateSpace& space = policy.space();
  std::vector<Action> current(policy.actions().begin(), policy.actions().end());
  double start_gain = 0.0;
  for (int round = 0; round < kImprovementRounds; ++round) {
    const Policy pi(space, current);
    const ValueFunction V = policy_relative_values(pi, d, K);
    if (round == 0) start_gain = *V.gain;
    std::vector<Action> improved = current;
    std::vector<std::size_t> improving;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const ActionValues q = lookahead(V, d, space[i]);
      const double own = q[action_slot(current[i])];
      for (Action a : feasible_actions(space[i])) {
        const double margin = own - q[action_slot(a)];
        if (margin > kImprovementMargin * std::max(1.0, std::abs(own)) &&
            q[action_slot(a)] <= q[action_slot(improved[i])]) {
          improved[i] = a;
        }
      }
      if (improved[i] != current[i]) improving.push_back(i);
    }
    if (improving.empty()) {
      report.intermediate = {start_gain, *V.gain};
      report.note = "policy iteration stalled after " + std::to_string(round) + " rounds";
      return report;
    }
    const auto members = recurrent_class(Policy(space, improved), d, K);
    for (std::size_t i : improving) {
      if (members[i]) {
        report.holds = true;
        report.witness = space[i];
        report.intermediate = {start_gain, *V.gain};
        report.note = "recurrent improvement in round " + std::to_string(round + 1);
        return report;
      }
    }
    current = std::move(improved);
  }
  report.note = "no recurrent improvement within " + std::to_string(kImprovementRounds) + " rounds";
  return report;
}

Classification classify_distribution(const ServiceDistribution& d, int K, const SolverConfig& cfg) {
  const int L = d.support();
  Classification out;

  RviTraceRecorder trace;
  SolverConfig traced = cfg;
  traced.hooks.push_back(trace.hook());
  const RviResult rvi = relative_value_iteration(d, K, traced);
  out.optimal_gain = *rvi.value.gain;
  const EvalReport optimal_eval = exact_average_age(rvi.policy, d, K);
  out.optimal_policy_gain = optimal_eval.average_age;
  out.mass_at_cap = std::get<ChainDetail>(optimal_eval.detail).mass_at_cap;

  const PolicyEvaluator evaluator = [&d, K](const Policy& p) {
    return exact_average_age(p, d, K).average_age;
  };
  const Policy preempt_all = always_preempt(K, L);
  out.always_preempt_gain = evaluator(preempt_all);
  const auto certificate = strict_improvement_certificate(preempt_all, d, K);
  out.always_preempt_strictly_suboptimal = certificate.holds;
  out.double_threshold = search_double_threshold(d, K, evaluator);
  out.baseline = timeout_baseline(d, K, evaluator);

  out.always_preempt_optimal = out.always_preempt_gain - out.optimal_gain <= kGainTolerance;
  out.double_threshold_optimal = out.double_threshold.gain - out.optimal_gain <= kGainTolerance;
  out.baseline_optimal = out.baseline.gain - out.optimal_gain <= kGainTolerance;

  const auto sufficient = sufficient_condition_always_preempt(d);
  const auto nopreempt = nopreempt_condition(d);
  const auto necessary = necessary_condition_always_preempt(d);
  const auto zero_wait = verify_zero_wait(rvi.policy);
  const auto threshold = verify_threshold_in_v1(rvi.policy, L);
  const auto a1 = verify_assumption1(d, trace);
  const auto a2 = verify_assumption2(d, trace);
  out.conditions = {sufficient, nopreempt, necessary, zero_wait, threshold, a1, a2, certificate};

  out.consistency["zero_wait"] = zero_wait.holds;
  // Necessary condition violated => always-preempt strictly beaten. Judged by
  // the improvement certificate, which resolves gaps below the gain tolerance.
  out.consistency["necessary_sound"] = necessary.holds || out.always_preempt_strictly_suboptimal;
  out.consistency["certificate_agrees"] =
      !out.always_preempt_strictly_suboptimal || out.optimal_policy_gain < out.always_preempt_gain;
  out.consistency["sufficient_sound"] = !sufficient.holds || out.always_preempt_optimal;
  out.consistency["nopreempt_sound"] = !nopreempt.holds || out.double_threshold_optimal;
  const bool assumed = a1.holds || a2.holds;
  out.consistency["assumption_threshold_sound"] =
      !assumed || (threshold.holds && out.double_threshold_optimal);
  out.consistency["family_nesting"] =
      out.baseline.gain + kSearchTieTolerance >= out.double_threshold.gain &&
      out.double_threshold.gain + kGainTolerance >= out.optimal_gain;
  out.consistent = std::all_of(out.consistency.begin(), out.consistency.end(),
                               [](const auto& kv) { return kv.second; });
  return out;
}

}  // namespace aoi
