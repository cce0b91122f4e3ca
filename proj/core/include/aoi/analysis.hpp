#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aoi/policies.hpp"
#include "aoi/policy.hpp"
#include "aoi/queue_model.hpp"
#include "aoi/solvers.hpp"

namespace aoi {

/// Index (e.g. a hazard index j) or grid state certifying the outcome.
using Witness = std::variant<int, State>;

struct ConditionReport {
  std::string name;
  bool holds = false;
  std::optional<Witness> witness;
  std::vector<double> intermediate;
  std::map<std::string, bool> clauses;
  std::string note;
};

/// q_1 >= q_j for all j = 2..L (always-preempt is optimal).
ConditionReport sufficient_condition_always_preempt(const ServiceDistribution& d);

/// q_1 >= q_j for all j = 3..L (some double-threshold policy is optimal).
ConditionReport nopreempt_condition(const ServiceDistribution& d);

/// Necessary condition for always-preempt optimality via the backward
/// recursion f_i = min{1 + (1 - q_{i+1}) f_{i+1}, f_1}; fails outright for
/// L = 2. `intermediate` holds f_1..f_{L-1}.
ConditionReport necessary_condition_always_preempt(const ServiceDistribution& d);

/// No empty-server state maps to Idle.
ConditionReport verify_zero_wait(const Policy& policy);

/// Per packet-age row, the Continue region is an upper set in v1 (cap rows
/// v1 >= K - L excluded). Clause "row_L_minus_1" isolates the v2 = L-1 row.
ConditionReport verify_threshold_in_v1(const Policy& policy, int L);

/// Tolerance on second differences of the value function in v1.
inline constexpr double kConcavityTolerance = 1e-8;

/// Second differences in v1 are <= 1e-8 on every column for v1 <= K - L - 2.
ConditionReport verify_concavity(const ValueFunction& V, int L, int K);

/// Action values closer than this are treated as a tie.
inline constexpr double kActionTieTolerance = 1e-9;

/// Per-iteration summary of one relative value iteration sweep.
struct TraceIteration {
  std::size_t iteration = 0;
  /// Per packet-age row v2 = 1..L-1: offset x of the first crossing of
  /// Q(.; Sample) and Q(.; Continue), at v1 = v2 + x; nullopt if none.
  std::vector<std::optional<int>> crossing;
  /// Per grid index: Continue is a minimizing action (busy states only).
  std::vector<char> continue_optimal;
};

/// Records the action-value structure of every sweep through a solver hook.
/// The recorder must outlive the solver call that uses its hook.
class RviTraceRecorder {
 public:
  IterationHook hook();

  const std::vector<TraceIteration>& iterations() const noexcept { return iterations_; }
  int age_cap() const noexcept { return K_; }
  int support() const noexcept { return L_; }

 private:
  void record(const IterationSnapshot& snapshot);

  std::vector<TraceIteration> iterations_;
  int K_ = 0;
  int L_ = 0;
};

/// Hazards nondecreasing on 1..L-1, and at every recorded iteration the
/// Continue-optimal set is monotone in v2 for each v1. Checked on the grid for
/// the recorded iterations only.
ConditionReport verify_assumption1(const ServiceDistribution& d, const RviTraceRecorder& trace);

/// Crossing offsets of iteration n constrain those of iteration n-1 on rows 1
/// and v2+1 (0 <= x2 <= x1 + v2, 0 <= x3 <= x1; no crossing propagates).
ConditionReport verify_assumption2(const ServiceDistribution& d, const RviTraceRecorder& trace);

/// Policy-improvement certificate. Runs exact policy iteration from the
/// given policy (improvements need a 1e-9 relative margin). Gains never
/// increase along the way, and the first round whose improved table keeps
/// an improving state recurrent strictly lowers the gain, which proves the
/// starting policy strictly suboptimal. Witness: that state.
/// intermediate = {starting gain, gain of the last evaluated policy}.
ConditionReport strict_improvement_certificate(const Policy& policy, const ServiceDistribution& d,
                                               int K);

inline constexpr double kGainTolerance = 1e-6;

struct Classification {
  double optimal_gain = 0.0;        // relative value iteration gain
  double optimal_policy_gain = 0.0; // exact chain value of the greedy policy
  double always_preempt_gain = 0.0;
  ThresholdSearchResult double_threshold;
  ThresholdSearchResult baseline;   // vth1 = 1
  bool always_preempt_optimal = false;
  bool always_preempt_strictly_suboptimal = false;  // improvement certificate
  bool double_threshold_optimal = false;
  bool baseline_optimal = false;
  double mass_at_cap = 0.0;         // of the optimal policy
  std::vector<ConditionReport> conditions;
  /// Cross-checks between solver verdicts and the structural conditions.
  std::map<std::string, bool> consistency;
  bool consistent = true;
};

/// Solves the MDP, evaluates the structured families and runs every checker.
Classification classify_distribution(const ServiceDistribution& d, int K,
                                     const SolverConfig& cfg = {});

}  // namespace aoi
