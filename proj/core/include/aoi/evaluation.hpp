#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "aoi/policy.hpp"
#include "aoi/queue_model.hpp"
#include "aoi/solvers.hpp"

namespace aoi {

enum class EvalMethod { Chain, Renewal, MonteCarlo };

std::string_view to_string(EvalMethod m);

struct ChainDetail {
  std::vector<double> stationary;  // over the full grid, zero off the recurrent class
  std::size_t recurrent_states = 0;
  double mass_at_cap = 0.0;        // stationary mass on v1 = K
  bool power_iteration = false;
};

struct RenewalDetail {
  double expected_cycle_length = 0.0;   // slots between deliveries
  double expected_cycle_age_sum = 0.0;  // age summed over one inter-delivery cycle
  std::vector<double> start_age_distribution;  // index a-1: P(cycle starts at age a)
  double residual_mass = 0.0;           // undelivered mass dropped by the enumeration
};

struct MonteCarloDetail {
  std::int64_t slots = 0;
  std::size_t replications = 0;
  double ci_halfwidth = 0.0;  // 95% Student-t interval over replication means
  std::uint64_t seed = 0;
  std::vector<double> replication_means;
};

struct EvalReport {
  EvalMethod method = EvalMethod::Chain;
  double average_age = 0.0;
  int K = 0;  // 0 when the method does not use the truncated grid
  std::variant<ChainDetail, RenewalDetail, MonteCarloDetail> detail;
};

/// Above this many recurrent states the chain is solved by power iteration.
inline constexpr std::size_t kDirectSolveLimit = 50'000;

/// Long-run average age of a stationary policy from the stationary law of the
/// induced chain on S_K (recurrent class of (1, E)). Throws NonErgodicChain
/// when (1, E) is transient.
EvalReport exact_average_age(const Policy& policy, const ServiceDistribution& d, int K);

/// Membership flags (grid order) of the recurrent class containing (1, E).
/// Throws NonErgodicChain when (1, E) is transient.
std::vector<char> recurrent_class(const Policy& policy, const ServiceDistribution& d, int K);

/// Gain and relative values of a fixed policy from the Poisson equation
/// h + g = c + P h on the whole grid, normalized by h(1, E) = 0.
ValueFunction policy_relative_values(const Policy& policy, const ServiceDistribution& d, int K);

/// Residual mass at which the renewal enumeration stops.
inline constexpr double kRenewalResidualMass = 1e-12;

/// Markov renewal-reward evaluation of a double-threshold policy on the
/// untruncated model: cycles run between deliveries and are enumerated attempt
/// by attempt. Does not depend on any age cap.
EvalReport renewal_reward_age(const DoubleThresholdSpec& spec, const ServiceDistribution& d);

/// One delivery: generation slot S_i, delivery slot D_i (first slot at which
/// the monitor age reflects packet i) and the number M_i of samples preempted
/// since the previous delivery.
struct DeliveryRecord {
  std::int64_t generated = 0;
  std::int64_t delivered = 0;
  std::int64_t preempted = 0;
};

struct CycleTrace {
  std::vector<DeliveryRecord> deliveries;
};

struct SimulationOptions {
  std::int64_t horizon = 1'000'000;
  std::size_t replications = 20;
  std::uint64_t seed = 0;
  bool record_trace = true;   // replication 0 only
  bool record_ages = false;   // per-slot monitor age of replication 0
};

struct SimulationResult {
  EvalReport report;
  CycleTrace trace;
  std::vector<std::int64_t> ages;  // ages[t-1] is the monitor age charged in slot t
};

inline constexpr std::int64_t kMinimumHorizon = 1000;

/// Slot-level Monte Carlo under the MDP's cost accounting (age charged on the
/// pre-transition state). Replication r draws from its own generator seeded by
/// (seed, r), so results do not depend on scheduling.
SimulationResult simulate(const Policy& policy, const ServiceDistribution& d,
                          const SimulationOptions& options = {});

}  // namespace aoi
