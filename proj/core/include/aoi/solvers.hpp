#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "aoi/mdp.hpp"
#include "aoi/policy.hpp"
#include "aoi/queue_model.hpp"

namespace aoi {

/// Action values Q(s; a) indexed by action tag; NaN marks infeasible actions.
using ActionValues = std::array<double, 3>;

/// Read-only view of one synchronous sweep, handed to iteration hooks.
struct IterationSnapshot {
  std::size_t iteration = 0;
  const StateSpace* space = nullptr;
  std::span<const double> previous;  // h_{n-1} (relative) or V_{n-1} (discounted)
  std::span<const double> values;    // V_n
  std::span<const ActionValues> action_values;
  double residual = 0.0;             // span seminorm (relative) or sup norm (discounted)
};

using IterationHook = std::function<void(const IterationSnapshot&)>;

struct SolverConfig {
  double tol = 1e-10;
  std::size_t max_iterations = 1'000'000;
  double discount = 0.9;  // discounted solver only
  std::vector<IterationHook> hooks;
  /// Optional starting table (size must match the grid); zeros otherwise.
  std::vector<double> initial_values;
};

struct ValueFunction {
  ValueFunction(StateSpace grid, std::vector<double> table)
      : space(std::move(grid)), values(std::move(table)) {}

  StateSpace space;
  std::vector<double> values;
  State reference = empty_state(1);
  std::optional<double> gain;      // average-cost solver only
  std::optional<double> discount;  // discounted solver only
  std::size_t iterations = 0;
  double residual = 0.0;
  double tol = 0.0;

  double at(const State& s) const { return values[space.index(s)]; }
};

struct RviResult {
  ValueFunction value;
  Policy policy;
};

/// Relative value iteration on the truncated MDP with reference state (1, E).
/// Stops once the span of V_n - h_{n-1} drops below `cfg.tol`; the gain is the
/// midpoint of that final residual range.
RviResult relative_value_iteration(const ServiceDistribution& d, int K, const SolverConfig& cfg = {});

/// Discounted value iteration from V_0 = 0, stopping when the sup-norm step is
/// below tol (1 - a) / (2 a) or has reached the floating-point floor of the table.
ValueFunction discounted_value_iteration(const ServiceDistribution& d, int K,
                                         const SolverConfig& cfg = {});

/// One-step lookahead Q(s; a) = C(s, a) + beta * sum P_a(s, s'; K) V(s'),
/// with beta = V.discount or 1 for relative value functions.
ActionValues lookahead(const ValueFunction& V, const ServiceDistribution& d, const State& s);

/// Greedy policy; ties go to the smaller action tag (Idle < Sample < Continue).
Policy extract_policy(const ValueFunction& V, const ServiceDistribution& d, int K);

}  // namespace aoi
