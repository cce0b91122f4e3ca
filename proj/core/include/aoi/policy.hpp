#pragma once

#include <optional>
#include <vector>

#include "aoi/mdp.hpp"

namespace aoi {

/// Thresholds of the double-threshold family: preempt every slot while the
/// monitor age is at most `vth1`; afterwards hold each packet until its age
/// reaches `vth2`, then drop it and resample. `vth2 == L` never drops.
struct DoubleThresholdSpec {
  int vth1 = 1;
  int vth2 = 1;

  friend constexpr bool operator==(const DoubleThresholdSpec&, const DoubleThresholdSpec&) = default;
};

enum class PolicyKind { Table, AlwaysPreempt, DoubleThreshold };

/// Stationary deterministic policy stored as a table over the grid S_K.
class Policy {
 public:
  Policy(StateSpace space, std::vector<Action> actions, PolicyKind kind = PolicyKind::Table,
         std::optional<DoubleThresholdSpec> spec = std::nullopt);

  const StateSpace& space() const noexcept { return space_; }
  PolicyKind kind() const noexcept { return kind_; }
  const std::optional<DoubleThresholdSpec>& thresholds() const noexcept { return spec_; }

  Action at(const State& s) const { return actions_[space_.index(s)]; }
  Action at_index(std::size_t i) const noexcept { return actions_[i]; }
  std::span<const Action> actions() const noexcept { return actions_; }

  /// Action for an unbounded state: monitor ages above K use the v1 = K row.
  Action lookup_saturated(const State& s) const;

  /// Same table, regardless of how the policy was described.
  bool same_table(const Policy& other) const noexcept;

 private:
  StateSpace space_;
  std::vector<Action> actions_;
  PolicyKind kind_;
  std::optional<DoubleThresholdSpec> spec_;
};

}  // namespace aoi
