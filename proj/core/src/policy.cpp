#include "aoi/policy.hpp"

#include <algorithm>

#include "aoi/error.hpp"

namespace aoi {

Policy::Policy(StateSpace space, std::vector<Action> actions, PolicyKind kind,
               std::optional<DoubleThresholdSpec> spec)
    : space_(std::move(space)), actions_(std::move(actions)), kind_(kind), spec_(spec) {
  if (actions_.size() != space_.size()) {
    throw Error(ErrorCode::InvalidPolicy, "policy table size does not match the grid",
                std::to_string(actions_.size()) + " vs " + std::to_string(space_.size()));
  }
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (!is_feasible(space_[i], actions_[i])) {
      throw Error(ErrorCode::InfeasibleAction, "policy plays an infeasible action",
                  to_string(space_[i]) + " -> " + std::string(to_string(actions_[i])));
    }
  }
}

Action Policy::lookup_saturated(const State& s) const {
  State clamped = s;
  clamped.v1 = std::min(s.v1, space_.age_cap());
  return at(clamped);
}

bool Policy::same_table(const Policy& other) const noexcept {
  return space_.age_cap() == other.space_.age_cap() && space_.support() == other.space_.support() &&
         actions_ == other.actions_;
}

}  // namespace aoi
