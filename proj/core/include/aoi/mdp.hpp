#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/queue_model.hpp"

namespace aoi {

/// System state: monitor age `v1` and the age `v2` of the packet in service.
/// An empty server is encoded as `v2 == State::kEmpty`, which orders after
/// every finite packet age.
struct State {
  static constexpr int kEmpty = std::numeric_limits<int>::max();

  int v1 = 1;
  int v2 = kEmpty;

  constexpr bool empty() const noexcept { return v2 == kEmpty; }
  constexpr bool busy() const noexcept { return v2 != kEmpty; }

  friend constexpr auto operator<=>(const State&, const State&) = default;
};

constexpr State empty_state(int v1) { return State{v1, State::kEmpty}; }

/// "v1:v2", with "E" for an empty server.
std::string to_string(const State& s);
State parse_state(std::string_view text);
std::ostream& operator<<(std::ostream& os, const State& s);

enum class Action : int { Idle = 0, Sample = 1, Continue = 2 };

std::string_view to_string(Action a);
Action parse_action(std::string_view text);

/// Feasible actions in tag order: {Idle, Sample} when empty, {Sample, Continue} when busy.
std::array<Action, 2> feasible_actions(const State& s) noexcept;
bool is_feasible(const State& s, Action a) noexcept;

/// One-step cost: the monitor age, independent of the action.
double cost(const State& s, Action a);

struct Transition {
  State next;
  double prob = 0.0;
};

/// At most two successors with strictly positive probability.
class TransitionList {
 public:
  void add(const State& next, double prob);

  std::size_t size() const noexcept { return size_; }
  const Transition& operator[](std::size_t i) const noexcept { return entries_[i]; }
  const Transition* begin() const noexcept { return entries_.data(); }
  const Transition* end() const noexcept { return entries_.data() + size_; }

  double total() const noexcept;

 private:
  std::array<Transition, 2> entries_{};
  std::size_t size_ = 0;
};

/// Untruncated kernel P_a(s, .). Successor monitor ages may exceed any cap.
TransitionList transitions(const State& s, Action a, const ServiceDistribution& d);

/// Default monitor-age cap for a support bound L: max(50, 20 L).
int default_age_cap(int L);

/// The truncated grid S_K: (v1, E) for v1 = 1..K and (v1, v2) with
/// 1 <= v2 <= min(L-1, v1). States are indexed in canonical order
/// (v1 major, v2 minor, empty last within a v1 block).
class StateSpace {
 public:
  StateSpace(int K, int L);

  int age_cap() const noexcept { return K_; }
  int support() const noexcept { return L_; }
  std::size_t size() const noexcept { return states_.size(); }

  std::span<const State> states() const noexcept { return states_; }
  const State& operator[](std::size_t i) const noexcept { return states_[i]; }

  bool contains(const State& s) const noexcept;
  /// Index of `s` in canonical order; throws StateOutsideGrid.
  std::size_t index(const State& s) const;
  std::size_t reference_index() const noexcept { return index_unchecked(empty_state(1)); }

 private:
  std::size_t index_unchecked(const State& s) const noexcept;

  int K_;
  int L_;
  std::vector<std::size_t> block_offset_;
  std::vector<State> states_;
};

std::vector<State> enumerate_states(int K, int L);

/// Kernel on S_K: identical to `transitions` except that successors with
/// v1 > K are saturated to v1 = K (keeping their packet age), lumping mass.
TransitionList transitions_truncated(const State& s, Action a, const ServiceDistribution& d,
                                     int K);

/// Sparse dump of every feasible kernel row on the grid:
/// header "action,row,col,from,to,prob".
void write_kernel_csv(std::ostream& os, const StateSpace& space, const ServiceDistribution& d);

}  // namespace aoi
