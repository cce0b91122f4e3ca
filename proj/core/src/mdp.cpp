#include "aoi/mdp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "aoi/error.hpp"

namespace aoi {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::InvalidInput, "cannot parse " + std::string(what),
                std::string(text));
  }
  return value;
}

void require_feasible(const State& s, Action a) {
  if (!is_feasible(s, a)) {
    throw Error(ErrorCode::InfeasibleAction,
                "action " + std::string(to_string(a)) + " is infeasible", to_string(s));
  }
}

}  // namespace

std::string to_string(const State& s) {
  return std::to_string(s.v1) + ":" + (s.empty() ? std::string("E") : std::to_string(s.v2));
}

State parse_state(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidInput, "state must look like v1:v2", std::string(text));
  }
  State s;
  s.v1 = parse_int(text.substr(0, colon), "monitor age");
  const auto rest = text.substr(colon + 1);
  s.v2 = (rest == "E") ? State::kEmpty : parse_int(rest, "packet age");
  return s;
}

std::ostream& operator<<(std::ostream& os, const State& s) { return os << to_string(s); }

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Idle: return "idle";
    case Action::Sample: return "sample";
    case Action::Continue: return "continue";
  }
  return "?";
}

Action parse_action(std::string_view text) {
  if (text == "idle" || text == "0") return Action::Idle;
  if (text == "sample" || text == "1") return Action::Sample;
  if (text == "continue" || text == "2") return Action::Continue;
  throw Error(ErrorCode::InvalidInput, "unknown action", std::string(text));
}

std::array<Action, 2> feasible_actions(const State& s) noexcept {
  if (s.empty()) return {Action::Idle, Action::Sample};
  return {Action::Sample, Action::Continue};
}

bool is_feasible(const State& s, Action a) noexcept {
  switch (a) {
    case Action::Idle: return s.empty();
    case Action::Sample: return true;
    case Action::Continue: return s.busy();
  }
  return false;
}

double cost(const State& s, Action a) {
  require_feasible(s, a);
  return static_cast<double>(s.v1);
}

void TransitionList::add(const State& next, double prob) {
  if (prob <= 0.0) return;
  for (std::size_t i = 0; i < size_; ++i) {
    if (entries_[i].next == next) {
      entries_[i].prob += prob;
      return;
    }
  }
  entries_[size_++] = Transition{next, prob};
}

double TransitionList::total() const noexcept {
  double sum = 0.0;
  for (const auto& t : *this) sum += t.prob;
  return sum;
}

TransitionList transitions(const State& s, Action a, const ServiceDistribution& d) {
  require_feasible(s, a);
  TransitionList out;
  switch (a) {
    case Action::Idle:
      out.add(empty_state(s.v1 + 1), 1.0);
      break;
    case Action::Sample: {
      const double q1 = d.hazard(1);
      out.add(empty_state(1), q1);
      if (d.support() > 1) out.add(State{s.v1 + 1, 1}, 1.0 - q1);
      break;
    }
    case Action::Continue: {
      const int age = s.v2 + 1;
      const double q = d.hazard(age);
      out.add(empty_state(age), q);
      if (age < d.support()) out.add(State{s.v1 + 1, age}, 1.0 - q);
      break;
    }
  }
  return out;
}

int default_age_cap(int L) { return std::max(50, 20 * L); }

StateSpace::StateSpace(int K, int L) : K_(K), L_(L) {
  if (L < 1 || K < 1) {
    throw Error(ErrorCode::InvalidGrid, "K and L must be positive",
                "K=" + std::to_string(K) + " L=" + std::to_string(L));
  }
  if (K < L) {
    throw Error(ErrorCode::RejectsKSmallerThanL, "age cap K must be at least L",
                "K=" + std::to_string(K) + " L=" + std::to_string(L));
  }
  block_offset_.reserve(static_cast<std::size_t>(K) + 1);
  for (int v1 = 1; v1 <= K; ++v1) {
    block_offset_.push_back(states_.size());
    const int busy = std::min(L - 1, v1);
    for (int v2 = 1; v2 <= busy; ++v2) states_.push_back(State{v1, v2});
    states_.push_back(empty_state(v1));
  }
  block_offset_.push_back(states_.size());
}

bool StateSpace::contains(const State& s) const noexcept {
  if (s.v1 < 1 || s.v1 > K_) return false;
  if (s.empty()) return true;
  return s.v2 >= 1 && s.v2 <= std::min(L_ - 1, s.v1);
}

std::size_t StateSpace::index_unchecked(const State& s) const noexcept {
  const auto base = block_offset_[static_cast<std::size_t>(s.v1 - 1)];
  if (s.empty()) return block_offset_[static_cast<std::size_t>(s.v1)] - 1;
  return base + static_cast<std::size_t>(s.v2 - 1);
}

std::size_t StateSpace::index(const State& s) const {
  if (!contains(s)) {
    throw Error(ErrorCode::StateOutsideGrid, "state is not on the truncated grid", to_string(s));
  }
  return index_unchecked(s);
}

std::vector<State> enumerate_states(int K, int L) {
  const StateSpace space(K, L);
  return {space.states().begin(), space.states().end()};
}

TransitionList transitions_truncated(const State& s, Action a, const ServiceDistribution& d,
                                     int K) {
  const bool on_grid = s.v1 >= 1 && s.v1 <= K &&
                       (s.empty() || (s.v2 >= 1 && s.v2 <= std::min(d.support() - 1, s.v1)));
  if (!on_grid) {
    throw Error(ErrorCode::StateOutsideGrid, "state is not on the truncated grid",
                to_string(s) + " K=" + std::to_string(K));
  }
  const auto raw = transitions(s, a, d);
  TransitionList out;
  for (const auto& t : raw) {
    State next = t.next;
    if (next.v1 > K) next.v1 = K;
    out.add(next, t.prob);
  }
  return out;
}

void write_kernel_csv(std::ostream& os, const StateSpace& space, const ServiceDistribution& d) {
  os << "action,row,col,from,to,prob\n";
  const auto old_precision = os.precision(17);
  for (std::size_t row = 0; row < space.size(); ++row) {
    const State& s = space[row];
    for (Action a : feasible_actions(s)) {
      for (const auto& t : transitions_truncated(s, a, d, space.age_cap())) {
        os << static_cast<int>(a) << ',' << row << ',' << space.index(t.next) << ','
           << to_string(s) << ',' << to_string(t.next) << ',' << t.prob << '\n';
      }
    }
  }
  os.precision(old_precision);
}

}  // namespace aoi
