#include <gtest/gtest.h>

#include <sstream>

#include "aoi/error.hpp"
#include "aoi/mdp.hpp"
#include "support/oracles.hpp"

using namespace aoi;

namespace {

constexpr State E(int v1) { return empty_state(v1); }

std::map<State, double> as_map(const TransitionList& list) {
  std::map<State, double> out;
  for (const auto& t : list) out[t.next] += t.prob;
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidInput;
}

State from_oracle(oracle::OState s) { return s.v2 == 0 ? E(s.v1) : State{s.v1, s.v2}; }

}  // namespace

TEST(StateSpace, SmallGrids) {
  const auto six = enumerate_states(3, 2);
  const std::vector<State> expected{State{1, 1}, E(1), State{2, 1}, E(2), State{3, 1}, E(3)};
  EXPECT_EQ(six, expected);

  EXPECT_EQ(enumerate_states(1, 1), std::vector<State>{E(1)});
  EXPECT_EQ(enumerate_states(5, 3).size(), 14u);
}

TEST(StateSpace, MatchesNaiveEnumeration) {
  for (int L = 1; L <= 6; ++L) {
    for (int K = L; K <= L + 12; K += 3) {
      const StateSpace space(K, L);
      const auto naive = oracle::states(K, L);
      ASSERT_EQ(space.size(), naive.size());
      for (const auto& s : naive) {
        const State t = from_oracle(s);
        ASSERT_TRUE(space.contains(t));
        EXPECT_EQ(space[space.index(t)], t);
      }
    }
  }
}

TEST(StateSpace, Errors) {
  EXPECT_EQ(code_of([] { StateSpace(2, 3); }), ErrorCode::RejectsKSmallerThanL);
  EXPECT_EQ(code_of([] { StateSpace(0, 1); }), ErrorCode::InvalidGrid);
  const StateSpace space(5, 3);
  EXPECT_EQ(code_of([&] { space.index(State{6, 1}); }), ErrorCode::StateOutsideGrid);
  EXPECT_EQ(code_of([&] { space.index(State{2, 3}); }), ErrorCode::StateOutsideGrid);
  EXPECT_EQ(space[space.reference_index()], E(1));
}

TEST(StateText, RoundTrip) {
  EXPECT_EQ(to_string(E(4)), "4:E");
  EXPECT_EQ(to_string(State{7, 2}), "7:2");
  EXPECT_EQ(parse_state("4:E"), E(4));
  EXPECT_EQ(parse_state("7:2"), (State{7, 2}));
  EXPECT_EQ(code_of([] { parse_state("x"); }), ErrorCode::InvalidInput);
  EXPECT_EQ(parse_action("continue"), Action::Continue);
  EXPECT_EQ(parse_action("0"), Action::Idle);
}

TEST(Actions, Feasibility) {
  EXPECT_EQ(feasible_actions(E(5)), (std::array<Action, 2>{Action::Idle, Action::Sample}));
  EXPECT_EQ(feasible_actions(State{5, 2}), (std::array<Action, 2>{Action::Sample, Action::Continue}));
  EXPECT_EQ(feasible_actions(State{1, 1}), (std::array<Action, 2>{Action::Sample, Action::Continue}));
  EXPECT_FALSE(is_feasible(E(5), Action::Continue));
  EXPECT_FALSE(is_feasible(State{5, 2}, Action::Idle));
}

TEST(Actions, Cost) {
  EXPECT_EQ(cost(State{7, 2}, Action::Continue), 7.0);
  EXPECT_EQ(cost(E(1), Action::Sample), 1.0);
  EXPECT_EQ(cost(State{100, 1}, Action::Sample), 100.0);
  EXPECT_EQ(code_of([] { cost(E(3), Action::Continue); }), ErrorCode::InfeasibleAction);
}

TEST(Transitions, Untruncated) {
  const ServiceDistribution d({0.4, 0.1, 0.25, 0.25});  // q3 = 0.5
  ASSERT_NEAR(d.hazard(3), 0.5, 1e-15);
  auto m = as_map(transitions(E(5), Action::Sample, d));
  EXPECT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[E(1)], 0.4, 1e-15);
  EXPECT_NEAR((m[State{6, 1}]), 0.6, 1e-15);

  m = as_map(transitions(State{5, 2}, Action::Continue, d));
  EXPECT_NEAR(m[E(3)], 0.5, 1e-15);
  EXPECT_NEAR((m[State{6, 3}]), 0.5, 1e-15);

  m = as_map(transitions(E(5), Action::Idle, d));
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m[E(6)], 1.0);

  m = as_map(transitions(State{4, 3}, Action::Continue, d));
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m[E(4)], 1.0);

  EXPECT_EQ(code_of([&] { transitions(E(2), Action::Continue, d); }), ErrorCode::InfeasibleAction);
}

TEST(Transitions, Truncated) {
  const int K = 10;
  const ServiceDistribution d({0.4, 0.1, 0.25, 0.25});
  auto m = as_map(transitions_truncated(E(K), Action::Sample, d, K));
  EXPECT_NEAR(m[E(1)], 0.4, 1e-15);
  EXPECT_NEAR((m[State{K, 1}]), 0.6, 1e-15);

  m = as_map(transitions_truncated(State{K, 2}, Action::Continue, d, K));
  EXPECT_NEAR(m[E(3)], 0.5, 1e-15);
  EXPECT_NEAR((m[State{K, 3}]), 0.5, 1e-15);

  m = as_map(transitions_truncated(E(K), Action::Idle, d, K));
  EXPECT_EQ(m[E(K)], 1.0);

  EXPECT_EQ(code_of([&] { transitions_truncated(E(K + 1), Action::Idle, d, K); }),
            ErrorCode::StateOutsideGrid);
}

TEST(TransitionsProperty, KernelMatchesOracle) {
  for (const auto& p : oracle::random_corpus(40, 5, 21)) {
    const ServiceDistribution d(p);
    const int L = d.support();
    const int K = L + 6;
    const auto q = oracle::hazards(p);
    const StateSpace space(K, L);
    for (const State& s : space.states()) {
      for (Action a : feasible_actions(s)) {
        const auto list = transitions_truncated(s, a, d, K);
        EXPECT_NEAR(list.total(), 1.0, 1e-12);
        auto got = as_map(list);
        std::map<State, double> want;
        const oracle::OState os{s.v1, s.empty() ? 0 : s.v2};
        for (const auto& [t, prob] : oracle::step(os, static_cast<int>(a), q, K)) {
          want[from_oracle(t)] += prob;
        }
        ASSERT_EQ(got.size(), want.size()) << to_string(s);
        for (const auto& [t, prob] : want) {
          EXPECT_NEAR(got[t], prob, 1e-12) << to_string(s) << " -> " << to_string(t);
          EXPECT_TRUE(space.contains(t));
          if (t.busy()) {
            EXPECT_LE(t.v2, t.v1);
            EXPECT_LE(t.v2, L - 1);
          }
        }
        if (s.v1 < K) {
          const auto raw = as_map(transitions(s, a, d));
          EXPECT_EQ(raw, got) << to_string(s);
        }
      }
    }
  }
}

TEST(TransitionsProperty, ReferenceStateReachableUnderZeroWait) {
  // From every state some feasible path reaches (1, E) within L + 1 slots
  // when the policy samples at empty states and continues otherwise.
  for (const auto& p : oracle::random_corpus(30, 5, 22)) {
    const ServiceDistribution d(p);
    const int L = d.support();
    const int K = L + 5;
    const StateSpace space(K, L);
    for (const State& start : space.states()) {
      std::map<State, double> mass{{start, 1.0}};
      double absorbed = 0.0;
      for (int t = 0; t < L + 1; ++t) {
        std::map<State, double> next;
        for (const auto& [s, m] : mass) {
          const Action a = s.empty() ? Action::Sample : Action::Continue;
          for (const auto& tr : transitions_truncated(s, a, d, K)) {
            if (tr.next == E(1)) {
              absorbed += m * tr.prob;
            } else {
              next[tr.next] += m * tr.prob;
            }
          }
        }
        mass = std::move(next);
      }
      EXPECT_GT(absorbed, 0.0) << to_string(start);
    }
  }
}

TEST(KernelCsv, Header) {
  std::ostringstream os;
  write_kernel_csv(os, StateSpace(3, 2), ServiceDistribution({0.5, 0.5}));
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "action,row,col,from,to,prob");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_GT(rows, 6);
}
