#include "aoi/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aoi/error.hpp"

namespace aoi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Edge {
  std::size_t to = 0;
  double prob = 0.0;
};

struct Row {
  Action action = Action::Sample;
  std::array<Edge, 2> edges{};
  std::size_t count = 0;
};

// Kernel rows of every feasible (state, action) pair, flattened over the grid.
struct CompiledKernel {
  std::vector<std::array<Row, 2>> rows;
  std::vector<double> cost;

  CompiledKernel(const StateSpace& space, const ServiceDistribution& d) {
    rows.resize(space.size());
    cost.resize(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      const State& s = space[i];
      cost[i] = static_cast<double>(s.v1);
      const auto actions = feasible_actions(s);
      for (std::size_t k = 0; k < actions.size(); ++k) {
        Row& row = rows[i][k];
        row.action = actions[k];
        for (const auto& t : transitions_truncated(s, actions[k], d, space.age_cap())) {
          row.edges[row.count++] = Edge{space.index(t.next), t.prob};
        }
      }
    }
  }

  double expectation(const Row& row, std::span<const double> values) const noexcept {
    double acc = 0.0;
    for (std::size_t e = 0; e < row.count; ++e) acc += row.edges[e].prob * values[row.edges[e].to];
    return acc;
  }
};

void check_inputs(const ServiceDistribution& d, int K, const SolverConfig& cfg, std::size_t n) {
  if (K < d.support()) {
    throw Error(ErrorCode::RejectsKSmallerThanL, "age cap K must be at least L",
                "K=" + std::to_string(K) + " L=" + std::to_string(d.support()));
  }
  if (!(cfg.tol > 0.0)) throw Error(ErrorCode::InvalidInput, "tolerance must be positive");
  if (!cfg.initial_values.empty() && cfg.initial_values.size() != n) {
    throw Error(ErrorCode::InvalidInput, "initial values do not match the grid size");
  }
}

}  // namespace

RviResult relative_value_iteration(const ServiceDistribution& d, int K, const SolverConfig& cfg) {
  StateSpace space(K, d.support());
  const std::size_t n = space.size();
  check_inputs(d, K, cfg, n);
  const CompiledKernel kernel(space, d);
  const std::size_t ref = space.reference_index();

  std::vector<double> h(n, 0.0);
  if (!cfg.initial_values.empty()) {
    h = cfg.initial_values;
    const double anchor = h[ref];
    for (double& x : h) x -= anchor;
  }
  std::vector<double> V(n, 0.0);
  std::vector<ActionValues> q(n, ActionValues{kNaN, kNaN, kNaN});

  double span = std::numeric_limits<double>::infinity();
  double gain = 0.0;
  std::size_t iter = 0;
  bool converged = false;
  while (iter < cfg.max_iterations) {
    ++iter;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Row& row : kernel.rows[i]) {
        const double value = kernel.cost[i] + kernel.expectation(row, h);
        q[i][static_cast<std::size_t>(row.action)] = value;
        best = std::min(best, value);
      }
      V[i] = best;
      const double diff = best - h[i];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    span = hi - lo;
    gain = 0.5 * (hi + lo);
    for (const auto& hook : cfg.hooks) {
      hook(IterationSnapshot{iter, &space, h, V, q, span});
    }
    const double anchor = V[ref];
    for (std::size_t i = 0; i < n; ++i) h[i] = V[i] - anchor;
    if (span < cfg.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence, "relative value iteration did not converge",
                "iterations=" + std::to_string(iter) + " span=" + std::to_string(span));
  }

  ValueFunction value(space, std::move(h));
  value.gain = gain;
  value.iterations = iter;
  value.residual = span;
  value.tol = cfg.tol;
  Policy policy = extract_policy(value, d, K);
  return RviResult{std::move(value), std::move(policy)};
}

ValueFunction discounted_value_iteration(const ServiceDistribution& d, int K,
                                         const SolverConfig& cfg) {
  const double alpha = cfg.discount;
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "discount factor must lie in (0, 1)",
                std::to_string(alpha));
  }
  StateSpace space(K, d.support());
  const std::size_t n = space.size();
  check_inputs(d, K, cfg, n);
  const CompiledKernel kernel(space, d);

  std::vector<double> prev = cfg.initial_values.empty() ? std::vector<double>(n, 0.0)
                                                        : cfg.initial_values;
  std::vector<double> V(n, 0.0);
  std::vector<ActionValues> q(n, ActionValues{kNaN, kNaN, kNaN});
  const double threshold = cfg.tol * (1.0 - alpha) / (2.0 * alpha);

  double delta = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  bool converged = false;
  while (iter < cfg.max_iterations) {
    ++iter;
    delta = 0.0;
    double magnitude = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Row& row : kernel.rows[i]) {
        const double value = kernel.cost[i] + alpha * kernel.expectation(row, prev);
        q[i][static_cast<std::size_t>(row.action)] = value;
        best = std::min(best, value);
      }
      V[i] = best;
      delta = std::max(delta, std::abs(best - prev[i]));
      magnitude = std::max(magnitude, std::abs(best));
    }
    for (const auto& hook : cfg.hooks) {
      hook(IterationSnapshot{iter, &space, prev, V, q, delta});
    }
    std::swap(prev, V);
    const double floor = 16.0 * std::numeric_limits<double>::epsilon() * magnitude;
    if (delta < threshold || delta <= floor) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence, "discounted value iteration did not converge",
                "iterations=" + std::to_string(iter) + " delta=" + std::to_string(delta));
  }

  ValueFunction value(space, std::move(prev));
  value.discount = alpha;
  value.iterations = iter;
  value.residual = delta;
  value.tol = cfg.tol;
  return value;
}

ActionValues lookahead(const ValueFunction& V, const ServiceDistribution& d, const State& s) {
  const double beta = V.discount.value_or(1.0);
  ActionValues out{kNaN, kNaN, kNaN};
  for (Action a : feasible_actions(s)) {
    double acc = 0.0;
    for (const auto& t : transitions_truncated(s, a, d, V.space.age_cap())) {
      acc += t.prob * V.values[V.space.index(t.next)];
    }
    out[static_cast<std::size_t>(a)] = cost(s, a) + beta * acc;
  }
  return out;
}

Policy extract_policy(const ValueFunction& V, const ServiceDistribution& d, int K) {
  if (V.space.age_cap() != K || V.space.support() != d.support()) {
    throw Error(ErrorCode::InvalidGrid, "value function grid does not match (K, L)");
  }
  std::vector<Action> actions(V.space.size());
  for (std::size_t i = 0; i < V.space.size(); ++i) {
    const State& s = V.space[i];
    const ActionValues q = lookahead(V, d, s);
    const auto feasible = feasible_actions(s);
    Action best = feasible[0];
    for (Action a : feasible) {
      if (q[static_cast<std::size_t>(a)] < q[static_cast<std::size_t>(best)]) best = a;
    }
    actions[i] = best;
  }
  return Policy(V.space, std::move(actions));
}

}  // namespace aoi
