#include "aoi/evaluation.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <string>

#include "aoi/error.hpp"
#include "aoi/policies.hpp"

namespace aoi {

std::string_view to_string(EvalMethod m) {
  switch (m) {
    case EvalMethod::Chain: return "chain";
    case EvalMethod::Renewal: return "renewal";
    case EvalMethod::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

namespace {

struct Edge {
  std::size_t to;
  double prob;
};

std::vector<std::size_t> reachable(const std::vector<std::vector<std::size_t>>& adjacency,
                                   std::size_t start) {
  std::vector<char> seen(adjacency.size(), 0);
  std::vector<std::size_t> order{start};
  seen[start] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t next : adjacency[order[head]]) {
      if (!seen[next]) {
        seen[next] = 1;
        order.push_back(next);
      }
    }
  }
  return order;
}

std::vector<double> stationary_direct(const std::vector<std::vector<Edge>>& rows,
                                      std::size_t ref) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  std::vector<Eigen::Triplet<double>> triplets;
  // Rows of A are balance equations (P^T - I) pi = 0; the reference row is
  // replaced by the normalization sum(pi) = 1.
  for (std::size_t from = 0; from < rows.size(); ++from) {
    for (const Edge& e : rows[from]) {
      if (e.to != ref) triplets.emplace_back(e.to, from, e.prob);
    }
    if (from != ref) triplets.emplace_back(from, from, -1.0);
    triplets.emplace_back(ref, from, 1.0);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::NonErgodicChain, "stationary system is singular");
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(static_cast<Eigen::Index>(ref)) = 1.0;
  const Eigen::VectorXd pi = lu.solve(b);
  return {pi.data(), pi.data() + pi.size()};
}

std::vector<double> stationary_power(const std::vector<std::vector<Edge>>& rows) {
  // Lazy chain (I + P) / 2: same stationary law, aperiodic.
  std::vector<double> pi(rows.size(), 1.0 / static_cast<double>(rows.size()));
  std::vector<double> next(rows.size());
  for (std::size_t iter = 0; iter < 10'000'000; ++iter) {
    for (std::size_t i = 0; i < pi.size(); ++i) next[i] = 0.5 * pi[i];
    for (std::size_t from = 0; from < rows.size(); ++from) {
      for (const Edge& e : rows[from]) next[e.to] += 0.5 * pi[from] * e.prob;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) change += std::abs(next[i] - pi[i]);
    std::swap(pi, next);
    if (change < 1e-12) return pi;
  }
  throw Error(ErrorCode::NoConvergence, "power iteration for the stationary law did not converge");
}

}  // namespace

namespace {

struct InducedChain {
  std::vector<std::vector<Edge>> rows;
  std::vector<std::vector<std::size_t>> forward;
  std::vector<std::vector<std::size_t>> backward;
};

InducedChain induced_chain(const Policy& policy, const ServiceDistribution& d, int K) {
  const StateSpace& space = policy.space();
  if (space.age_cap() != K || space.support() != d.support()) {
    throw Error(ErrorCode::InvalidGrid, "policy grid does not match (K, L)",
                "K=" + std::to_string(K) + " L=" + std::to_string(d.support()));
  }
  const std::size_t n = space.size();
  InducedChain chain{std::vector<std::vector<Edge>>(n), std::vector<std::vector<std::size_t>>(n),
                     std::vector<std::vector<std::size_t>>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : transitions_truncated(space[i], policy.at_index(i), d, K)) {
      const std::size_t j = space.index(t.next);
      chain.rows[i].push_back(Edge{j, t.prob});
      chain.forward[i].push_back(j);
      chain.backward[j].push_back(i);
    }
  }
  return chain;
}

std::vector<char> recurrent_members(const InducedChain& chain, const StateSpace& space) {
  const std::size_t n = space.size();
  const std::size_t ref = space.reference_index();
  std::vector<char> returns(n, 0);
  for (std::size_t i : reachable(chain.backward, ref)) returns[i] = 1;
  std::vector<char> members(n, 0);
  for (std::size_t i : reachable(chain.forward, ref)) {
    if (!returns[i]) {
      throw Error(ErrorCode::NonErgodicChain, "state (1,E) is not recurrent under the policy",
                  "no return from " + to_string(space[i]));
    }
    members[i] = 1;
  }
  return members;
}

}  // namespace

std::vector<char> recurrent_class(const Policy& policy, const ServiceDistribution& d, int K) {
  return recurrent_members(induced_chain(policy, d, K), policy.space());
}

EvalReport exact_average_age(const Policy& policy, const ServiceDistribution& d, int K) {
  const StateSpace& space = policy.space();
  const InducedChain chain = induced_chain(policy, d, K);
  const std::vector<char> in_class = recurrent_members(chain, space);
  const std::size_t n = space.size();
  const std::size_t ref = space.reference_index();

  // Re-index the recurrent class in grid order.
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_class[i]) members.push_back(i);
  }
  std::vector<std::size_t> local(n, n);
  for (std::size_t k = 0; k < members.size(); ++k) local[members[k]] = k;
  std::vector<std::vector<Edge>> rows(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    for (const Edge& e : chain.rows[members[k]]) rows[k].push_back(Edge{local[e.to], e.prob});
  }

  ChainDetail detail;
  detail.recurrent_states = members.size();
  detail.power_iteration = members.size() > kDirectSolveLimit;
  const auto pi = detail.power_iteration ? stationary_power(rows)
                                         : stationary_direct(rows, local[ref]);

  detail.stationary.assign(n, 0.0);
  double age = 0.0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const State& s = space[members[k]];
    detail.stationary[members[k]] = pi[k];
    age += pi[k] * static_cast<double>(s.v1);
    if (s.v1 == K) detail.mass_at_cap += pi[k];
  }
  return EvalReport{EvalMethod::Chain, age, K, std::move(detail)};
}

ValueFunction policy_relative_values(const Policy& policy, const ServiceDistribution& d, int K) {
  const StateSpace& space = policy.space();
  const InducedChain chain = induced_chain(policy, d, K);
  recurrent_members(chain, space);
  const std::size_t n = space.size();
  const auto gain_col = static_cast<Eigen::Index>(n);
  const std::size_t ref = space.reference_index();

  // Unknowns (h_0..h_{n-1}, g); the last row pins h(1, E) = 0.
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs(gain_col + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    triplets.emplace_back(row, row, 1.0);
    for (const Edge& e : chain.rows[i]) triplets.emplace_back(row, e.to, -e.prob);
    triplets.emplace_back(row, gain_col, 1.0);
    rhs(row) = static_cast<double>(space[i].v1);
  }
  triplets.emplace_back(gain_col, ref, 1.0);
  rhs(gain_col) = 0.0;
  Eigen::SparseMatrix<double> A(gain_col + 1, gain_col + 1);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::NonErgodicChain, "Poisson equation of the policy is singular");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  ValueFunction V(space, std::vector<double>(x.data(), x.data() + n));
  V.gain = x(gain_col);
  return V;
}

EvalReport renewal_reward_age(const DoubleThresholdSpec& spec, const ServiceDistribution& d) {
  const int L = d.support();
  validate(spec, L);
  const int phase_two_cap = std::min(spec.vth2, L);

  struct CycleStats {
    double length = 0.0;
    double age_sum = 0.0;
    std::vector<double> next_start;  // index j-1: delivered with service time j
    double residual = 0.0;
  };

  // A cycle starts in the slot right after a delivery, with the monitor age
  // equal to the service time of the delivered packet. Attempts are indexed
  // by the monitor age at which the packet is sampled.
  auto cycle_from = [&](int start_age) {
    CycleStats stats;
    stats.next_start.assign(static_cast<std::size_t>(L), 0.0);
    std::vector<double> mass{1.0};  // mass[v - start_age]
    double pending = 1.0;
    for (std::size_t offset = 0; offset < mass.size() && pending >= kRenewalResidualMass; ++offset) {
      const double m = mass[offset];
      if (m == 0.0) continue;
      pending -= m;
      const int v = start_age + static_cast<int>(offset);
      const int attempt_cap = (v + 1 <= spec.vth1) ? 1 : phase_two_cap;
      for (int k = 0; k < attempt_cap; ++k) {
        const double alive = d.survival(k + 1);
        stats.length += m * alive;
        stats.age_sum += m * alive * static_cast<double>(v + k);
      }
      for (int j = 1; j <= attempt_cap; ++j) {
        stats.next_start[static_cast<std::size_t>(j - 1)] += m * d.pmf(j);
      }
      const double dropped = m * d.survival(attempt_cap + 1);
      if (dropped > 0.0) {
        const std::size_t target = offset + static_cast<std::size_t>(attempt_cap);
        if (mass.size() <= target) mass.resize(target + 1, 0.0);
        mass[target] += dropped;
        pending += dropped;
      }
    }
    stats.residual = std::max(pending, 0.0);
    return stats;
  };

  std::vector<CycleStats> cycles(static_cast<std::size_t>(L));
  std::vector<char> visited(static_cast<std::size_t>(L), 0);
  std::vector<int> order{1};
  visited[0] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int a = order[head];
    auto& stats = cycles[static_cast<std::size_t>(a - 1)];
    stats = cycle_from(a);
    for (int j = 1; j <= L; ++j) {
      if (stats.next_start[static_cast<std::size_t>(j - 1)] > 0.0 && !visited[j - 1]) {
        visited[static_cast<std::size_t>(j - 1)] = 1;
        order.push_back(j);
      }
    }
  }

  // Stationary law of the start-age chain over the visited ages.
  std::sort(order.begin(), order.end());
  const auto m = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& stats = cycles[static_cast<std::size_t>(order[r] - 1)];
    const double delivered =
        std::accumulate(stats.next_start.begin(), stats.next_start.end(), 0.0);
    for (Eigen::Index c = 0; c < m; ++c) {
      A(c, r) += stats.next_start[static_cast<std::size_t>(order[c] - 1)] / delivered;
    }
    A(r, r) -= 1.0;
  }
  A.row(0).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(0) = 1.0;
  const Eigen::VectorXd nu = A.fullPivLu().solve(b);

  RenewalDetail detail;
  detail.start_age_distribution.assign(static_cast<std::size_t>(L), 0.0);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& stats = cycles[static_cast<std::size_t>(order[r] - 1)];
    detail.start_age_distribution[static_cast<std::size_t>(order[r] - 1)] = nu(r);
    detail.expected_cycle_length += nu(r) * stats.length;
    detail.expected_cycle_age_sum += nu(r) * stats.age_sum;
    detail.residual_mass = std::max(detail.residual_mass, stats.residual);
  }
  const double age = detail.expected_cycle_age_sum / detail.expected_cycle_length;
  return EvalReport{EvalMethod::Renewal, age, 0, std::move(detail)};
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ReplicationOutcome {
  double mean_age = 0.0;
  CycleTrace trace;
  std::vector<std::int64_t> ages;
};

ReplicationOutcome run_replication(const Policy& policy, const ServiceDistribution& d,
                                   const SimulationOptions& options, std::size_t replication,
                                   bool record) {
  std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(options.seed >> 32),
                    static_cast<std::uint32_t>(replication)};
  std::mt19937_64 rng(seq);

  ReplicationOutcome out;
  if (record && options.record_ages) out.ages.reserve(static_cast<std::size_t>(options.horizon));

  std::int64_t age = 1;
  std::int64_t packet_age = 0;  // 0: server empty
  std::int64_t generated = 0;   // generation slot of the packet in service
  std::int64_t preempted = 0;
  double age_sum = 0.0;

  for (std::int64_t t = 1; t <= options.horizon; ++t) {
    age_sum += static_cast<double>(age);
    if (record && options.record_ages) out.ages.push_back(age);

    const State view{static_cast<int>(std::min<std::int64_t>(age, policy.space().age_cap())),
                     packet_age == 0 ? State::kEmpty : static_cast<int>(packet_age)};
    const Action a = policy.lookup_saturated(view);

    std::int64_t delivered_age = 0;
    switch (a) {
      case Action::Idle:
        break;
      case Action::Sample:
        if (packet_age != 0) ++preempted;
        generated = t;
        packet_age = 0;
        if (uniform01(rng) < d.hazard(1)) delivered_age = 1;
        break;
      case Action::Continue:
        if (uniform01(rng) < d.hazard(static_cast<int>(packet_age) + 1)) {
          delivered_age = packet_age + 1;
        }
        break;
    }

    if (delivered_age > 0) {
      if (record && options.record_trace) {
        out.trace.deliveries.push_back(DeliveryRecord{generated, t + 1, preempted});
      }
      preempted = 0;
      age = delivered_age;
      packet_age = 0;
    } else {
      ++age;
      if (a != Action::Idle) packet_age += 1;
    }
  }
  out.mean_age = age_sum / static_cast<double>(options.horizon);
  return out;
}

}  // namespace

SimulationResult simulate(const Policy& policy, const ServiceDistribution& d,
                          const SimulationOptions& options) {
  if (options.horizon < kMinimumHorizon) {
    throw Error(ErrorCode::HorizonTooShort, "simulation horizon is too short",
                "horizon=" + std::to_string(options.horizon) +
                    " minimum=" + std::to_string(kMinimumHorizon));
  }
  if (options.replications == 0) {
    throw Error(ErrorCode::InvalidInput, "at least one replication is required");
  }
  if (policy.space().support() != d.support()) {
    throw Error(ErrorCode::InvalidGrid, "policy grid does not match the distribution support");
  }

  std::vector<std::future<ReplicationOutcome>> jobs;
  jobs.reserve(options.replications);
  for (std::size_t r = 0; r < options.replications; ++r) {
    jobs.push_back(std::async(std::launch::async, [&, r] {
      return run_replication(policy, d, options, r, r == 0);
    }));
  }

  SimulationResult result;
  MonteCarloDetail detail;
  detail.slots = options.horizon;
  detail.replications = options.replications;
  detail.seed = options.seed;
  for (std::size_t r = 0; r < options.replications; ++r) {
    auto outcome = jobs[r].get();
    detail.replication_means.push_back(outcome.mean_age);
    if (r == 0) {
      result.trace = std::move(outcome.trace);
      result.ages = std::move(outcome.ages);
    }
  }

  const auto R = static_cast<double>(options.replications);
  const double mean =
      std::accumulate(detail.replication_means.begin(), detail.replication_means.end(), 0.0) / R;
  if (options.replications > 1) {
    double ss = 0.0;
    for (double x : detail.replication_means) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (R - 1.0));
    const boost::math::students_t dist(R - 1.0);
    detail.ci_halfwidth = boost::math::quantile(dist, 0.975) * sd / std::sqrt(R);
  }
  result.report = EvalReport{EvalMethod::MonteCarlo, mean, policy.space().age_cap(), std::move(detail)};
  return result;
}

}  // namespace aoi
