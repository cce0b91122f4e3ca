#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

std::vector<double> hazards(const std::vector<double>& p) {
  std::vector<double> q(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    double tail = 0.0;
    for (std::size_t i = k; i < p.size(); ++i) tail += p[i];
    q[k] = p[k] / tail;
  }
  return q;
}

std::vector<OState> states(int K, int L) {
  std::vector<OState> out;
  for (int v1 = 1; v1 <= K; ++v1) {
    for (int v2 = 1; v2 <= std::min(v1, L - 1); ++v2) out.push_back({v1, v2});
    out.push_back({v1, 0});
  }
  return out;
}

int find(const std::vector<OState>& grid, OState s) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == s) return static_cast<int>(i);
  }
  throw std::logic_error("state not on grid");
}

std::vector<std::pair<OState, double>> step(OState s, int action, const std::vector<double>& q, int K) {
  const int older = std::min(s.v1 + 1, K);
  std::vector<std::pair<OState, double>> out;
  auto add = [&](OState t, double prob) {
    if (prob > 0.0) out.emplace_back(t, prob);
  };
  if (action == kIdle) {
    add({older, 0}, 1.0);
  } else if (action == kSample) {
    add({1, 0}, q[0]);
    add({older, 1}, 1.0 - q[0]);
  } else {
    const double h = q[static_cast<std::size_t>(s.v2)];
    add({s.v2 + 1, 0}, h);
    add({older, s.v2 + 1}, 1.0 - h);
  }
  return out;
}

Eigen::MatrixXd kernel(const std::vector<OState>& grid, const Rule& rule, const std::vector<double>& q,
                       int K) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [t, prob] : step(grid[static_cast<std::size_t>(i)],
                                      rule(grid[static_cast<std::size_t>(i)]), q, K)) {
      P(i, find(grid, t)) += prob;
    }
  }
  return P;
}

double cesaro_gain(const Eigen::MatrixXd& P, const std::vector<OState>& grid, int start) {
  const auto n = P.rows();
  Eigen::MatrixXd M = 0.5 * (Eigen::MatrixXd::Identity(n, n) + P);
  for (int k = 0; k < 50; ++k) {
    M = M * M;
    // Squaring doubles the rounding drift of the row sums; pull it back.
    for (Eigen::Index i = 0; i < n; ++i) M.row(i) /= M.row(i).sum();
  }
  double g = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) g += M(start, j) * grid[static_cast<std::size_t>(j)].v1;
  return g;
}

double rule_gain(const std::vector<double>& p, int K, const Rule& rule) {
  const auto q = hazards(p);
  const auto grid = states(K, static_cast<int>(p.size()));
  return cesaro_gain(kernel(grid, rule, q, K), grid, find(grid, {1, 0}));
}

double brute_force_optimal_gain(const std::vector<double>& p, int K) {
  const auto q = hazards(p);
  const auto grid = states(K, static_cast<int>(p.size()));
  const std::size_t n = grid.size();
  if (n > 20) throw std::logic_error("grid too large for enumeration");
  const int start = find(grid, {1, 0});
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    // bit set: Sample; clear: Idle at empty states, Continue at busy ones.
    auto rule = [&](OState s) {
      const bool bit = (mask >> find(grid, s)) & 1u;
      if (bit) return static_cast<int>(kSample);
      return s.v2 == 0 ? static_cast<int>(kIdle) : static_cast<int>(kContinue);
    };
    best = std::min(best, cesaro_gain(kernel(grid, rule, q, K), grid, start));
  }
  return best;
}

std::vector<double> discounted_values(const std::vector<double>& p, int K, double alpha,
                                      std::vector<OState>* grid_out) {
  const auto q = hazards(p);
  const auto grid = states(K, static_cast<int>(p.size()));
  std::vector<double> V(grid.size(), 0.0);
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> next(grid.size());
    double diff = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      const std::vector<int> actions = grid[i].v2 == 0 ? std::vector<int>{kIdle, kSample}
                                                       : std::vector<int>{kSample, kContinue};
      for (int a : actions) {
        double value = grid[i].v1;
        for (const auto& [t, prob] : step(grid[i], a, q, K)) {
          value += alpha * prob * V[static_cast<std::size_t>(find(grid, t))];
        }
        best = std::min(best, value);
      }
      next[i] = best;
      diff = std::max(diff, std::abs(next[i] - V[i]));
    }
    V = std::move(next);
    if (diff < 1e-13 * std::max(1.0, *std::max_element(V.begin(), V.end()))) break;
  }
  if (grid_out) *grid_out = grid;
  return V;
}

std::vector<double> f_recursion(const std::vector<double>& p) {
  const auto q = hazards(p);
  const std::size_t L = p.size();
  if (L < 3) return {1.0 / q[0]};
  std::vector<double> f(L - 1, 0.0);
  f[0] = 1.0 / q[0];
  f[L - 2] = 1.0;
  for (std::size_t i = L - 2; i-- > 1;) f[i] = std::min(1.0 + (1.0 - q[i + 1]) * f[i + 1], f[0]);
  return f;
}

std::vector<std::vector<double>> random_corpus(std::size_t n, int max_L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> support(1, max_L);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  std::vector<std::vector<double>> out;
  while (out.size() < n) {
    const int L = support(rng);
    std::vector<double> p(static_cast<std::size_t>(L));
    for (double& x : p) x = weight(rng) + 0.02;
    double total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
    if (p[0] < 0.05) continue;
    // Renormalize exactly so the library's 1e-9 sum check passes.
    total = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) total += p[i];
    p[0] = 1.0 - total;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace oracle
