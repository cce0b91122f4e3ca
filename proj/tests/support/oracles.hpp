#pragma once

// Brute-force references written directly from the model definitions. They
// share no code with the library beyond plain vectors.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// v2 == 0 encodes an empty server.
struct OState {
  int v1;
  int v2;
  bool operator==(const OState&) const = default;
};

enum { kIdle = 0, kSample = 1, kContinue = 2 };

// q_k = p_k / sum_{i>=k} p_i.
std::vector<double> hazards(const std::vector<double>& p);

// Triple loop over v1 = 1..K, v2 in {1..min(v1, L-1)} plus the empty state.
std::vector<OState> states(int K, int L);

int find(const std::vector<OState>& grid, OState s);

// Successors of (s, a) on the age-capped grid.
std::vector<std::pair<OState, double>> step(OState s, int action, const std::vector<double>& q, int K);

using Rule = std::function<int(OState)>;

Eigen::MatrixXd kernel(const std::vector<OState>& grid, const Rule& rule, const std::vector<double>& q,
                       int K);

// Long-run average cost from `start` via the Cesaro limit of P, computed by
// repeated squaring of the lazy chain (I + P) / 2. Handles any chain.
double cesaro_gain(const Eigen::MatrixXd& P, const std::vector<OState>& grid, int start);

// Minimum over every deterministic stationary policy on S_K of the average
// age from (1, E). Exponential; keep the grid tiny.
double brute_force_optimal_gain(const std::vector<double>& p, int K);

// Average age of a rule from (1, E).
double rule_gain(const std::vector<double>& p, int K, const Rule& rule);

// Discounted optimal values V = min_a {v1 + alpha P_a V} by plain iteration to 1e-13.
std::vector<double> discounted_values(const std::vector<double>& p, int K, double alpha,
                                      std::vector<OState>* grid_out = nullptr);

// f_1..f_{L-1} of the necessary-condition recursion, written from its definition.
std::vector<double> f_recursion(const std::vector<double>& p);

// Random pmfs with support 1..max_L and p_1 >= 0.05.
std::vector<std::vector<double>> random_corpus(std::size_t n, int max_L, std::uint64_t seed);

}  // namespace oracle
