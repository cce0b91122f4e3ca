#include "aoi/queue_model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "aoi/error.hpp"

namespace aoi {

ServiceDistribution::ServiceDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) {
    throw Error(ErrorCode::RejectsEmptyOrNegative, "service distribution is empty");
  }
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    if (!(pmf_[i] >= 0.0) || !std::isfinite(pmf_[i])) {
      throw Error(ErrorCode::RejectsEmptyOrNegative, "negative or non-finite probability",
                  "index " + std::to_string(i + 1));
    }
  }
  if (pmf_.front() <= 0.0) {
    throw Error(ErrorCode::RejectsZeroFirstSlot, "p_1 must be strictly positive");
  }
  const double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::RejectsUnnormalized, "probabilities do not sum to 1",
                "sum " + std::to_string(total));
  }
  while (pmf_.back() == 0.0) pmf_.pop_back();
  for (double& p : pmf_) p /= total;

  const std::size_t L = pmf_.size();
  survival_.assign(L, 0.0);
  double tail = 0.0;
  for (std::size_t i = L; i-- > 0;) {
    tail += pmf_[i];
    survival_[i] = tail;
  }
  hazard_.resize(L);
  for (std::size_t i = 0; i + 1 < L; ++i) hazard_[i] = pmf_[i] / survival_[i];
  hazard_[L - 1] = 1.0;

  for (std::size_t i = 0; i < L; ++i) mean_ += static_cast<double>(i + 1) * pmf_[i];
}

double ServiceDistribution::pmf(int i) const noexcept {
  if (i < 1 || i > support()) return 0.0;
  return pmf_[static_cast<std::size_t>(i - 1)];
}

double ServiceDistribution::hazard(int k) const {
  if (k < 1 || k > support()) {
    throw Error(ErrorCode::OutOfSupport, "hazard index outside 1..L",
                "k=" + std::to_string(k) + " L=" + std::to_string(support()));
  }
  return hazard_[static_cast<std::size_t>(k - 1)];
}

double ServiceDistribution::survival(int k) const noexcept {
  if (k <= 1) return 1.0;
  if (k > support()) return 0.0;
  return survival_[static_cast<std::size_t>(k - 1)];
}

double hazard(const ServiceDistribution& d, int k) { return d.hazard(k); }

bool is_geometric(const ServiceDistribution& d, double tol) {
  const auto q = d.hazards();
  for (std::size_t k = 1; k + 1 < q.size(); ++k) {
    if (std::abs(q[k] - q[0]) > tol) return false;
  }
  return true;
}

bool has_nondecreasing_hazard(const ServiceDistribution& d, double tol) {
  const auto q = d.hazards();
  for (std::size_t k = 1; k + 1 < q.size(); ++k) {
    if (q[k] + tol < q[k - 1]) return false;
  }
  return true;
}

}  // namespace aoi
