#pragma once

#include <span>
#include <vector>

namespace aoi {

/// Service-time law of the error-free preemptive server.
///
/// Holds the pmf p_1..p_L of the service time Y (in slots) and the derived
/// hazard rates q_k = P(Y = k | Y >= k). Instances are immutable and validated
/// on construction; trailing zero probabilities are trimmed so that L is the
/// smallest support bound, and q_L is pinned to exactly 1.
class ServiceDistribution {
 public:
  /// Input tolerance on the sum of `pmf`; the stored pmf is renormalized.
  static constexpr double kNormalizationTolerance = 1e-9;

  explicit ServiceDistribution(std::vector<double> pmf);

  int support() const noexcept { return static_cast<int>(pmf_.size()); }

  /// P(Y = i), 1-based. Returns 0 outside 1..L.
  double pmf(int i) const noexcept;

  /// Hazard q_k for 1 <= k <= L; throws OutOfSupport otherwise.
  double hazard(int k) const;

  /// P(Y >= k), 1-based; 1 for k <= 1, 0 for k > L.
  double survival(int k) const noexcept;

  double mean_service() const noexcept { return mean_; }

  std::span<const double> pmf_values() const noexcept { return pmf_; }
  std::span<const double> hazards() const noexcept { return hazard_; }

 private:
  std::vector<double> pmf_;
  std::vector<double> hazard_;
  std::vector<double> survival_;
  double mean_ = 0.0;
};

/// Convenience wrapper mirroring ServiceDistribution::hazard.
double hazard(const ServiceDistribution& d, int k);

/// True iff every interior hazard q_1..q_{L-1} equals q_1 within `tol`.
bool is_geometric(const ServiceDistribution& d, double tol = 1e-12);

/// True iff q_1 <= q_2 <= ... <= q_{L-1}.
bool has_nondecreasing_hazard(const ServiceDistribution& d, double tol = 1e-12);

}  // namespace aoi
