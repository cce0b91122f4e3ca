#pragma once

#include <functional>
#include <vector>

#include "aoi/policy.hpp"
#include "aoi/queue_model.hpp"

namespace aoi {

/// Sample (and preempt) in every state.
Policy always_preempt(int K, int L);

/// Throws InvalidThresholds unless vth1 >= 1 and 1 <= vth2 <= L.
void validate(const DoubleThresholdSpec& spec, int L);

/// Table form of the double-threshold rule:
///   empty server            -> Sample
///   busy, v1 <= vth1        -> Sample   (continuous preemption phase)
///   busy, v2 <  vth2        -> Continue
///   busy, v2 >= vth2        -> Sample   (drop and resample)
Policy double_threshold(const DoubleThresholdSpec& spec, int K, int L);

/// Average age of a policy; must be safe to call concurrently.
using PolicyEvaluator = std::function<double(const Policy&)>;

struct SurfacePoint {
  DoubleThresholdSpec spec;
  double gain = 0.0;
};

struct ThresholdSearchResult {
  DoubleThresholdSpec best;
  double gain = 0.0;
  std::vector<SurfacePoint> surface;  // every evaluated pair, vth1 major
};

/// Gains closer than this count as ties; the smallest thresholds win.
inline constexpr double kSearchTieTolerance = 1e-12;

/// Exhaustive search over vth1 = 1..max_vth1 and vth2 = 1..L, with
/// max_vth1 = max(1, K / 2) when not given. The whole vth1 range is scanned:
/// the best row gain can sit on a plateau (every row contains the
/// always-preempt table at vth2 = 1) before the optimum appears.
/// Candidates of one row are evaluated concurrently.
ThresholdSearchResult search_double_threshold(const ServiceDistribution& d, int K,
                                              const PolicyEvaluator& evaluator,
                                              int max_vth1 = 0);

/// The same search restricted to vth1 = 1 (timeout-style baseline).
ThresholdSearchResult timeout_baseline(const ServiceDistribution& d, int K,
                                     const PolicyEvaluator& evaluator);

}  // namespace aoi
