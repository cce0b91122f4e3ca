#include "aoi/policies.hpp"

#include <algorithm>
#include <future>
#include <string>

#include "aoi/error.hpp"

namespace aoi {

namespace {

struct RowResult {
  std::vector<SurfacePoint> points;
  std::size_t best = 0;
};

RowResult evaluate_row(int vth1, const ServiceDistribution& d, int K,
                       const PolicyEvaluator& evaluator) {
  const int L = d.support();
  std::vector<std::future<double>> jobs;
  jobs.reserve(static_cast<std::size_t>(L));
  for (int vth2 = 1; vth2 <= L; ++vth2) {
    jobs.push_back(std::async(std::launch::async, [&, vth2] {
      return evaluator(double_threshold(DoubleThresholdSpec{vth1, vth2}, K, L));
    }));
  }
  RowResult row;
  for (int vth2 = 1; vth2 <= L; ++vth2) {
    const double gain = jobs[static_cast<std::size_t>(vth2 - 1)].get();
    row.points.push_back(SurfacePoint{DoubleThresholdSpec{vth1, vth2}, gain});
    if (gain < row.points[row.best].gain - kSearchTieTolerance) row.best = row.points.size() - 1;
  }
  return row;
}

void absorb(ThresholdSearchResult& result, const RowResult& row) {
  const auto& candidate = row.points[row.best];
  if (result.surface.empty() || candidate.gain < result.gain - kSearchTieTolerance) {
    result.best = candidate.spec;
    result.gain = candidate.gain;
  }
  result.surface.insert(result.surface.end(), row.points.begin(), row.points.end());
}

}  // namespace

Policy always_preempt(int K, int L) {
  StateSpace space(K, L);
  std::vector<Action> actions(space.size(), Action::Sample);
  return Policy(std::move(space), std::move(actions), PolicyKind::AlwaysPreempt);
}

void validate(const DoubleThresholdSpec& spec, int L) {
  if (spec.vth1 < 1 || spec.vth2 < 1 || spec.vth2 > L) {
    throw Error(ErrorCode::InvalidThresholds, "thresholds need vth1 >= 1 and 1 <= vth2 <= L",
                "vth1=" + std::to_string(spec.vth1) + " vth2=" + std::to_string(spec.vth2) +
                    " L=" + std::to_string(L));
  }
}

Policy double_threshold(const DoubleThresholdSpec& spec, int K, int L) {
  validate(spec, L);
  StateSpace space(K, L);
  std::vector<Action> actions(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const State& s = space[i];
    if (s.empty() || s.v1 <= spec.vth1 || s.v2 >= spec.vth2) {
      actions[i] = Action::Sample;
    } else {
      actions[i] = Action::Continue;
    }
  }
  return Policy(std::move(space), std::move(actions), PolicyKind::DoubleThreshold, spec);
}

ThresholdSearchResult search_double_threshold(const ServiceDistribution& d, int K,
                                              const PolicyEvaluator& evaluator, int max_vth1) {
  const int cap = max_vth1 > 0 ? max_vth1 : std::max(1, K / 2);
  ThresholdSearchResult result;
  for (int vth1 = 1; vth1 <= cap; ++vth1) absorb(result, evaluate_row(vth1, d, K, evaluator));
  return result;
}

ThresholdSearchResult timeout_baseline(const ServiceDistribution& d, int K,
                                     const PolicyEvaluator& evaluator) {
  ThresholdSearchResult result;
  absorb(result, evaluate_row(1, d, K, evaluator));
  return result;
}

}  // namespace aoi
