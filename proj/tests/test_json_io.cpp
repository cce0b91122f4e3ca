#include <gtest/gtest.h>

#include <sstream>

#include "aoi/error.hpp"
#include "aoi/json_io.hpp"

using namespace aoi;

TEST(JsonIo, DistributionRoundTrip) {
  const ServiceDistribution d({0.4, 0.3, 0.3});
  const json j = to_json(d);
  EXPECT_EQ(j.at("L"), 3);
  EXPECT_EQ(j.at("q").size(), 3u);
  const ServiceDistribution back = distribution_from_json(j);
  EXPECT_EQ(back.support(), 3);
  EXPECT_DOUBLE_EQ(back.pmf(2), 0.3);
}

TEST(JsonIo, PolicyForms) {
  const int K = 12;
  const int L = 3;
  const Policy dt = double_threshold({2, 2}, K, L);
  const Policy from_spec = policy_from_json(to_json(dt), K, L);
  EXPECT_TRUE(from_spec.same_table(dt));
  EXPECT_EQ(from_spec.thresholds()->vth2, 2);

  const Policy from_table = policy_from_json(policy_table_json(dt), K, L);
  EXPECT_TRUE(from_table.same_table(dt));

  EXPECT_TRUE(policy_from_json(to_json(always_preempt(K, L)), K, L).same_table(always_preempt(K, L)));

  json broken = policy_table_json(dt);
  broken["actions"].erase("3:1");
  EXPECT_THROW(policy_from_json(broken, K, L), Error);
}

TEST(JsonIo, SolverReportFields) {
  const auto result = relative_value_iteration(ServiceDistribution({0.7, 0.1, 0.2}), 30);
  const json j = solver_report_json(result);
  for (const char* key : {"gain", "iterations", "span_residual", "K", "tol", "policy", "value"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.dump(), solver_report_json(result).dump());
}

TEST(JsonIo, TraceCsv) {
  CycleTrace trace;
  trace.deliveries.push_back({3, 5, 1});
  std::ostringstream os;
  write_trace_csv(os, trace);
  EXPECT_EQ(os.str(), "i,S_i,D_i,M_i\n1,3,5,1\n");
}
