// Copyright 2026 The spotflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Independent reference implementations and randomized fixtures shared by
// the unit tests and the acceptance binary.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spotflow/cloud_model.hpp"
#include "spotflow/distributions.hpp"
#include "spotflow/planner_astar.hpp"
#include "spotflow/random.hpp"
#include "spotflow/spot_market.hpp"
#include "spotflow/workflow_dag.hpp"

#ifndef SPOTFLOW_DATA_DIR
#define SPOTFLOW_DATA_DIR "data"
#endif

namespace spotflow::testkit {

inline std::string DataPath(const std::string& rel) {
  return std::string(SPOTFLOW_DATA_DIR) + "/" + rel;
}

// Sort-and-count nearest rank: smallest v with #{x <= v} >= q * n.
double OracleNearestRank(std::vector<double> v, double q);

// Fraction of samples <= t, by linear count.
double OracleCdf(const std::vector<double>& v, double t);

// max over the merged grid of F_c1(t) - F_c2(t), by brute force.
double OracleDominanceGap(const std::vector<double>& c2, const std::vector<double>& c1);

// Two-sample Kolmogorov distance.
double KolmogorovDistance(std::vector<double> a, std::vector<double> b);

// Random nonnegative distribution: gamma, truncated normal, discrete
// uniform or a two-point mixture, with 2..max_n samples.
EmpiricalDistribution RandomDistribution(Rng& rng, size_t max_n = 3000);

struct PropertyOutcome {
  std::string name;
  int cases = 0;
  int failures = 0;
  uint64_t base_seed = 0;
  std::optional<uint64_t> first_failure;  // seed of the first failing case
};

// Runs `check(seed)` for `cases` seeds derived from `base_seed`.
PropertyOutcome RunProperty(const std::string& name, int cases, uint64_t base_seed,
                            const std::function<bool(uint64_t)>& check);

// The distribution-arithmetic property suite.
std::vector<PropertyOutcome> DistributionProperties(int cases, uint64_t base_seed);

// Exhaustive first-failure oracle: every integer start second in
// [start, end) is walked forward segment by segment. Returns P(elapsed < t)
// restricted to elapsed <= horizon, for t = 0, step, 2 step, ..., horizon.
std::vector<double> ExhaustiveCumulativeFailure(const PriceSeries& series, double bid,
                                                int64_t step, int64_t horizon);

// Small random planning instance.
struct AStarFixture {
  WorkflowJob job;
  Catalog catalog;
};

// `count` random DAGs with 1..max_tasks tasks over 1..max_types types, each
// with a deadline that the all-fastest plan meets.
std::vector<AStarFixture> MakeAStarFixtures(int count, uint64_t seed, int max_tasks = 4,
                                            int max_types = 3);

// Sum of price * mean / 3600, computed directly from the samples.
double OraclePlanCost(const TaskTimeTable& table, const std::vector<TypeId>& plan);

struct BruteForceResult {
  std::vector<TypeId> plan;
  double cost = 0.0;
  size_t feasible = 0;
};

// Enumerates every type vector; nullopt when none is feasible.
std::optional<BruteForceResult> BruteForcePlan(const WorkflowJob& job, const TaskTimeTable& table,
                                               const WorkflowComposer& composer);

}  // namespace spotflow::testkit
