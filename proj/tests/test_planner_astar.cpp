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


#include <chrono>
#include <vector>

#include "doctest.h"
#include "spotflow/error.hpp"
#include "spotflow/planner_astar.hpp"
#include "testkit.hpp"

using namespace spotflow;

namespace {

WorkflowJob Chain(int n, double instr) {
  WorkflowJob job;
  job.class_id = "chain";
  for (int i = 0; i < n; ++i) {
    job.AddTask("t" + std::to_string(i), TaskProfile{instr * (1 + 0.3 * i), 2000.0 * i, 500, 300, 100});
    if (i > 0) job.AddEdge(i - 1, i);
  }
  return job;
}

Catalog FirstTypes(size_t n) {
  const Catalog m1 = Catalog::DefaultM1();
  return Catalog(std::vector<InstanceType>(m1.types().begin(), m1.types().begin() + n));
}

}  // namespace

TEST_CASE("single-task examples") {
  const Catalog c = FirstTypes(2);
  WorkflowJob job;
  job.AddTask("a", TaskProfile{4e12, 0, 0, 0, 0});  // 4000 s on small, 2000 s on medium
  job.guarantee_p = 0.96;
  job.deadline = 5000;
  {
    const TaskTimeTable table(job, c, 1000, 1);
    const WorkflowComposer comp(job, 1000, 1);
    const AStarResult r = AStarConfigure(job, table, comp);
    CHECK(r.plan == std::vector<TypeId>{0});
  }
  job.deadline = 3000;
  {
    const TaskTimeTable table(job, c, 1000, 1);
    const WorkflowComposer comp(job, 1000, 1);
    const AStarResult r = AStarConfigure(job, table, comp);
    CHECK(r.plan == std::vector<TypeId>{1});
    CHECK(r.percentile == doctest::Approx(2000));
    CHECK(r.expected_cost == doctest::Approx(0.12 * 2000 / 3600));
  }
  job.deadline = 1000;
  {
    const TaskTimeTable table(job, c, 1000, 1);
    const WorkflowComposer comp(job, 1000, 1);
    try {
      AStarConfigure(job, table, comp);
      FAIL("expected infeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInfeasible);
    }
  }
}

TEST_CASE("three-task chain over four types matches exhaustive enumeration") {
  const Catalog c = Catalog::DefaultM1();
  WorkflowJob job = Chain(3, 1.5e12);
  job.guarantee_p = 0.9;
  const TaskTimeTable table(job, c, 4000, 3);
  const WorkflowComposer comp(job, 4000, 3);
  const DeadlineBounds b = ComputeDeadlineBounds(job, c, 4000, 3);
  for (double f : {0.05, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    job.deadline = b.Deadline(f);
    const auto oracle = testkit::BruteForcePlan(job, table, comp);
    INFO("factor " << f);
    if (!oracle) {
      CHECK_THROWS_AS(AStarConfigure(job, table, comp), Error);
      continue;
    }
    const AStarResult r = AStarConfigure(job, table, comp);
    CHECK(testkit::OraclePlanCost(table, r.plan) == oracle->cost);
    CHECK(r.expected_cost == doctest::Approx(oracle->cost).epsilon(1e-12));
    CHECK(testkit::OracleNearestRank(PlanTimeSamples(table, comp, r.plan), job.guarantee_p) <=
          job.deadline);
  }
}

TEST_CASE("search equals brute force on random small workflows") {
  const auto fixtures = testkit::MakeAStarFixtures(60, 2718);
  int compared = 0;
  for (const testkit::AStarFixture& f : fixtures) {
    const TaskTimeTable table(f.job, f.catalog, 2000, 2718);
    const WorkflowComposer comp(f.job, 2000, 2718);
    const auto oracle = testkit::BruteForcePlan(f.job, table, comp);
    REQUIRE(oracle);
    for (bool greedy : {true, false}) {
      AStarParams params;
      params.greedy_incumbent = greedy;
      const AStarResult r = AStarConfigure(f.job, table, comp, params);
      INFO(f.job.class_id << " tasks=" << f.job.size() << " types=" << f.catalog.size()
                          << " greedy=" << greedy);
      CHECK(testkit::OraclePlanCost(table, r.plan) == oracle->cost);
    }
    ++compared;
  }
  CHECK(compared == 60);
}

TEST_CASE("search is deterministic and beats the greedy incumbent") {
  const Catalog c = Catalog::DefaultM1();
  WorkflowJob job = MakeMontage(3);
  job.guarantee_p = 0.9;
  job.deadline = ComputeDeadlineBounds(job, c, 2000, 1).Deadline(0.5);
  const TaskTimeTable table(job, c, 2000, 1);
  const WorkflowComposer comp(job, 2000, 1);
  const AStarResult a = AStarConfigure(job, table, comp);
  const AStarResult b = AStarConfigure(job, table, comp);
  CHECK(a.plan == b.plan);
  CHECK(a.iterations == b.iterations);
  CHECK(a.expected_cost == b.expected_cost);
  const std::vector<TypeId> greedy = GreedyFeasiblePlan(job, table, comp);
  CHECK(a.expected_cost <= PlanCost(table, greedy));
  CHECK(a.percentile <= job.deadline);
  CHECK(PlanCost(table, a.plan) == a.expected_cost);
}

TEST_CASE("faster types dominate slower ones task by task") {
  // Children only upgrade one dimension to a pricier type; on the shipped
  // catalog each upgrade yields a faster task distribution.
  const Catalog c = Catalog::DefaultM1();
  for (const WorkflowJob& job : {MakeMontage(3), MakeLigo(1, 2), MakeEpigenomics(2)}) {
    const TaskTimeTable table(job, c, 4000, 9);
    for (size_t t = 0; t < job.size(); ++t) {
      for (TypeId k = 1; k < static_cast<TypeId>(c.size()); ++k) {
        CHECK(Dominates(table.Planning(static_cast<TaskId>(t), k),
                        table.Planning(static_cast<TaskId>(t), k - 1), 0.01));
      }
    }
  }
}

TEST_CASE("task time table") {
  const Catalog c = FirstTypes(2);
  WorkflowJob job;
  job.AddTask("a", TaskProfile{3.6e12, 0, 0, 0, 0});
  const TaskTimeTable plain(job, c, 100, 1);
  CHECK(plain.Cost(0, 0) == doctest::Approx(0.06));
  CHECK(plain.Planning(0, 0).Mean() == 3600);
  const TaskTimeTable lag(job, c, 100, 1, true);
  CHECK(lag.Planning(0, 0).Mean() == 3600 + 120);
  CHECK(lag.Execution(0, 0).Mean() == 3600);
  CHECK(lag.Cost(0, 0) == doctest::Approx(0.06));
}
