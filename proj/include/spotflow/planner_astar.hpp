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


#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spotflow/cloud_model.hpp"
#include "spotflow/distributions.hpp"
#include "spotflow/workflow_dag.hpp"

namespace spotflow {

// Memoized per (task, type) execution time distributions and their expected
// on-demand costs. Immutable after construction, so several planners may
// share one table.
class TaskTimeTable {
 public:
  // With include_ondemand_lag, planning distributions are shifted by each
  // type's on-demand acquisition lag.
  TaskTimeTable(const WorkflowJob& job, const Catalog& catalog, size_t samples,
                uint64_t seed, bool include_ondemand_lag = false);

  size_t task_count() const { return task_count_; }
  size_t type_count() const { return type_count_; }
  size_t samples() const { return samples_; }
  uint64_t seed() const { return seed_; }
  bool includes_lag() const { return include_lag_; }
  const Catalog& catalog() const { return *catalog_; }

  // Raw execution time of task on type.
  const EmpiricalDistribution& Execution(TaskId task, TypeId type) const;
  // Execution time as seen by the deadline check (lag added when enabled).
  const EmpiricalDistribution& Planning(TaskId task, TypeId type) const;
  // price * E[execution] / 3600.
  double Cost(TaskId task, TypeId type) const;

 private:
  const Catalog* catalog_;
  size_t task_count_;
  size_t type_count_;
  size_t samples_;
  uint64_t seed_;
  bool include_lag_;
  std::vector<EmpiricalDistribution> exec_;
  std::vector<EmpiricalDistribution> planning_;
  std::vector<double> cost_;
};

struct AStarParams {
  int max_iter = 10000;
  // Start the upper bound from a greedy feasible plan instead of +inf.
  bool greedy_incumbent = true;
};

struct AStarResult {
  std::vector<TypeId> plan;
  double expected_cost = 0.0;
  double percentile = 0.0;  // of the workflow time at guarantee_p
  int iterations = 0;       // states popped
  size_t generated = 0;     // states pushed, root included
  size_t evaluated = 0;     // workflow distributions computed
  bool from_incumbent = false;  // no popped state beat the greedy plan
};

double PlanCost(const TaskTimeTable& table, std::span<const TypeId> plan);

std::vector<double> PlanTimeSamples(const TaskTimeTable& table,
                                    const WorkflowComposer& composer,
                                    std::span<const TypeId> plan);

// Repeatedly upgrades the task on the current critical path (per-task
// quantile weights) with the best time saved per unit cost until the
// workflow meets its deadline. Empty when no upgrade helps any more.
std::vector<TypeId> GreedyFeasiblePlan(const WorkflowJob& job,
                                       const TaskTimeTable& table,
                                       const WorkflowComposer& composer,
                                       size_t* evaluations = nullptr);

// Cheapest plan whose workflow time percentile meets the job deadline.
// Throws Error(kInfeasible) with the closest miss when none is found within
// max_iter pops.
AStarResult AStarConfigure(const WorkflowJob& job, const TaskTimeTable& table,
                           const WorkflowComposer& composer,
                           const AStarParams& params = {});

}  // namespace spotflow
