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


#include "spotflow/planner.hpp"

#include <chrono>
#include <memory>

#include "spotflow/error.hpp"

namespace spotflow {

std::string_view PlannerKindName(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::kDyna:
      return "dyna";
    case PlannerKind::kDynaNs:
      return "dyna-ns";
    case PlannerKind::kSpotOnly:
      return "spot-only";
  }
  return "unknown";
}

std::optional<PlannerKind> ParsePlannerKind(std::string_view name) {
  if (name == "dyna") return PlannerKind::kDyna;
  if (name == "dyna-ns") return PlannerKind::kDynaNs;
  if (name == "spot-only") return PlannerKind::kSpotOnly;
  return std::nullopt;
}

WorkflowJob ResolveJobTargets(const WorkflowJob& job, const Catalog& catalog,
                              const PlannerOptions& options) {
  WorkflowJob out = job;
  if (options.guarantee) out.guarantee_p = *options.guarantee;
  if (!(out.guarantee_p > 0.0 && out.guarantee_p <= 1.0)) {
    throw InvalidArgument("guarantee must lie in (0, 1]");
  }
  if (options.deadline) {
    out.deadline = *options.deadline;
  } else if (!(out.deadline > 0.0)) {
    if (!(options.deadline_factor >= 0.0)) {
      throw InvalidArgument("deadline factor must be >= 0");
    }
    const DeadlineBounds b =
        ComputeDeadlineBounds(job, catalog, options.samples, options.seed);
    out.deadline = b.Deadline(options.deadline_factor);
  }
  if (!(out.deadline > 0.0)) throw InvalidArgument("deadline must be > 0");
  return out;
}

WorkflowPlan PlanWorkflow(const WorkflowJob& input, const Catalog& catalog,
                          const SpotPriceTrace& trace,
                          const PlannerOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const WorkflowJob job = ResolveJobTargets(input, catalog, options);
  const TaskTimeTable table(job, catalog, options.samples, options.seed,
                            options.account_for_lag);
  const WorkflowComposer composer(job, options.samples, options.seed);
  const AStarResult astar = AStarConfigure(job, table, composer, options.astar);

  WorkflowPlan plan;
  plan.class_id = job.class_id;
  plan.planner = std::string(PlannerKindName(options.kind));
  plan.deadline = job.deadline;
  plan.guarantee_p = job.guarantee_p;
  plan.ondemand_cost = astar.expected_cost;
  plan.percentile = astar.percentile;
  plan.iterations = astar.iterations;
  for (const Task& t : job.tasks) plan.task_names.push_back(t.name);

  std::vector<std::unique_ptr<FailureModel>> models;
  std::vector<const FailureModel*> failure(catalog.size(), nullptr);
  for (const InstanceType& type : catalog.types()) {
    if (const PriceSeries* s = trace.Find(type.name)) {
      models.push_back(std::make_unique<FailureModel>(s, options.ffp));
      failure[static_cast<size_t>(type.id)] = models.back().get();
    }
  }

  switch (options.kind) {
    case PlannerKind::kDynaNs:
      for (TypeId t : astar.plan) {
        plan.configs.push_back(HybridConfig::OnDemand(t, catalog.at(t).ondemand_price));
      }
      plan.expected_cost = astar.expected_cost;
      break;
    case PlannerKind::kSpotOnly: {
      for (TypeId t : astar.plan) {
        if (failure[static_cast<size_t>(t)] == nullptr) {
          throw InvalidArgument("spot-only planning needs a price trace for " +
                                catalog.at(t).name);
        }
        plan.configs.push_back(HybridConfig({HybridDim{t, options.spot_only_bid, true},
                                             HybridDim{t, catalog.at(t).ondemand_price, false}}));
      }
      const HybridRefiner refiner(table, failure, options.refine, options.seed);
      for (size_t i = 0; i < plan.configs.size(); ++i) {
        plan.expected_cost += refiner.Cost(static_cast<TaskId>(i), plan.configs[i]).total;
      }
      plan.refined_tasks = plan.configs.size();
      break;
    }
    case PlannerKind::kDyna: {
      const HybridRefiner refiner(table, failure, options.refine, options.seed);
      for (size_t i = 0; i < astar.plan.size(); ++i) {
        const auto task = static_cast<TaskId>(i);
        HybridConfig config = refiner.RefineTask(task, astar.plan[i]);
        if (config.has_spot()) ++plan.refined_tasks;
        plan.expected_cost += refiner.Cost(task, config).total;
        plan.configs.push_back(std::move(config));
      }
      break;
    }
  }
  plan.planning_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return plan;
}

}  // namespace spotflow
