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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spotflow/cloud_model.hpp"
#include "spotflow/planner_astar.hpp"
#include "spotflow/planner_hybrid.hpp"
#include "spotflow/spot_market.hpp"
#include "spotflow/workflow_dag.hpp"

namespace spotflow {

enum class PlannerKind {
  kDyna,      // A* plus spot refinement
  kDynaNs,    // A* only, on-demand everywhere
  kSpotOnly,  // A* types, one spot dim per task at a fixed high bid
};

std::string_view PlannerKindName(PlannerKind kind);
std::optional<PlannerKind> ParsePlannerKind(std::string_view name);

inline constexpr double kSpotOnlyBid = 1000.0;

struct PlannerOptions {
  PlannerKind kind = PlannerKind::kDyna;
  size_t samples = kDefaultSampleCount;
  uint64_t seed = 1;
  AStarParams astar;
  RefineParams refine;
  FfpParams ffp;
  double spot_only_bid = kSpotOnlyBid;
  // Include acquisition lag in the distributions the planner checks.
  bool account_for_lag = false;
  // Deadline: explicit value, else the workflow's own, else
  // d_min + factor * (d_max - d_min).
  std::optional<double> deadline;
  double deadline_factor = 0.5;
  std::optional<double> guarantee;
};

struct WorkflowPlan {
  std::string class_id;
  std::string planner;
  double deadline = 0.0;
  double guarantee_p = 0.0;
  std::vector<std::string> task_names;  // by task id
  std::vector<HybridConfig> configs;    // by task id
  double ondemand_cost = 0.0;  // expected cost of the on-demand plan
  double expected_cost = 0.0;  // after refinement
  double percentile = 0.0;     // on-demand plan, at guarantee_p
  int iterations = 0;
  double planning_seconds = 0.0;
  size_t refined_tasks = 0;  // tasks that gained a spot dim
};

// Deadline and guarantee the planner would use for job.
WorkflowJob ResolveJobTargets(const WorkflowJob& job, const Catalog& catalog,
                              const PlannerOptions& options);

WorkflowPlan PlanWorkflow(const WorkflowJob& job, const Catalog& catalog,
                          const SpotPriceTrace& trace,
                          const PlannerOptions& options);

// Plans keyed by workflow class id, stored as JSON.
class PlanCache {
 public:
  void Put(WorkflowPlan plan);
  const WorkflowPlan* Find(const std::string& class_id) const;
  const std::map<std::string, WorkflowPlan>& plans() const { return plans_; }
  size_t size() const { return plans_.size(); }

  std::string ToJson(const Catalog& catalog) const;
  // Type names are resolved against catalog; unknown names are kMismatch.
  static PlanCache FromJson(std::string_view json, const Catalog& catalog,
                            const std::string& source = "plan cache");

  void Save(const std::string& path, const Catalog& catalog) const;
  static PlanCache Load(const std::string& path, const Catalog& catalog);

 private:
  std::map<std::string, WorkflowPlan> plans_;
};

}  // namespace spotflow
