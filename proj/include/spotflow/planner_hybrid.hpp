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
#include <optional>
#include <span>
#include <vector>

#include "spotflow/distributions.hpp"
#include "spotflow/planner_astar.hpp"
#include "spotflow/spot_market.hpp"
#include "spotflow/workflow_dag.hpp"

namespace spotflow {

struct RefineParams {
  size_t max_dims = kDefaultMaxDims;  // spot dims + the on-demand dim
  double p_min = 0.001;               // lowest bid searched, USD/h
  double bid_tolerance = 0.001;       // bisection stops below this width
  double dominance_epsilon = 0.01;

  void Validate() const;
};

// A spot attempt: the task runs for a draw of `time` unless the first
// out-of-bid event comes earlier. lag is added to the elapsed time of the
// attempt (zero when acquisition lag is not modeled).
struct SpotStage {
  const EmpiricalDistribution* time = nullptr;
  const FirstFailureDistribution* failure = nullptr;
  double bid = 0.0;
  double lag = 0.0;
};

struct OnDemandStage {
  const EmpiricalDistribution* time = nullptr;
  double price = 0.0;
  double lag = 0.0;
};

// Elapsed time of a task that falls through the spot stages in order and
// finishes on the on-demand stage. A failure at the same instant as the
// task would finish does not count; an interrupted attempt costs its
// elapsed time up to the failure (no checkpoints).
EmpiricalDistribution HybridTimeDistribution(std::span<const SpotStage> spots,
                                             const OnDemandStage& od,
                                             uint64_t seed);

struct HybridCostBreakdown {
  double total = 0.0;
  std::vector<double> spot_usage;  // expected bid * time per spot stage
  double ondemand_usage = 0.0;     // expected rerun cost on the last dim
};

// Expected cost of a hybrid execution: full successful or interrupted spot
// time charged at the bid, the on-demand rerun weighted by the probability
// that every spot stage failed before finishing. Times are in seconds,
// prices per hour.
HybridCostBreakdown HybridCost(std::span<const SpotStage> spots,
                               const OnDemandStage& od, uint64_t seed);

struct GateResult {
  double hybrid_cost = 0.0;
  double ondemand_cost = 0.0;
  double dominance_gap = 0.0;  // max over t of F_od(t) - F_hybrid(t)
  bool cost_ok = false;
  bool dominance_ok = false;
  bool passed() const { return cost_ok && dominance_ok; }
};

// Per-task refinement of on-demand plans with spot dims. Pure given its
// inputs; every call with the same arguments sees the same random draws.
class HybridRefiner {
 public:
  // failure[type] is null for types without a price trace.
  HybridRefiner(const TaskTimeTable& table,
                std::vector<const FailureModel*> failure, RefineParams params,
                uint64_t seed);

  const RefineParams& params() const { return params_; }

  EmpiricalDistribution TimeDistribution(TaskId task,
                                         const HybridConfig& config) const;
  HybridCostBreakdown Cost(TaskId task, const HybridConfig& config) const;

  // Both acceptance gates against the on-demand-only configuration.
  GateResult Evaluate(TaskId task, const HybridConfig& config) const;

  // Bisection over [lo, hi] for a bid at which config = prefix +
  // (spot_type, bid) + on-demand passes both gates.
  std::optional<double> BinarySearchBid(TaskId task,
                                        std::span<const HybridDim> prefix,
                                        TypeId spot_type, TypeId od_type,
                                        double lo, double hi) const;

  HybridConfig RefineTask(TaskId task, TypeId od_type) const;

 private:
  struct Stages;
  Stages BuildStages(TaskId task, const HybridConfig& config) const;
  uint64_t TaskSeed(TaskId task) const;

  const TaskTimeTable* table_;
  std::vector<const FailureModel*> failure_;
  RefineParams params_;
  uint64_t seed_;
};

}  // namespace spotflow
