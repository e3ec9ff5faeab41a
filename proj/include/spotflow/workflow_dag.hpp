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
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spotflow/cloud_model.hpp"
#include "spotflow/distributions.hpp"

namespace spotflow {

using TaskId = int;

struct Task {
  TaskId id = 0;
  std::string name;
  TaskProfile profile;
  std::vector<TaskId> predecessors;
  std::vector<TaskId> successors;
};

// One candidate instance of a hybrid configuration. price is the bid for
// spot dims and the on-demand price otherwise.
struct HybridDim {
  TypeId type = 0;
  double price = 0.0;
  bool is_spot = false;

  bool operator==(const HybridDim&) const = default;
};

inline constexpr size_t kDefaultMaxDims = 2;

// Zero or more spot dims followed by exactly one on-demand dim; execution
// falls through the dims in order on out-of-bid failures.
class HybridConfig {
 public:
  HybridConfig() = default;
  explicit HybridConfig(std::vector<HybridDim> dims);

  static HybridConfig OnDemand(TypeId type, double price);

  std::span<const HybridDim> dims() const { return dims_; }
  size_t size() const { return dims_.size(); }
  const HybridDim& ondemand() const { return dims_.back(); }
  bool has_spot() const { return dims_.size() > 1; }

  // Throws InvalidArgument unless the dims are well formed and at most
  // max_dims long.
  void Validate(size_t max_dims = kDefaultMaxDims) const;

  bool operator==(const HybridConfig&) const = default;

 private:
  std::vector<HybridDim> dims_;
};

// A workflow instance: DAG of tasks plus its probabilistic deadline. After
// AssignIds, task ids equal their positions and respect topological order.
struct WorkflowJob {
  std::string class_id;
  std::vector<Task> tasks;
  double deadline = 0.0;      // seconds, 0 = not yet set
  double guarantee_p = 0.96;  // in (0, 1]

  size_t size() const { return tasks.size(); }

  TaskId AddTask(std::string name, const TaskProfile& profile);
  void AddEdge(TaskId from, TaskId to);

  // Every id equals its index, edges are consistent and go forward. Throws
  // InvalidArgument otherwise.
  void ValidateTopological() const;
};

// Renumbers tasks in topological order, ties broken by input position.
// Throws InvalidArgument naming an edge on a cycle.
WorkflowJob AssignIds(const WorkflowJob& job);

// Builds the whole-workflow execution time from per-task distributions.
// Series-parallel DAGs are reduced with convolutions (chains) and MAX
// (fan-ins); other DAGs fall back to a per-sample longest-path Monte Carlo.
// The reduction program and all pairing permutations are fixed at
// construction, so Compose is cheap enough to call once per search state.
class WorkflowComposer {
 public:
  WorkflowComposer(const WorkflowJob& job, size_t samples, uint64_t seed,
                   bool force_monte_carlo = false);
  ~WorkflowComposer();
  WorkflowComposer(WorkflowComposer&&) noexcept;
  WorkflowComposer& operator=(WorkflowComposer&&) noexcept;

  bool series_parallel() const;
  size_t samples() const;

  // per_task[i] is the time distribution of task id i.
  EmpiricalDistribution Compose(
      std::span<const EmpiricalDistribution* const> per_task) const;
  std::vector<double> ComposeSamples(
      std::span<const EmpiricalDistribution* const> per_task) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

EmpiricalDistribution WorkflowTimeDistribution(
    const WorkflowJob& job, std::span<const EmpiricalDistribution> per_task,
    uint64_t seed);

// percentile(dist, guarantee_p) <= deadline.
bool IsFeasible(const WorkflowJob& job, const EmpiricalDistribution& dist);

// Longest path over fixed per-task weights.
double CriticalPathLength(const WorkflowJob& job, std::span<const double> weights);

struct DeadlineBounds {
  double d_min = 0.0;  // all tasks on the most expensive type
  double d_max = 0.0;  // all tasks on the cheapest type
  double Deadline(double factor) const { return d_min + factor * (d_max - d_min); }
};

// Seed for the time distribution of (task, type) during planning. Shared by
// every component that must see the same per-task samples.
uint64_t TaskTypeSeed(uint64_t seed, TaskId task, TypeId type);

DeadlineBounds ComputeDeadlineBounds(const WorkflowJob& job,
                                     const Catalog& catalog,
                                     size_t samples = kDefaultSampleCount,
                                     uint64_t seed = 1);

// Line-oriented workflow file:
//   workflow <class_id>
//   deadline <seconds>         (optional)
//   guarantee <p>              (optional)
//   task <name> <instr> <seq_io_mb> <rnd_io_mb> <net_in_mb> <net_out_mb>
//   edge <from_name> <to_name>
// The result has topological ids.
WorkflowJob ParseWorkflow(std::string_view content,
                          const std::string& source = "workflow");
WorkflowJob LoadWorkflow(const std::string& path);
std::string FormatWorkflow(const WorkflowJob& job);

// Synthetic workflows with the shapes of three scientific applications.
// Profiles are deterministic functions of (size, seed).
WorkflowJob MakeMontage(int projections, uint64_t seed = 1);
WorkflowJob MakeLigo(int groups, int width, uint64_t seed = 1);
WorkflowJob MakeEpigenomics(int lanes, uint64_t seed = 1);

}  // namespace spotflow
