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
#include <span>
#include <string>
#include <vector>

#include "spotflow/cloud_model.hpp"
#include "spotflow/planner.hpp"
#include "spotflow/spot_market.hpp"
#include "spotflow/workflow_dag.hpp"

namespace spotflow {

enum class IdleRelease {
  kHourBoundary,  // keep idle instances until the end of their paid hour
  kImmediate,
};

struct SimConfig {
  double lambda = 0.1;  // job arrivals per minute
  int job_count = 100;
  uint64_t seed = 1;
  IdleRelease idle_release = IdleRelease::kHourBoundary;
  bool record_events = false;
  // Trace replay offset in seconds; drawn from the seed when unset.
  std::optional<int64_t> trace_offset;

  void Validate() const;
};

// A workflow class the simulator can instantiate: deadline and guarantee
// already resolved, plus its cached plan.
struct JobClass {
  WorkflowJob job;
  WorkflowPlan plan;
};

// Spot price replayed cyclically from a trace, with time 0 mapped to
// `offset` seconds after the series start.
class CyclicPrice {
 public:
  CyclicPrice(const PriceSeries* series, int64_t offset);

  double At(int64_t t) const;
  // Earliest time >= t with price strictly above bid, if any.
  std::optional<int64_t> NextAbove(int64_t t, double bid) const;

 private:
  int64_t Local(int64_t t) const;

  const PriceSeries* series_;
  int64_t offset_;
  int64_t period_;
};

enum class Termination { kUser, kOutOfBid };

struct InstanceRecord {
  int id = 0;
  TypeId type = 0;
  bool spot = false;
  double bid = 0.0;  // spot bid, on-demand price otherwise
  int64_t requested = 0;
  int64_t start = 0;  // ready and billed from here
  int64_t end = 0;
  Termination termination = Termination::kUser;
  int tasks_run = 0;
  double hours = 0.0;  // billed hours
  double bill = 0.0;
};

// Hourly billing. User-terminated instances pay every started hour (at
// least one); out-of-bid spot instances pay only completed hours. Spot
// hours are charged at the market price at each hour's start.
double BillInstance(InstanceRecord& instance, const InstanceType& type,
                    const CyclicPrice* price);

enum class EventKind {
  kTaskFinish,
  kOutOfBid,
  kInstanceReady,
  kTaskStart,
  kJobArrival,
  kSpotPriceChange,
  kInstanceRelease,
};

const char* EventKindName(EventKind kind);

struct TaskRecord {
  int job = 0;
  TaskId task = 0;
  int attempt = 0;  // hybrid dim index
  int instance = 0;
  int64_t start = 0;
  int64_t end = 0;
  bool completed = false;  // false when cut short by an out-of-bid event
};

struct JobResult {
  int id = 0;
  std::string class_id;
  int64_t arrival = 0;
  int64_t finish = 0;
  double deadline = 0.0;
  int restarts = 0;
  double makespan() const { return static_cast<double>(finish - arrival); }
  bool hit() const { return makespan() <= deadline; }
};

struct SimReport {
  size_t jobs = 0;
  double total_cost = 0.0;
  double avg_cost = 0.0;
  double avg_time = 0.0;
  double hit_rate = 0.0;
  int out_of_bid = 0;
  int reused = 0;
  int consolidated = 0;
  // "<type>/<spot|ondemand>" -> billed hours.
  std::map<std::string, double> instance_hours;
  std::vector<JobResult> job_results;
  std::vector<InstanceRecord> instances;
  std::vector<TaskRecord> tasks;
  std::vector<std::string> events;
};

// Throws Error(kMismatch) if a class has no plan or its plan does not
// match the workflow.
SimReport Simulate(const SimConfig& config, std::span<const JobClass> classes,
                   const Catalog& catalog, const SpotPriceTrace& trace);

std::string ReportJson(const SimReport& report, const SimConfig& config);
std::string JobTableCsv(const SimReport& report);
std::string EventLog(const SimReport& report);

}  // namespace spotflow
