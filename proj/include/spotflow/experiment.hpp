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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spotflow/cloud_model.hpp"
#include "spotflow/planner.hpp"
#include "spotflow/simulator.hpp"
#include "spotflow/spot_market.hpp"
#include "spotflow/workflow_dag.hpp"

namespace spotflow {

struct WorkflowSource {
  std::string path;
  int weight = 1;  // arrivals cycle through classes in proportion
};

// Everything one plan/simulate run needs. Mirrors the command-line flags;
// flags applied after loading a spec file take precedence.
struct ExperimentSpec {
  std::string catalog;    // empty: built-in m1 catalog
  std::string trace_dir;  // empty: no spot market
  std::vector<WorkflowSource> workflows;
  std::optional<double> guarantee;
  double deadline_factor = 0.5;
  std::optional<double> deadline;
  double lambda = 0.1;
  int jobs = 100;
  uint64_t seed = 1;
  PlannerKind planner = PlannerKind::kDyna;
  std::string out = "out";
  size_t samples = kDefaultSampleCount;
  int max_iter = 10000;
  bool account_for_lag = false;
  IdleRelease idle_release = IdleRelease::kHourBoundary;

  static ExperimentSpec FromJson(std::string_view json,
                                 const std::string& source = "spec");
  static ExperimentSpec Load(const std::string& path);
  std::string ToJson() const;

  // Sets one field by its flag name, e.g. ("guarantee", "0.9"). "workflow"
  // appends one path; "workflows" replaces the list with "path[:weight],...".
  void Set(std::string_view key, std::string_view value);

  PlannerOptions Planner() const;
  SimConfig Simulation() const;
  // Throws kIo for missing files and kInvalidArgument for bad values.
  void Validate() const;
};

struct ExperimentInputs {
  Catalog catalog;
  SpotPriceTrace trace;
  std::vector<WorkflowJob> workflows;
};

ExperimentInputs LoadInputs(const ExperimentSpec& spec);

PlanCache PlanAll(const ExperimentSpec& spec, const ExperimentInputs& inputs);

// Arrival order of classes: each workflow repeated by its weight.
std::vector<JobClass> BindClasses(const ExperimentSpec& spec,
                                  const ExperimentInputs& inputs,
                                  const PlanCache& plans);

// One CSV row per task of every plan.
std::string PlanSummaryCsv(const PlanCache& plans, const Catalog& catalog);

}  // namespace spotflow
