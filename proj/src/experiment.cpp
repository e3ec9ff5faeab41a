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


#include "spotflow/experiment.hpp"

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "spotflow/error.hpp"
#include "text_util.hpp"

namespace spotflow {

using nlohmann::json;

namespace {

double ParseNumber(std::string_view key, std::string_view value) {
  if (auto v = text::ParseDouble(value)) return *v;
  throw InvalidArgument(std::string(key) + ": not a number: " + std::string(value));
}

PlannerKind ParsePlanner(std::string_view value) {
  if (auto k = ParsePlannerKind(value)) return *k;
  throw InvalidArgument("planner must be dyna, dyna-ns or spot-only, got " +
                        std::string(value));
}

IdleRelease ParseIdle(std::string_view value) {
  if (value == "hour-boundary") return IdleRelease::kHourBoundary;
  if (value == "immediate") return IdleRelease::kImmediate;
  throw InvalidArgument("idle_release must be hour-boundary or immediate");
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidArgument(std::string(key) + ": expected true or false");
}

void RequireFile(const std::string& what, const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, what + " not found: " + path);
  }
}

}  // namespace

void ExperimentSpec::Set(std::string_view key, std::string_view value) {
  if (key == "catalog") {
    catalog = std::string(value);
  } else if (key == "trace-dir" || key == "trace_dir") {
    trace_dir = std::string(value);
  } else if (key == "workflow") {
    workflows.push_back({std::string(value), 1});
  } else if (key == "workflows") {
    // Comma-separated "path[:weight]" list replacing the current one.
    workflows.clear();
    for (std::string_view item : text::Split(value, ',')) {
      item = text::Trim(item);
      if (item.empty()) continue;
      WorkflowSource src{std::string(item), 1};
      const size_t colon = item.rfind(':');
      if (colon != std::string_view::npos) {
        auto w = text::ParseInt(item.substr(colon + 1));
        if (!w || *w < 1) throw InvalidArgument("workflow weight must be >= 1: " + std::string(item));
        src = {std::string(item.substr(0, colon)), static_cast<int>(*w)};
      }
      workflows.push_back(std::move(src));
    }
  } else if (key == "guarantee") {
    guarantee = ParseNumber(key, value);
  } else if (key == "deadline-factor" || key == "deadline_factor") {
    deadline_factor = ParseNumber(key, value);
  } else if (key == "deadline") {
    deadline = ParseNumber(key, value);
  } else if (key == "lambda") {
    lambda = ParseNumber(key, value);
  } else if (key == "jobs") {
    auto v = text::ParseInt(value);
    if (!v) throw InvalidArgument("jobs: not an integer");
    jobs = static_cast<int>(*v);
  } else if (key == "seed") {
    auto v = text::ParseInt(value);
    if (!v || *v < 0) throw InvalidArgument("seed: not a non-negative integer");
    seed = static_cast<uint64_t>(*v);
  } else if (key == "planner") {
    planner = ParsePlanner(value);
  } else if (key == "out") {
    out = std::string(value);
  } else if (key == "samples") {
    auto v = text::ParseInt(value);
    if (!v || *v < 2) throw InvalidArgument("samples must be >= 2");
    samples = static_cast<size_t>(*v);
  } else if (key == "max-iter" || key == "max_iter") {
    auto v = text::ParseInt(value);
    if (!v || *v < 1) throw InvalidArgument("max_iter must be >= 1");
    max_iter = static_cast<int>(*v);
  } else if (key == "account-for-lag" || key == "account_for_lag") {
    account_for_lag = ParseBool(key, value);
  } else if (key == "idle-release" || key == "idle_release") {
    idle_release = ParseIdle(value);
  } else {
    throw InvalidArgument("unknown setting: " + std::string(key));
  }
}

ExperimentSpec ExperimentSpec::FromJson(std::string_view text, const std::string& source) {
  ExperimentSpec spec;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kParse, source + ": expected an object");
    for (const auto& [key, v] : j.items()) {
      if (key == "workflows") {
        for (const json& w : v) {
          if (w.is_string()) {
            spec.workflows.push_back({w.get<std::string>(), 1});
          } else {
            spec.workflows.push_back({w.at("path").get<std::string>(), w.value("weight", 1)});
          }
        }
      } else if (v.is_string()) {
        spec.Set(key, v.get<std::string>());
      } else if (v.is_boolean()) {
        spec.Set(key, v.get<bool>() ? "true" : "false");
      } else if (v.is_number_integer()) {
        spec.Set(key, std::to_string(v.get<int64_t>()));
      } else if (v.is_number()) {
        spec.Set(key, text::Num(v.get<double>()));
      } else if (!v.is_null()) {
        throw Error(ErrorCode::kParse, source + ": unsupported value for " + key);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
  return spec;
}

ExperimentSpec ExperimentSpec::Load(const std::string& path) {
  ExperimentSpec spec = FromJson(text::ReadFile(path), path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto rebase = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  rebase(spec.catalog);
  rebase(spec.trace_dir);
  for (auto& w : spec.workflows) rebase(w.path);
  return spec;
}

std::string ExperimentSpec::ToJson() const {
  nlohmann::ordered_json j;
  j["catalog"] = catalog;
  j["trace_dir"] = trace_dir;
  j["workflows"] = nlohmann::ordered_json::array();
  for (const auto& w : workflows) j["workflows"].push_back({{"path", w.path}, {"weight", w.weight}});
  if (guarantee) j["guarantee"] = *guarantee;
  j["deadline_factor"] = deadline_factor;
  if (deadline) j["deadline"] = *deadline;
  j["lambda"] = lambda;
  j["jobs"] = jobs;
  j["seed"] = seed;
  j["planner"] = std::string(PlannerKindName(planner));
  j["out"] = out;
  j["samples"] = samples;
  j["max_iter"] = max_iter;
  j["account_for_lag"] = account_for_lag;
  j["idle_release"] = idle_release == IdleRelease::kHourBoundary ? "hour-boundary" : "immediate";
  return j.dump(2) + "\n";
}

PlannerOptions ExperimentSpec::Planner() const {
  PlannerOptions o;
  o.kind = planner;
  o.samples = samples;
  o.seed = seed;
  o.astar.max_iter = max_iter;
  o.account_for_lag = account_for_lag;
  o.deadline = deadline;
  o.deadline_factor = deadline_factor;
  o.guarantee = guarantee;
  o.ffp.seed = seed;
  return o;
}

SimConfig ExperimentSpec::Simulation() const {
  SimConfig c;
  c.lambda = lambda;
  c.job_count = jobs;
  c.seed = seed;
  c.idle_release = idle_release;
  return c;
}

void ExperimentSpec::Validate() const {
  if (!catalog.empty()) RequireFile("catalog", catalog);
  if (!trace_dir.empty() && !std::filesystem::is_directory(trace_dir)) {
    throw Error(ErrorCode::kIo, "trace directory not found: " + trace_dir);
  }
  if (workflows.empty()) throw InvalidArgument("no workflow given");
  for (const auto& w : workflows) {
    RequireFile("workflow", w.path);
    if (w.weight < 1) throw InvalidArgument("workflow weight must be >= 1");
  }
  if (guarantee && !(*guarantee > 0.0 && *guarantee <= 1.0)) {
    throw InvalidArgument("guarantee must lie in (0, 1]");
  }
  if (deadline && !(*deadline > 0.0)) throw InvalidArgument("deadline must be > 0");
  if (planner == PlannerKind::kSpotOnly && trace_dir.empty()) {
    throw InvalidArgument("spot-only planning needs --trace-dir");
  }
  Simulation().Validate();
}

ExperimentInputs LoadInputs(const ExperimentSpec& spec) {
  spec.Validate();
  ExperimentInputs in;
  in.catalog = spec.catalog.empty() ? Catalog::DefaultM1() : LoadCatalog(spec.catalog);
  if (!spec.trace_dir.empty()) in.trace = SpotPriceTrace::LoadDir(spec.trace_dir, in.catalog);
  for (const auto& w : spec.workflows) {
    WorkflowJob job = LoadWorkflow(w.path);
    for (const auto& other : in.workflows) {
      if (other.class_id == job.class_id && other.size() != job.size()) {
        throw InvalidArgument("two different workflows share class id " + job.class_id);
      }
    }
    in.workflows.push_back(std::move(job));
  }
  return in;
}

PlanCache PlanAll(const ExperimentSpec& spec, const ExperimentInputs& inputs) {
  PlanCache cache;
  const PlannerOptions options = spec.Planner();
  for (const WorkflowJob& job : inputs.workflows) {
    if (cache.Find(job.class_id) != nullptr) continue;
    cache.Put(PlanWorkflow(job, inputs.catalog, inputs.trace, options));
  }
  return cache;
}

std::vector<JobClass> BindClasses(const ExperimentSpec& spec, const ExperimentInputs& inputs,
                                  const PlanCache& plans) {
  std::vector<JobClass> classes;
  for (size_t i = 0; i < inputs.workflows.size(); ++i) {
    const WorkflowJob& job = inputs.workflows[i];
    const WorkflowPlan* plan = plans.Find(job.class_id);
    if (plan == nullptr) {
      throw Error(ErrorCode::kMismatch, "plan cache has no plan for class '" + job.class_id + "'");
    }
    JobClass cls;
    cls.job = job;
    cls.job.deadline = plan->deadline;
    cls.job.guarantee_p = plan->guarantee_p;
    cls.plan = *plan;
    const int weight = i < spec.workflows.size() ? spec.workflows[i].weight : 1;
    for (int k = 0; k < weight; ++k) classes.push_back(cls);
  }
  return classes;
}

std::string PlanSummaryCsv(const PlanCache& plans, const Catalog& catalog) {
  std::ostringstream os;
  os << "class,task_id,task,dims\n";
  for (const auto& [id, plan] : plans.plans()) {
    for (size_t i = 0; i < plan.configs.size(); ++i) {
      os << id << ',' << i << ',' << plan.task_names[i] << ',';
      bool first = true;
      for (const HybridDim& d : plan.configs[i].dims()) {
        if (!first) os << ' ';
        first = false;
        os << catalog.at(d.type).name << (d.is_spot ? "@spot:" : "@ondemand:") << d.price;
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace spotflow
