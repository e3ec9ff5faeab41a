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


#include <json.hpp>

#include "spotflow/error.hpp"
#include "spotflow/planner.hpp"
#include "text_util.hpp"

namespace spotflow {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json PlanToJson(const WorkflowPlan& plan, const Catalog& catalog) {
  json tasks = json::array();
  for (size_t i = 0; i < plan.configs.size(); ++i) {
    json dims = json::array();
    for (const HybridDim& d : plan.configs[i].dims()) {
      dims.push_back({{"type", catalog.at(d.type).name},
                      {"kind", d.is_spot ? "spot" : "ondemand"},
                      {"price", d.price}});
    }
    tasks.push_back({{"id", i}, {"name", plan.task_names.at(i)}, {"dims", dims}});
  }
  return {{"planner", plan.planner},
          {"deadline", plan.deadline},
          {"guarantee", plan.guarantee_p},
          {"ondemand_cost", plan.ondemand_cost},
          {"expected_cost", plan.expected_cost},
          {"percentile", plan.percentile},
          {"iterations", plan.iterations},
          {"refined_tasks", plan.refined_tasks},
          {"tasks", tasks}};
}

WorkflowPlan PlanFromJson(const std::string& class_id, const json& j,
                          const Catalog& catalog) {
  WorkflowPlan plan;
  plan.class_id = class_id;
  plan.planner = j.at("planner").get<std::string>();
  plan.deadline = j.at("deadline").get<double>();
  plan.guarantee_p = j.at("guarantee").get<double>();
  plan.ondemand_cost = j.value("ondemand_cost", 0.0);
  plan.expected_cost = j.value("expected_cost", 0.0);
  plan.percentile = j.value("percentile", 0.0);
  plan.iterations = j.value("iterations", 0);
  plan.refined_tasks = j.value("refined_tasks", size_t{0});
  for (const json& t : j.at("tasks")) {
    if (t.at("id").get<size_t>() != plan.configs.size()) {
      throw Error(ErrorCode::kParse, "plan '" + class_id + "': task ids out of order");
    }
    std::vector<HybridDim> dims;
    for (const json& d : t.at("dims")) {
      const std::string name = d.at("type").get<std::string>();
      const std::optional<TypeId> type = catalog.Find(name);
      if (!type) {
        throw Error(ErrorCode::kMismatch,
                    "plan '" + class_id + "' uses type " + name + " not in the catalog");
      }
      const std::string kind = d.at("kind").get<std::string>();
      if (kind != "spot" && kind != "ondemand") {
        throw Error(ErrorCode::kParse, "plan '" + class_id + "': bad dim kind " + kind);
      }
      dims.push_back(HybridDim{*type, d.at("price").get<double>(), kind == "spot"});
    }
    plan.task_names.push_back(t.at("name").get<std::string>());
    plan.configs.emplace_back(std::move(dims));
  }
  return plan;
}

}  // namespace

void PlanCache::Put(WorkflowPlan plan) {
  const std::string key = plan.class_id;
  plans_[key] = std::move(plan);
}

const WorkflowPlan* PlanCache::Find(const std::string& class_id) const {
  auto it = plans_.find(class_id);
  return it == plans_.end() ? nullptr : &it->second;
}

std::string PlanCache::ToJson(const Catalog& catalog) const {
  json plans = json::object();
  for (const auto& [id, plan] : plans_) plans[id] = PlanToJson(plan, catalog);
  json root = {{"version", kFormatVersion}, {"plans", plans}};
  return root.dump(2) + "\n";
}

PlanCache PlanCache::FromJson(std::string_view text, const Catalog& catalog,
                              const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
  PlanCache cache;
  try {
    if (root.at("version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::kParse, source + ": unsupported version");
    }
    for (const auto& [id, j] : root.at("plans").items()) {
      cache.Put(PlanFromJson(id, j, catalog));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
  return cache;
}

void PlanCache::Save(const std::string& path, const Catalog& catalog) const {
  text::WriteFile(path, ToJson(catalog));
}

PlanCache PlanCache::Load(const std::string& path, const Catalog& catalog) {
  return FromJson(text::ReadFile(path), catalog, path);
}

}  // namespace spotflow
