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


#include "spotflow/planner_astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "spotflow/error.hpp"

namespace spotflow {

TaskTimeTable::TaskTimeTable(const WorkflowJob& job, const Catalog& catalog,
                             size_t samples, uint64_t seed,
                             bool include_ondemand_lag)
    : catalog_(&catalog),
      task_count_(job.size()),
      type_count_(catalog.size()),
      samples_(samples),
      seed_(seed),
      include_lag_(include_ondemand_lag) {
  if (catalog.empty()) throw InvalidArgument("catalog is empty");
  if (job.size() == 0) throw InvalidArgument("workflow has no tasks");
  exec_.reserve(task_count_ * type_count_);
  planning_.reserve(task_count_ * type_count_);
  cost_.reserve(task_count_ * type_count_);
  for (const Task& task : job.tasks) {
    for (const InstanceType& type : catalog.types()) {
      EmpiricalDistribution d = TaskTimeDistribution(
          task.profile, type, samples, TaskTypeSeed(seed, task.id, type.id));
      cost_.push_back(type.ondemand_price * d.Mean() / 3600.0);
      planning_.push_back(include_lag_ ? d.Shifted(type.lag_ondemand) : d);
      exec_.push_back(std::move(d));
    }
  }
}

const EmpiricalDistribution& TaskTimeTable::Execution(TaskId task,
                                                      TypeId type) const {
  return exec_.at(static_cast<size_t>(task) * type_count_ +
                  static_cast<size_t>(type));
}

const EmpiricalDistribution& TaskTimeTable::Planning(TaskId task,
                                                     TypeId type) const {
  return planning_.at(static_cast<size_t>(task) * type_count_ +
                      static_cast<size_t>(type));
}

double TaskTimeTable::Cost(TaskId task, TypeId type) const {
  return cost_.at(static_cast<size_t>(task) * type_count_ +
                  static_cast<size_t>(type));
}

double PlanCost(const TaskTimeTable& table, std::span<const TypeId> plan) {
  double c = 0.0;
  for (size_t i = 0; i < plan.size(); ++i) {
    c += table.Cost(static_cast<TaskId>(i), plan[i]);
  }
  return c;
}

std::vector<double> PlanTimeSamples(const TaskTimeTable& table,
                                    const WorkflowComposer& composer,
                                    std::span<const TypeId> plan) {
  std::vector<const EmpiricalDistribution*> per_task(plan.size());
  for (size_t i = 0; i < plan.size(); ++i) {
    per_task[i] = &table.Planning(static_cast<TaskId>(i), plan[i]);
  }
  return composer.ComposeSamples(per_task);
}

namespace {

constexpr uint32_t kNoParent = std::numeric_limits<uint32_t>::max();

// Search states are stored as one mutation relative to their parent; the
// full plan is rebuilt on demand. Level of a state = dim + 1 (root: 0).
struct Node {
  double h;  // expected cost of the plan
  uint32_t parent;
  uint32_t dim;
  TypeId type;
};

class Arena {
 public:
  explicit Arena(size_t dims) : dims_(dims) {}

  uint32_t Add(const Node& n) {
    nodes_.push_back(n);
    return static_cast<uint32_t>(nodes_.size() - 1);
  }
  const Node& at(uint32_t i) const { return nodes_[i]; }
  size_t size() const { return nodes_.size(); }

  void Plan(uint32_t i, std::vector<TypeId>& out) const {
    out.assign(dims_, 0);
    // Walking up visits deeper dims first; ancestors only touch lower dims,
    // so every dim is set at most once.
    while (nodes_[i].parent != kNoParent) {
      out[nodes_[i].dim] = nodes_[i].type;
      i = nodes_[i].parent;
    }
  }

  size_t Level(uint32_t i) const {
    return nodes_[i].parent == kNoParent ? 0 : nodes_[i].dim + 1;
  }

 private:
  size_t dims_;
  std::vector<Node> nodes_;
};

}  // namespace

std::vector<TypeId> GreedyFeasiblePlan(const WorkflowJob& job,
                                       const TaskTimeTable& table,
                                       const WorkflowComposer& composer,
                                       size_t* evaluations) {
  const size_t dims = job.size();
  const auto types = static_cast<TypeId>(table.type_count());
  std::vector<std::vector<double>> w(dims);
  for (size_t d = 0; d < dims; ++d) {
    for (TypeId t = 0; t < types; ++t) {
      w[d].push_back(table.Planning(static_cast<TaskId>(d), t).Percentile(job.guarantee_p));
    }
  }
  std::vector<TypeId> plan(dims, 0);
  std::vector<double> finish(dims);
  std::vector<int> via(dims);
  const size_t max_rounds = dims * static_cast<size_t>(types) + 1;
  for (size_t round = 0; round < max_rounds; ++round) {
    std::vector<double> s = PlanTimeSamples(table, composer, plan);
    if (evaluations != nullptr) ++*evaluations;
    if (PercentileInPlace(s, job.guarantee_p) <= job.deadline) return plan;

    size_t last = 0;
    for (size_t d = 0; d < dims; ++d) {
      double ready = 0.0;
      via[d] = -1;
      for (TaskId p : job.tasks[d].predecessors) {
        if (finish[static_cast<size_t>(p)] > ready) {
          ready = finish[static_cast<size_t>(p)];
          via[d] = p;
        }
      }
      finish[d] = ready + w[d][static_cast<size_t>(plan[d])];
      if (finish[d] > finish[last]) last = d;
    }
    double best_score = 0.0;
    size_t best_dim = dims;
    TypeId best_type = 0;
    for (int d = static_cast<int>(last); d >= 0; d = via[static_cast<size_t>(d)]) {
      const auto ud = static_cast<size_t>(d);
      const double w0 = w[ud][static_cast<size_t>(plan[ud])];
      const double c0 = table.Cost(d, plan[ud]);
      for (TypeId t = plan[ud] + 1; t < types; ++t) {
        const double saved = w0 - w[ud][static_cast<size_t>(t)];
        if (saved <= 0.0) continue;
        const double score = saved / std::max(table.Cost(d, t) - c0, 1e-12);
        if (score > best_score) {
          best_score = score;
          best_dim = ud;
          best_type = t;
        }
      }
    }
    if (best_dim == dims) break;
    plan[best_dim] = best_type;
  }
  return {};
}

AStarResult AStarConfigure(const WorkflowJob& job, const TaskTimeTable& table,
                           const WorkflowComposer& composer,
                           const AStarParams& params) {
  if (params.max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (job.size() != table.task_count()) {
    throw InvalidArgument("task table does not match workflow");
  }
  if (!(job.deadline > 0.0)) throw InvalidArgument("workflow deadline not set");
  const size_t dims = job.size();
  const auto types = static_cast<TypeId>(table.type_count());

  Arena arena(dims);
  std::vector<TypeId> initial(dims, 0);
  const double h0 = PlanCost(table, initial);
  arena.Add(Node{h0, kNoParent, 0, 0});

  struct Entry {
    double f;
    double g;
    uint32_t node;
  };
  std::vector<TypeId> plan_a, plan_b;
  auto worse = [&](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    arena.Plan(a.node, plan_a);
    arena.Plan(b.node, plan_b);
    return plan_b < plan_a;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  open.push(Entry{h0, 0.0, 0});

  // Costs are not monotone in the type order (a faster type can be cheaper
  // overall), so a descendant may undercut its ancestor. Every descendant
  // of a state at level l keeps dims < l and moves each dim >= l at most
  // once, which bounds its cost from below by h + reach[l].
  std::vector<double> reach(dims + 1, 0.0);
  for (size_t d = dims; d-- > 0;) {
    double gain = 0.0;
    const double c0 = table.Cost(static_cast<TaskId>(d), 0);
    for (TypeId t = 1; t < types; ++t) {
      gain = std::min(gain, table.Cost(static_cast<TaskId>(d), t) - c0);
    }
    reach[d] = reach[d + 1] + gain;
  }
  double upper_bound = std::numeric_limits<double>::infinity();
  auto prunable = [&](double h, size_t level) {
    const double lb = h + reach[level];
    return lb >= upper_bound + 1e-12 * std::abs(upper_bound);
  };

  AStarResult best;
  size_t evaluated = 0;
  if (params.greedy_incumbent) {
    std::vector<TypeId> seed_plan = GreedyFeasiblePlan(job, table, composer, &evaluated);
    if (!seed_plan.empty()) {
      std::vector<double> s = PlanTimeSamples(table, composer, seed_plan);
      best.percentile = PercentileInPlace(s, job.guarantee_p);
      best.expected_cost = PlanCost(table, seed_plan);
      best.plan = std::move(seed_plan);
      best.from_incumbent = true;
      upper_bound = best.expected_cost;
    }
  }
  std::vector<TypeId> closest_miss;
  double closest_percentile = std::numeric_limits<double>::infinity();
  std::vector<TypeId> plan;
  std::vector<double> buffer;
  int iterations = 0;

  while (!open.empty() && iterations < params.max_iter) {
    const Entry cur = open.top();
    open.pop();
    ++iterations;
    const Node node = arena.at(cur.node);
    const size_t level = arena.Level(cur.node);
    if (prunable(node.h, level)) continue;
    arena.Plan(cur.node, plan);

    const double cost = PlanCost(table, plan);
    if (cost < upper_bound) {
      buffer = PlanTimeSamples(table, composer, plan);
      ++evaluated;
      const double pct = PercentileInPlace(buffer, job.guarantee_p);
      if (pct <= job.deadline) {
        upper_bound = cost;
        best.from_incumbent = false;
        best.plan = plan;
        best.expected_cost = cost;
        best.percentile = pct;
      } else if (pct < closest_percentile) {
        closest_percentile = pct;
        closest_miss = plan;
      }
    }

    // Children replace one dim at or beyond this state's level with a more
    // expensive type, so each plan has exactly one parent and no state
    // can reappear in the open or closed set.
    for (size_t d = level; d < dims; ++d) {
      const TypeId from = plan[d];
      const double base = node.h - table.Cost(static_cast<TaskId>(d), from);
      for (TypeId t = from + 1; t < types; ++t) {
        const double h = base + table.Cost(static_cast<TaskId>(d), t);
        if (prunable(h, d + 1)) continue;
        const double g = h - h0;
        const uint32_t id =
            arena.Add(Node{h, cur.node, static_cast<uint32_t>(d), t});
        open.push(Entry{g + h, g, id});
      }
    }
  }

  best.iterations = iterations;
  best.generated = arena.size();
  best.evaluated = evaluated;
  if (best.plan.empty()) {
    std::ostringstream msg;
    msg << "no feasible plan for workflow '" << job.class_id << "' within "
        << iterations << " iterations; deadline " << job.deadline
        << " s at p=" << job.guarantee_p;
    if (!closest_miss.empty()) {
      msg << ", closest plan reaches " << closest_percentile << " s";
    }
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
  return best;
}

}  // namespace spotflow
