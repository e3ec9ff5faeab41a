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

#include "spotflow/workflow_dag.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <string>

#include "spotflow/error.hpp"
#include "spotflow/random.hpp"

namespace spotflow {

HybridConfig::HybridConfig(std::vector<HybridDim> dims) : dims_(std::move(dims)) {
  Validate(std::max(dims_.size(), size_t{1}));
}

HybridConfig HybridConfig::OnDemand(TypeId type, double price) {
  return HybridConfig({HybridDim{type, price, false}});
}

void HybridConfig::Validate(size_t max_dims) const {
  if (dims_.empty()) throw InvalidArgument("hybrid config has no dims");
  if (dims_.size() > max_dims) {
    throw InvalidArgument("hybrid config has " + std::to_string(dims_.size()) +
                          " dims, limit " + std::to_string(max_dims));
  }
  for (size_t i = 0; i < dims_.size(); ++i) {
    const bool last = i + 1 == dims_.size();
    if (dims_[i].is_spot == last) {
      throw InvalidArgument("only the last hybrid dim may be on-demand");
    }
    if (!(dims_[i].price > 0.0)) throw InvalidArgument("dim price must be > 0");
    if (dims_[i].type < 0) throw InvalidArgument("dim type must be >= 0");
  }
}

TaskId WorkflowJob::AddTask(std::string name, const TaskProfile& profile) {
  ValidateProfile(profile);
  Task t;
  t.id = static_cast<TaskId>(tasks.size());
  t.name = std::move(name);
  t.profile = profile;
  tasks.push_back(std::move(t));
  return tasks.back().id;
}

void WorkflowJob::AddEdge(TaskId from, TaskId to) {
  const auto n = static_cast<TaskId>(tasks.size());
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw InvalidArgument("edge references unknown task");
  }
  if (from == to) throw InvalidArgument("self edge on task " + tasks[from].name);
  auto& succ = tasks[from].successors;
  if (std::find(succ.begin(), succ.end(), to) != succ.end()) return;
  succ.push_back(to);
  tasks[to].predecessors.push_back(from);
}

void WorkflowJob::ValidateTopological() const {
  if (tasks.empty()) throw InvalidArgument("workflow has no tasks");
  if (!(guarantee_p > 0.0 && guarantee_p <= 1.0)) {
    throw InvalidArgument("guarantee must lie in (0, 1]");
  }
  const auto n = static_cast<TaskId>(tasks.size());
  for (TaskId i = 0; i < n; ++i) {
    const Task& t = tasks[i];
    if (t.id != i) throw InvalidArgument("task ids must equal their position");
    for (TaskId p : t.predecessors) {
      if (p < 0 || p >= i) throw InvalidArgument("edge does not go forward in id order");
    }
    for (TaskId s : t.successors) {
      if (s <= i || s >= n) throw InvalidArgument("edge does not go forward in id order");
    }
  }
}

WorkflowJob AssignIds(const WorkflowJob& job) {
  const size_t n = job.tasks.size();
  std::vector<int> indegree(n, 0);
  for (const auto& t : job.tasks) {
    for (TaskId s : t.successors) {
      if (s < 0 || static_cast<size_t>(s) >= n) {
        throw InvalidArgument("edge references unknown task");
      }
      ++indegree[static_cast<size_t>(s)];
    }
  }
  std::priority_queue<size_t, std::vector<size_t>, std::greater<>> ready;
  for (size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<TaskId> new_id(n, -1);
  std::vector<size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const size_t u = ready.top();
    ready.pop();
    new_id[u] = static_cast<TaskId>(order.size());
    order.push_back(u);
    for (TaskId s : job.tasks[u].successors) {
      if (--indegree[static_cast<size_t>(s)] == 0) ready.push(static_cast<size_t>(s));
    }
  }
  if (order.size() != n) {
    // Every unplaced task still has an unplaced predecessor; walking
    // predecessors must revisit a task.
    size_t u = 0;
    while (new_id[u] != -1) ++u;
    std::vector<bool> seen(n, false);
    while (!seen[u]) {
      seen[u] = true;
      for (TaskId p : job.tasks[u].predecessors) {
        if (new_id[static_cast<size_t>(p)] == -1) {
          if (seen[static_cast<size_t>(p)]) {
            throw InvalidArgument("workflow has a cycle through edge " +
                                  job.tasks[static_cast<size_t>(p)].name + " -> " +
                                  job.tasks[u].name);
          }
          u = static_cast<size_t>(p);
          break;
        }
      }
    }
    throw InvalidArgument("workflow has a cycle at task " + job.tasks[u].name);
  }
  WorkflowJob out;
  out.class_id = job.class_id;
  out.deadline = job.deadline;
  out.guarantee_p = job.guarantee_p;
  out.tasks.resize(n);
  for (size_t pos = 0; pos < n; ++pos) {
    const Task& src = job.tasks[order[pos]];
    Task& dst = out.tasks[pos];
    dst.id = static_cast<TaskId>(pos);
    dst.name = src.name;
    dst.profile = src.profile;
    for (TaskId p : src.predecessors) dst.predecessors.push_back(new_id[static_cast<size_t>(p)]);
    for (TaskId s : src.successors) dst.successors.push_back(new_id[static_cast<size_t>(s)]);
    std::sort(dst.predecessors.begin(), dst.predecessors.end());
    std::sort(dst.successors.begin(), dst.successors.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Composition

namespace {

enum class ExprKind { kLeaf, kSum, kMax };

struct Expr {
  ExprKind kind = ExprKind::kLeaf;
  TaskId task = -1;            // kLeaf
  std::vector<int> children;   // expression ids
};

constexpr int kIdentity = -1;  // zero duration, identity for both + and MAX

struct Edge {
  int from = 0;
  int to = 0;
  int expr = kIdentity;
  bool alive = true;
};

class SeriesParallelReducer {
 public:
  explicit SeriesParallelReducer(const WorkflowJob& job) {
    const int n = static_cast<int>(job.tasks.size());
    nodes_ = 2 + 2 * n;
    in_.resize(static_cast<size_t>(nodes_));
    out_.resize(static_cast<size_t>(nodes_));
    for (const auto& t : job.tasks) {
      Expr leaf;
      leaf.task = t.id;
      exprs_.push_back(leaf);
      AddEdge(InNode(t.id), OutNode(t.id), static_cast<int>(exprs_.size()) - 1);
      if (t.predecessors.empty()) AddEdge(kSource, InNode(t.id), kIdentity);
      if (t.successors.empty()) AddEdge(OutNode(t.id), kSink, kIdentity);
      for (TaskId s : t.successors) AddEdge(OutNode(t.id), InNode(s), kIdentity);
    }
  }

  // Returns the root expression, or nullopt if the graph is not
  // series-parallel.
  std::optional<int> Reduce() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int x = 0; x < nodes_; ++x) {
        changed |= MergeParallel(x);
      }
      for (int x = 2; x < nodes_; ++x) {
        changed |= MergeSeries(x);
      }
    }
    const auto live = Alive(out_[kSource]);
    if (live.size() == 1 && edges_[static_cast<size_t>(live[0])].to == kSink &&
        Alive(in_[kSink]).size() == 1) {
      return edges_[static_cast<size_t>(live[0])].expr;
    }
    return std::nullopt;
  }

  std::vector<Expr> TakeExprs() { return std::move(exprs_); }

 private:
  static constexpr int kSource = 0;
  static constexpr int kSink = 1;
  static int InNode(TaskId t) { return 2 + 2 * t; }
  static int OutNode(TaskId t) { return 3 + 2 * t; }

  void AddEdge(int from, int to, int expr) {
    edges_.push_back({from, to, expr, true});
    const int id = static_cast<int>(edges_.size()) - 1;
    out_[static_cast<size_t>(from)].push_back(id);
    in_[static_cast<size_t>(to)].push_back(id);
  }

  std::vector<int> Alive(std::vector<int>& list) {
    std::erase_if(list, [&](int e) { return !edges_[static_cast<size_t>(e)].alive; });
    return list;
  }

  // Combines two expressions, flattening nested ops of the same kind.
  int Combine(ExprKind kind, int a, int b) {
    if (a == kIdentity) return b;
    if (b == kIdentity) return a;
    Expr e;
    e.kind = kind;
    for (int c : {a, b}) {
      const Expr& child = exprs_[static_cast<size_t>(c)];
      if (child.kind == kind) {
        e.children.insert(e.children.end(), child.children.begin(), child.children.end());
      } else {
        e.children.push_back(c);
      }
    }
    exprs_.push_back(std::move(e));
    return static_cast<int>(exprs_.size()) - 1;
  }

  bool MergeParallel(int x) {
    auto outs = Alive(out_[static_cast<size_t>(x)]);
    if (outs.size() < 2) return false;
    std::map<int, int> first_by_target;
    bool changed = false;
    for (int e : outs) {
      Edge& edge = edges_[static_cast<size_t>(e)];
      auto [it, inserted] = first_by_target.emplace(edge.to, e);
      if (inserted) continue;
      Edge& keep = edges_[static_cast<size_t>(it->second)];
      keep.expr = Combine(ExprKind::kMax, keep.expr, edge.expr);
      edge.alive = false;
      changed = true;
    }
    return changed;
  }

  bool MergeSeries(int x) {
    auto ins = Alive(in_[static_cast<size_t>(x)]);
    auto outs = Alive(out_[static_cast<size_t>(x)]);
    if (ins.size() != 1 || outs.size() != 1) return false;
    Edge& a = edges_[static_cast<size_t>(ins[0])];
    Edge& b = edges_[static_cast<size_t>(outs[0])];
    const int expr = Combine(ExprKind::kSum, a.expr, b.expr);
    const int from = a.from;
    const int to = b.to;
    a.alive = false;
    b.alive = false;
    AddEdge(from, to, expr);
    return true;
  }

  int nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
  std::vector<Expr> exprs_;
};

}  // namespace

struct WorkflowComposer::Impl {
  size_t samples = kDefaultSampleCount;
  size_t task_count = 0;
  bool series_parallel = false;
  // Series-parallel program.
  std::vector<Expr> exprs;
  int root = kIdentity;
  // perms[e][k]: permutation applied to child k of expression e.
  std::vector<std::vector<std::vector<uint32_t>>> perms;
  // Monte-Carlo fallback.
  std::vector<std::vector<TaskId>> preds;
  std::vector<std::vector<uint32_t>> task_perms;

  // Combines src, reindexed by perm, into out.
  enum class Op { kCopy, kAdd, kMax };
  void Apply(Op op, std::span<const double> src, const std::vector<uint32_t>& perm,
             std::span<double> out) const {
    const size_t m = src.size();
    const double* s = src.data();
    const uint32_t* p = perm.data();
    double* o = out.data();
    if (m == samples) {
      switch (op) {
        case Op::kCopy:
          for (size_t i = 0; i < samples; ++i) o[i] = s[p[i]];
          break;
        case Op::kAdd:
          for (size_t i = 0; i < samples; ++i) o[i] += s[p[i]];
          break;
        case Op::kMax:
          for (size_t i = 0; i < samples; ++i) o[i] = std::max(o[i], s[p[i]]);
          break;
      }
      return;
    }
    for (size_t i = 0; i < samples; ++i) {
      const double v = s[p[i] % m];
      o[i] = op == Op::kCopy ? v : op == Op::kAdd ? o[i] + v : std::max(o[i], v);
    }
  }

  // scratch[depth] holds intermediate results; buffers are reused across
  // siblings at the same depth.
  void Eval(int e, std::span<const EmpiricalDistribution* const> per_task,
            std::span<double> out, std::vector<std::vector<double>>& scratch,
            size_t depth) const {
    const Expr& expr = exprs[static_cast<size_t>(e)];
    const auto& eperms = perms[static_cast<size_t>(e)];
    if (expr.kind == ExprKind::kLeaf) {
      Apply(Op::kCopy, per_task[static_cast<size_t>(expr.task)]->samples(), eperms[0], out);
      return;
    }
    const Op combine = expr.kind == ExprKind::kSum ? Op::kAdd : Op::kMax;
    for (size_t k = 0; k < expr.children.size(); ++k) {
      const Expr& ce = exprs[static_cast<size_t>(expr.children[k])];
      std::span<const double> src;
      if (ce.kind == ExprKind::kLeaf) {
        // Leaves read the task samples directly instead of materializing.
        src = per_task[static_cast<size_t>(ce.task)]->samples();
      } else {
        if (scratch.size() <= depth) scratch.resize(depth + 1);
        scratch[depth].resize(samples);
        // Keep a local handle: deeper calls may grow `scratch`.
        std::vector<double> buf = std::move(scratch[depth]);
        Eval(expr.children[k], per_task, buf, scratch, depth + 1);
        scratch[depth] = std::move(buf);
        src = scratch[depth];
      }
      Apply(k == 0 ? Op::kCopy : combine, src, eperms[k], out);
    }
  }

  // Task-major longest path: finish[t] holds all sample paths of task t and
  // is recycled once its last successor has been processed.
  std::vector<double> MonteCarlo(std::span<const EmpiricalDistribution* const> per_task) const {
    std::vector<double> out(samples, 0.0);
    std::vector<std::vector<double>> finish(task_count);
    std::vector<std::vector<double>> spare;
    for (size_t t = 0; t < task_count; ++t) {
      std::vector<double> f;
      if (!spare.empty()) {
        f = std::move(spare.back());
        spare.pop_back();
      }
      f.assign(samples, 0.0);
      for (TaskId p : preds[t]) {
        const auto& pf = finish[static_cast<size_t>(p)];
        for (size_t i = 0; i < samples; ++i) f[i] = std::max(f[i], pf[i]);
      }
      const auto s = per_task[t]->samples();
      const auto& perm = task_perms[t];
      if (s.size() == samples) {
        for (size_t i = 0; i < samples; ++i) f[i] += s[perm[i]];
      } else {
        for (size_t i = 0; i < samples; ++i) f[i] += s[perm[i] % s.size()];
      }
      if (sink[t]) {
        for (size_t i = 0; i < samples; ++i) out[i] = std::max(out[i], f[i]);
      }
      finish[t] = std::move(f);
      for (size_t r : release_after[t]) spare.push_back(std::move(finish[r]));
    }
    return out;
  }
  std::vector<char> sink;
  std::vector<std::vector<size_t>> release_after;
};

WorkflowComposer::WorkflowComposer(const WorkflowJob& job, size_t samples,
                                   uint64_t seed, bool force_monte_carlo)
    : impl_(std::make_unique<Impl>()) {
  job.ValidateTopological();
  if (samples < 2) throw InvalidArgument("sample count must be >= 2");
  impl_->samples = samples;
  impl_->task_count = job.tasks.size();
  std::optional<int> root;
  if (!force_monte_carlo) {
    SeriesParallelReducer reducer(job);
    root = reducer.Reduce();
    if (root) impl_->exprs = reducer.TakeExprs();
  }
  if (root && *root != kIdentity) {
    impl_->series_parallel = true;
    impl_->root = *root;
    impl_->perms.resize(impl_->exprs.size());
    for (size_t e = 0; e < impl_->exprs.size(); ++e) {
      const size_t k = impl_->exprs[e].kind == ExprKind::kLeaf
                           ? 1
                           : impl_->exprs[e].children.size();
      for (size_t c = 0; c < k; ++c) {
        impl_->perms[e].push_back(RandomPermutation(samples, DeriveSeed(seed, e, c)));
      }
    }
    impl_->exprs.shrink_to_fit();
    return;
  }
  impl_->exprs.clear();
  impl_->preds.resize(job.tasks.size());
  impl_->task_perms.resize(job.tasks.size());
  impl_->sink.assign(job.tasks.size(), 0);
  impl_->release_after.resize(job.tasks.size());
  for (const auto& t : job.tasks) {
    const auto id = static_cast<size_t>(t.id);
    if (t.successors.empty()) {
      impl_->sink[id] = 1;
      impl_->release_after[id].push_back(id);
    } else {
      const TaskId last = *std::max_element(t.successors.begin(), t.successors.end());
      impl_->release_after[static_cast<size_t>(last)].push_back(id);
    }
    impl_->preds[static_cast<size_t>(t.id)] = t.predecessors;
    impl_->task_perms[static_cast<size_t>(t.id)] =
        RandomPermutation(samples, DeriveSeed(seed, 0x4d43, static_cast<uint64_t>(t.id)));
  }
}

WorkflowComposer::~WorkflowComposer() = default;
WorkflowComposer::WorkflowComposer(WorkflowComposer&&) noexcept = default;
WorkflowComposer& WorkflowComposer::operator=(WorkflowComposer&&) noexcept = default;

bool WorkflowComposer::series_parallel() const { return impl_->series_parallel; }
size_t WorkflowComposer::samples() const { return impl_->samples; }

std::vector<double> WorkflowComposer::ComposeSamples(
    std::span<const EmpiricalDistribution* const> per_task) const {
  if (per_task.size() != impl_->task_count) {
    throw InvalidArgument("expected " + std::to_string(impl_->task_count) +
                          " task distributions, got " + std::to_string(per_task.size()));
  }
  for (const auto* d : per_task) {
    if (d == nullptr) throw InvalidArgument("missing task distribution");
  }
  if (impl_->series_parallel) {
    std::vector<double> out(impl_->samples);
    std::vector<std::vector<double>> scratch;
    impl_->Eval(impl_->root, per_task, out, scratch, 0);
    return out;
  }
  return impl_->MonteCarlo(per_task);
}

EmpiricalDistribution WorkflowComposer::Compose(
    std::span<const EmpiricalDistribution* const> per_task) const {
  return EmpiricalDistribution(ComposeSamples(per_task), 0);
}

EmpiricalDistribution WorkflowTimeDistribution(
    const WorkflowJob& job, std::span<const EmpiricalDistribution> per_task,
    uint64_t seed) {
  if (per_task.size() != job.tasks.size()) {
    throw InvalidArgument("missing task distribution: have " +
                          std::to_string(per_task.size()) + " for " +
                          std::to_string(job.tasks.size()) + " tasks");
  }
  size_t n = 0;
  std::vector<const EmpiricalDistribution*> ptrs;
  for (const auto& d : per_task) {
    n = std::max(n, d.size());
    ptrs.push_back(&d);
  }
  WorkflowComposer composer(job, n, seed);
  return EmpiricalDistribution(composer.ComposeSamples(ptrs), seed);
}

bool IsFeasible(const WorkflowJob& job, const EmpiricalDistribution& dist) {
  if (!(job.guarantee_p > 0.0 && job.guarantee_p <= 1.0)) {
    throw InvalidArgument("guarantee must lie in (0, 1]");
  }
  return dist.Percentile(job.guarantee_p) <= job.deadline;
}

double CriticalPathLength(const WorkflowJob& job, std::span<const double> weights) {
  if (weights.size() != job.tasks.size()) throw InvalidArgument("weights size mismatch");
  std::vector<double> finish(job.tasks.size(), 0.0);
  double longest = 0.0;
  for (const auto& t : job.tasks) {
    double ready = 0.0;
    for (TaskId p : t.predecessors) ready = std::max(ready, finish[static_cast<size_t>(p)]);
    finish[static_cast<size_t>(t.id)] = ready + weights[static_cast<size_t>(t.id)];
    longest = std::max(longest, finish[static_cast<size_t>(t.id)]);
  }
  return longest;
}

uint64_t TaskTypeSeed(uint64_t seed, TaskId task, TypeId type) {
  return DeriveSeed(seed, 0x7461736bULL, static_cast<uint64_t>(task),
                    static_cast<uint64_t>(type));
}

DeadlineBounds ComputeDeadlineBounds(const WorkflowJob& job, const Catalog& catalog,
                                     size_t samples, uint64_t seed) {
  job.ValidateTopological();
  auto expected_path = [&](const InstanceType& type) {
    std::vector<double> w;
    for (const auto& t : job.tasks) {
      w.push_back(TaskTimeDistribution(t.profile, type, samples,
                                       TaskTypeSeed(seed, t.id, type.id)).Mean());
    }
    return CriticalPathLength(job, w);
  };
  return {expected_path(catalog.most_expensive()), expected_path(catalog.cheapest())};
}

}  // namespace spotflow
