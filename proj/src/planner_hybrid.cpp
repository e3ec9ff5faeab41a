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


#include "spotflow/planner_hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "spotflow/error.hpp"
#include "spotflow/random.hpp"

namespace spotflow {

void RefineParams::Validate() const {
  if (max_dims < 1) throw InvalidArgument("max_dims must be >= 1");
  if (!(p_min > 0.0)) throw InvalidArgument("p_min must be > 0");
  if (!(bid_tolerance > 0.0)) throw InvalidArgument("bid_tolerance must be > 0");
  if (!(dominance_epsilon >= 0.0 && dominance_epsilon < 1.0)) {
    throw InvalidArgument("dominance_epsilon must lie in [0, 1)");
  }
}

namespace {

// Row-aligned draws of every stage: times[j][i] is the i-th time of stage
// j (on-demand last) and u[j][i] the uniform that picks its failure time.
struct Draws {
  size_t n = 0;
  std::vector<std::vector<double>> times;
  std::vector<std::vector<double>> u;
};

void CheckStages(std::span<const SpotStage> spots, const OnDemandStage& od) {
  if (od.time == nullptr) throw InvalidArgument("on-demand stage has no time");
  for (const SpotStage& s : spots) {
    if (s.time == nullptr || s.failure == nullptr) {
      throw InvalidArgument("spot stage is missing its time or failure model");
    }
  }
}

Draws MakeDraws(std::span<const SpotStage> spots, const OnDemandStage& od,
                uint64_t seed) {
  CheckStages(spots, od);
  Draws d;
  d.n = od.time->size();
  for (const SpotStage& s : spots) d.n = std::max(d.n, s.time->size());
  const size_t stages = spots.size() + 1;
  d.times.resize(stages);
  d.u.resize(spots.size());
  for (size_t j = 0; j < stages; ++j) {
    const EmpiricalDistribution& dist = j < spots.size() ? *spots[j].time : *od.time;
    const std::vector<uint32_t> perm =
        RandomPermutation(d.n, DeriveSeed(seed, 0x7065726d, j));
    std::span<const double> src = dist.samples();
    d.times[j].resize(d.n);
    for (size_t i = 0; i < d.n; ++i) d.times[j][i] = src[perm[i] % src.size()];
  }
  for (size_t j = 0; j < spots.size(); ++j) {
    Rng rng(DeriveSeed(seed, 0x66666670, j));
    d.u[j].resize(d.n);
    for (double& x : d.u[j]) x = UniformUnit(rng);
  }
  return d;
}

}  // namespace

EmpiricalDistribution HybridTimeDistribution(std::span<const SpotStage> spots,
                                             const OnDemandStage& od,
                                             uint64_t seed) {
  const Draws d = MakeDraws(spots, od, seed);
  std::vector<double> out(d.n);
  for (size_t i = 0; i < d.n; ++i) {
    double elapsed = 0.0;
    bool done = false;
    for (size_t j = 0; j < spots.size() && !done; ++j) {
      const double run = d.times[j][i];
      const std::optional<double> fail = spots[j].failure->Sample(d.u[j][i]);
      elapsed += spots[j].lag;
      if (!fail || *fail >= run) {
        elapsed += run;
        done = true;
      } else {
        elapsed += *fail;
      }
    }
    if (!done) elapsed += od.lag + d.times[spots.size()][i];
    out[i] = elapsed;
  }
  return EmpiricalDistribution(std::move(out), seed);
}

HybridCostBreakdown HybridCost(std::span<const SpotStage> spots,
                               const OnDemandStage& od, uint64_t seed) {
  const Draws d = MakeDraws(spots, od, seed);
  HybridCostBreakdown c;
  c.spot_usage.assign(spots.size(), 0.0);
  for (size_t i = 0; i < d.n; ++i) {
    double reach = 1.0;
    for (size_t j = 0; j < spots.size(); ++j) {
      const double stime = d.times[j][i];
      c.spot_usage[j] += reach * spots[j].bid * stime / 3600.0;
      reach *= spots[j].failure->CumulativeFailure(stime);
    }
    c.ondemand_usage += reach * od.price * d.times[spots.size()][i] / 3600.0;
  }
  const auto n = static_cast<double>(d.n);
  for (double& s : c.spot_usage) {
    s /= n;
    c.total += s;
  }
  c.ondemand_usage /= n;
  c.total += c.ondemand_usage;
  return c;
}

struct HybridRefiner::Stages {
  std::vector<std::shared_ptr<const FirstFailureDistribution>> keep;
  std::vector<SpotStage> spots;
  OnDemandStage od;
};

HybridRefiner::HybridRefiner(const TaskTimeTable& table,
                             std::vector<const FailureModel*> failure,
                             RefineParams params, uint64_t seed)
    : table_(&table), failure_(std::move(failure)), params_(params), seed_(seed) {
  params_.Validate();
  if (failure_.size() != table.type_count()) {
    throw InvalidArgument("expected one failure model slot per instance type");
  }
}

uint64_t HybridRefiner::TaskSeed(TaskId task) const {
  return DeriveSeed(seed_, 0x68796272, static_cast<uint64_t>(task));
}

HybridRefiner::Stages HybridRefiner::BuildStages(TaskId task,
                                                 const HybridConfig& config) const {
  config.Validate(std::max(params_.max_dims, config.size()));
  const Catalog& catalog = table_->catalog();
  const bool lag = table_->includes_lag();
  Stages s;
  for (const HybridDim& dim : config.dims()) {
    const InstanceType& type = catalog.at(dim.type);
    const EmpiricalDistribution* time = &table_->Execution(task, dim.type);
    if (!dim.is_spot) {
      s.od = OnDemandStage{time, dim.price, lag ? type.lag_ondemand : 0.0};
      continue;
    }
    const FailureModel* model = failure_.at(static_cast<size_t>(dim.type));
    if (model == nullptr) {
      throw InvalidArgument("no spot price trace for type " + type.name);
    }
    s.keep.push_back(model->At(dim.price));
    s.spots.push_back(
        SpotStage{time, s.keep.back().get(), dim.price, lag ? type.lag_spot : 0.0});
  }
  return s;
}

EmpiricalDistribution HybridRefiner::TimeDistribution(
    TaskId task, const HybridConfig& config) const {
  const Stages s = BuildStages(task, config);
  return HybridTimeDistribution(s.spots, s.od, TaskSeed(task));
}

HybridCostBreakdown HybridRefiner::Cost(TaskId task,
                                        const HybridConfig& config) const {
  const Stages s = BuildStages(task, config);
  return HybridCost(s.spots, s.od, TaskSeed(task));
}

GateResult HybridRefiner::Evaluate(TaskId task, const HybridConfig& config) const {
  const TypeId od_type = config.ondemand().type;
  GateResult r;
  r.hybrid_cost = Cost(task, config).total;
  r.ondemand_cost = table_->Cost(task, od_type);
  r.cost_ok = r.hybrid_cost <= r.ondemand_cost;
  const EmpiricalDistribution hybrid = TimeDistribution(task, config);
  r.dominance_gap = DominanceGap(hybrid, table_->Planning(task, od_type));
  r.dominance_ok = r.dominance_gap <= params_.dominance_epsilon;
  return r;
}

std::optional<double> HybridRefiner::BinarySearchBid(
    TaskId task, std::span<const HybridDim> prefix, TypeId spot_type,
    TypeId od_type, double lo, double hi) const {
  const InstanceType& od = table_->catalog().at(od_type);
  std::vector<HybridDim> dims(prefix.begin(), prefix.end());
  dims.push_back(HybridDim{spot_type, 0.0, true});
  dims.push_back(HybridDim{od_type, od.ondemand_price, false});
  const size_t slot = prefix.size();

  while (hi - lo >= params_.bid_tolerance) {
    const double mid = 0.5 * (lo + hi);
    dims[slot].price = mid;
    const HybridConfig config(dims);
    const Stages s = BuildStages(task, config);
    const HybridCostBreakdown cost = HybridCost(s.spots, s.od, TaskSeed(task));
    const double od_cost = table_->Cost(task, od_type);
    if (cost.total > od_cost) {
      // Lower bids only fail more often, so everything except the usage
      // term of this stage bounds the cost of every lower bid from below.
      // The slack absorbs summation-order differences when the rerun term
      // equals the on-demand cost (certain failure).
      if (cost.total - cost.spot_usage[slot] >= od_cost * (1.0 - 1e-9)) {
        lo = mid;
      } else {
        hi = mid;
      }
      continue;
    }
    const EmpiricalDistribution hybrid =
        HybridTimeDistribution(s.spots, s.od, TaskSeed(task));
    if (DominanceGap(hybrid, table_->Planning(task, od_type)) >
        params_.dominance_epsilon) {
      lo = mid;
      continue;
    }
    return mid;
  }
  return std::nullopt;
}

HybridConfig HybridRefiner::RefineTask(TaskId task, TypeId od_type) const {
  const Catalog& catalog = table_->catalog();
  const HybridDim od{od_type, catalog.at(od_type).ondemand_price, false};
  std::vector<HybridDim> spots;
  for (size_t dim = 0; dim + 1 < params_.max_dims; ++dim) {
    std::optional<HybridDim> chosen;
    for (auto t = static_cast<size_t>(od_type); t < catalog.size(); ++t) {
      if (failure_[t] == nullptr) continue;
      const auto type = static_cast<TypeId>(t);
      const std::optional<double> bid =
          BinarySearchBid(task, spots, type, od_type, params_.p_min,
                          catalog.at(type).ondemand_price);
      // A later, more expensive type that also passes replaces the earlier.
      if (bid) chosen = HybridDim{type, *bid, true};
    }
    if (!chosen) break;
    spots.push_back(*chosen);
  }
  spots.push_back(od);
  return HybridConfig(std::move(spots));
}

}  // namespace spotflow
