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


#include "spotflow/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "spotflow/error.hpp"
#include "spotflow/random.hpp"

namespace spotflow {

void SimConfig::Validate() const {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (job_count < 1) throw InvalidArgument("job count must be >= 1");
}

const char* EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kTaskFinish:
      return "TaskFinish";
    case EventKind::kOutOfBid:
      return "OutOfBid";
    case EventKind::kInstanceReady:
      return "InstanceReady";
    case EventKind::kTaskStart:
      return "TaskStart";
    case EventKind::kJobArrival:
      return "JobArrival";
    case EventKind::kSpotPriceChange:
      return "SpotPriceChange";
    case EventKind::kInstanceRelease:
      return "InstanceRelease";
  }
  return "Unknown";
}

CyclicPrice::CyclicPrice(const PriceSeries* series, int64_t offset)
    : series_(series), offset_(offset), period_(series->duration()) {
  if (series == nullptr || series->empty()) throw InvalidArgument("empty price series");
  if (period_ > 0) offset_ = ((offset_ % period_) + period_) % period_;
}

int64_t CyclicPrice::Local(int64_t t) const {
  if (period_ == 0) return series_->start();
  return series_->start() + (t + offset_) % period_;
}

double CyclicPrice::At(int64_t t) const { return series_->PriceAt(Local(t)); }

std::optional<int64_t> CyclicPrice::NextAbove(int64_t t, double bid) const {
  if (period_ == 0) {
    if (series_->points().front().price > bid) return t;
    return std::nullopt;
  }
  const int64_t local = Local(t);
  // The last point only closes the final interval, so it never repeats.
  if (auto hit = series_->NextAbove(local, bid); hit && *hit < series_->end()) {
    return t + (*hit - local);
  }
  const int64_t to_cycle = series_->end() - local;
  if (auto hit = series_->NextAbove(series_->start(), bid);
      hit && *hit < series_->end()) {
    return t + to_cycle + (*hit - series_->start());
  }
  return std::nullopt;
}

double BillInstance(InstanceRecord& inst, const InstanceType& type,
                    const CyclicPrice* price) {
  if (inst.end < inst.start) throw InvalidArgument("instance ends before it starts");
  const int64_t elapsed = inst.end - inst.start;
  int64_t hours = 0;
  if (inst.termination == Termination::kOutOfBid) {
    hours = elapsed / 3600;
  } else {
    hours = std::max<int64_t>(1, (elapsed + 3599) / 3600);
  }
  double bill = 0.0;
  for (int64_t h = 0; h < hours; ++h) {
    if (inst.spot) {
      if (price == nullptr) throw InvalidArgument("spot instance without price trace");
      bill += price->At(inst.start + h * 3600);
    } else {
      bill += type.ondemand_price;
    }
  }
  inst.hours = static_cast<double>(hours);
  inst.bill = bill;
  return bill;
}

namespace {

enum class InstState { kAcquiring, kBusy, kIdle, kGone };

struct Instance {
  InstanceRecord rec;
  InstState state = InstState::kAcquiring;
  std::optional<int64_t> out_of_bid;  // fixed by the bid at start
  uint64_t epoch = 0;                 // bumped on every state change
  // Task bound to the instance while acquiring or busy.
  int job = -1;
  TaskId task = -1;
  int attempt = 0;
  size_t record = 0;
};

struct Event {
  int64_t time;
  EventKind kind;
  uint64_t seq;
  int a;
  uint64_t b;
};

struct EventAfter {
  bool operator()(const Event& x, const Event& y) const {
    return std::tie(x.time, x.kind, x.seq) > std::tie(y.time, y.kind, y.seq);
  }
};

struct JobState {
  const JobClass* cls = nullptr;
  std::vector<int> pending_preds;
  size_t remaining = 0;
};

class Simulation {
 public:
  Simulation(const SimConfig& config, std::span<const JobClass> classes,
             const Catalog& catalog, const SpotPriceTrace& trace)
      : config_(config), classes_(classes), catalog_(catalog) {
    int64_t offset = 0;
    Rng rng(DeriveSeed(config.seed, 0x6f6666));
    for (const InstanceType& type : catalog.types()) {
      const PriceSeries* s = trace.Find(type.name);
      if (s == nullptr) {
        prices_.emplace_back();
        continue;
      }
      if (config.trace_offset) {
        offset = *config.trace_offset;
      } else if (offset == 0 && s->duration() > 0) {
        offset = static_cast<int64_t>(UniformBelow(rng, static_cast<uint64_t>(s->duration())));
      }
      prices_.emplace_back(CyclicPrice(s, offset));
    }
    idle_.resize(catalog.size() * 2);
  }

  SimReport Run() {
    Rng arrivals(DeriveSeed(config_.seed, 0x617272));
    std::exponential_distribution<double> gap(config_.lambda / 60.0);
    double clock = 0.0;
    for (int j = 0; j < config_.job_count; ++j) {
      if (j > 0) clock += gap(arrivals);
      Push(static_cast<int64_t>(std::llround(clock)), EventKind::kJobArrival, j, 0);
    }
    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      now_ = e.time;
      switch (e.kind) {
        case EventKind::kJobArrival:
          OnArrival(e.a);
          break;
        case EventKind::kInstanceReady:
          OnReady(e.a);
          break;
        case EventKind::kTaskFinish:
          OnFinish(e.a, e.b);
          break;
        case EventKind::kOutOfBid:
          OnOutOfBid(e.a);
          break;
        case EventKind::kInstanceRelease:
          OnRelease(e.a, e.b);
          break;
        default:
          break;
      }
    }
    return Finish();
  }

 private:
  void Push(int64_t t, EventKind kind, int a, uint64_t b) {
    queue_.push(Event{t, kind, seq_++, a, b});
  }

  void Log(EventKind kind, const std::string& detail) {
    if (!config_.record_events) return;
    report_.events.push_back("t=" + std::to_string(now_) + " " + EventKindName(kind) +
                             " " + detail);
  }

  std::string Describe(int job, TaskId task) const {
    return "job=" + std::to_string(job) + " task=" +
           jobs_[static_cast<size_t>(job)].cls->job.tasks[static_cast<size_t>(task)].name;
  }

  std::vector<int>& IdleList(TypeId type, bool spot) {
    return idle_[static_cast<size_t>(type) * 2 + (spot ? 1 : 0)];
  }

  void OnArrival(int j) {
    const JobClass& cls = classes_[static_cast<size_t>(j) % classes_.size()];
    JobState st;
    st.cls = &cls;
    st.remaining = cls.job.size();
    for (const Task& t : cls.job.tasks) {
      st.pending_preds.push_back(static_cast<int>(t.predecessors.size()));
    }
    jobs_.push_back(std::move(st));
    JobResult r;
    r.id = j;
    r.class_id = cls.job.class_id;
    r.arrival = now_;
    r.deadline = cls.job.deadline;
    report_.job_results.push_back(r);
    Log(EventKind::kJobArrival, "job=" + std::to_string(j) + " class=" + cls.job.class_id);
    for (const Task& t : cls.job.tasks) {
      if (t.predecessors.empty()) Request(j, t.id, 0);
    }
  }

  double ExpectedTime(const JobClass& cls, TaskId task, TypeId type) {
    const auto key = std::make_tuple(&cls, task, type);
    auto it = expected_.find(key);
    if (it != expected_.end()) return it->second;
    const double m =
        TaskTimeDistribution(cls.job.tasks[static_cast<size_t>(task)].profile,
                             catalog_.at(type), 1000, TaskTypeSeed(config_.seed, task, type))
            .Mean();
    expected_.emplace(key, m);
    return m;
  }

  int TakeIdle(std::vector<int>& list, double min_bid) {
    for (size_t k = 0; k < list.size(); ++k) {
      Instance& inst = instances_[static_cast<size_t>(list[k])];
      if (inst.rec.bid >= min_bid) {
        const int id = list[k];
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(k));
        return id;
      }
    }
    return -1;
  }

  void Request(int j, TaskId task, int attempt) {
    const JobClass& cls = *jobs_[static_cast<size_t>(j)].cls;
    const HybridDim& dim = cls.plan.configs[static_cast<size_t>(task)].dims()[static_cast<size_t>(attempt)];
    int id = TakeIdle(IdleList(dim.type, dim.is_spot), dim.is_spot ? dim.price : 0.0);
    if (id >= 0) {
      ++report_.reused;
    } else if (dim.is_spot) {
      // A spot request may run on an idle on-demand instance of its type
      // when the task is expected to fit in the hour already paid for.
      const double need = ExpectedTime(cls, task, dim.type);
      auto& od = IdleList(dim.type, false);
      for (size_t k = 0; k < od.size(); ++k) {
        const Instance& inst = instances_[static_cast<size_t>(od[k])];
        const int64_t used = (now_ - inst.rec.start) % 3600;
        const double left = static_cast<double>(3600 - used);
        if (need <= left) {
          id = od[k];
          od.erase(od.begin() + static_cast<std::ptrdiff_t>(k));
          ++report_.consolidated;
          break;
        }
      }
    }
    if (id >= 0) {
      Start(id, j, task, attempt);
      return;
    }
    Instance inst;
    inst.rec.id = static_cast<int>(instances_.size());
    inst.rec.type = dim.type;
    inst.rec.spot = dim.is_spot;
    inst.rec.bid = dim.price;
    inst.rec.requested = now_;
    inst.job = j;
    inst.task = task;
    inst.attempt = attempt;
    const InstanceType& type = catalog_.at(dim.type);
    const auto lag = static_cast<int64_t>(std::llround(dim.is_spot ? type.lag_spot : type.lag_ondemand));
    instances_.push_back(inst);
    if (dim.is_spot && !prices_[static_cast<size_t>(dim.type)]) {
      throw Error(ErrorCode::kMismatch, "plan bids on " + type.name + " without a price trace");
    }
    Push(now_ + lag, EventKind::kInstanceReady, inst.rec.id, 0);
  }

  void OnReady(int id) {
    Instance& inst = instances_[static_cast<size_t>(id)];
    inst.rec.start = now_;
    Log(EventKind::kInstanceReady, "inst=" + std::to_string(id) + " type=" +
                                       catalog_.at(inst.rec.type).name +
                                       (inst.rec.spot ? " spot" : " ondemand"));
    if (inst.rec.spot) {
      inst.out_of_bid = prices_[static_cast<size_t>(inst.rec.type)]->NextAbove(now_, inst.rec.bid);
      if (inst.out_of_bid) Push(*inst.out_of_bid, EventKind::kOutOfBid, id, 0);
      if (inst.out_of_bid && *inst.out_of_bid == now_) {
        // Priced out on arrival: the out-of-bid event at this instant
        // fails the bound task before it starts.
        inst.state = InstState::kBusy;
        inst.record = SIZE_MAX;
        return;
      }
    }
    Start(id, inst.job, inst.task, inst.attempt);
  }

  void Start(int id, int j, TaskId task, int attempt) {
    Instance& inst = instances_[static_cast<size_t>(id)];
    const JobClass& cls = *jobs_[static_cast<size_t>(j)].cls;
    const InstanceType& type = catalog_.at(inst.rec.type);
    BandwidthSampler sampler(
        type, DeriveSeed(config_.seed, static_cast<uint64_t>(j), static_cast<uint64_t>(task),
                         static_cast<uint64_t>(attempt)));
    const double t = TaskTime(cls.job.tasks[static_cast<size_t>(task)].profile, type, sampler.Next());
    const auto duration = static_cast<int64_t>(std::ceil(t));
    inst.state = InstState::kBusy;
    inst.job = j;
    inst.task = task;
    inst.attempt = attempt;
    ++inst.epoch;
    ++inst.rec.tasks_run;
    TaskRecord rec;
    rec.job = j;
    rec.task = task;
    rec.attempt = attempt;
    rec.instance = id;
    rec.start = now_;
    rec.end = now_ + duration;
    inst.record = report_.tasks.size();
    report_.tasks.push_back(rec);
    Log(EventKind::kTaskStart, Describe(j, task) + " attempt=" + std::to_string(attempt) +
                                   " inst=" + std::to_string(id));
    Push(now_ + duration, EventKind::kTaskFinish, id, inst.epoch);
  }

  void MakeIdle(int id) {
    Instance& inst = instances_[static_cast<size_t>(id)];
    inst.state = InstState::kIdle;
    ++inst.epoch;
    inst.job = -1;
    inst.task = -1;
    IdleList(inst.rec.type, inst.rec.spot).push_back(id);
    int64_t release = now_;
    if (config_.idle_release == IdleRelease::kHourBoundary) {
      const int64_t used = now_ - inst.rec.start;
      release = inst.rec.start + std::max<int64_t>(1, (used + 3599) / 3600) * 3600;
    }
    Push(release, EventKind::kInstanceRelease, id, inst.epoch);
  }

  void Retire(int id, Termination how) {
    Instance& inst = instances_[static_cast<size_t>(id)];
    if (inst.state == InstState::kIdle) {
      auto& list = IdleList(inst.rec.type, inst.rec.spot);
      list.erase(std::find(list.begin(), list.end(), id));
    }
    inst.state = InstState::kGone;
    ++inst.epoch;
    inst.rec.end = now_;
    inst.rec.termination = how;
    const auto type = static_cast<size_t>(inst.rec.type);
    BillInstance(inst.rec, catalog_.at(inst.rec.type), prices_[type] ? &*prices_[type] : nullptr);
  }

  void OnFinish(int id, uint64_t epoch) {
    Instance& inst = instances_[static_cast<size_t>(id)];
    if (inst.state != InstState::kBusy || inst.epoch != epoch) return;
    const int j = inst.job;
    const TaskId task = inst.task;
    report_.tasks[inst.record].completed = true;
    Log(EventKind::kTaskFinish, Describe(j, task) + " inst=" + std::to_string(id));
    MakeIdle(id);
    JobState& st = jobs_[static_cast<size_t>(j)];
    --st.remaining;
    if (st.remaining == 0) {
      report_.job_results[static_cast<size_t>(j)].finish = now_;
    }
    for (TaskId s : st.cls->job.tasks[static_cast<size_t>(task)].successors) {
      if (--st.pending_preds[static_cast<size_t>(s)] == 0) Request(j, s, 0);
    }
  }

  void OnOutOfBid(int id) {
    Instance& inst = instances_[static_cast<size_t>(id)];
    if (inst.state == InstState::kGone) return;
    ++report_.out_of_bid;
    Log(EventKind::kOutOfBid, "inst=" + std::to_string(id));
    const bool busy = inst.state == InstState::kBusy;
    const int j = inst.job;
    const TaskId task = inst.task;
    const int attempt = inst.attempt;
    if (busy && inst.record != SIZE_MAX) report_.tasks[inst.record].end = now_;
    Retire(id, Termination::kOutOfBid);
    if (busy) {
      ++report_.job_results[static_cast<size_t>(j)].restarts;
      Request(j, task, attempt + 1);
    }
  }

  void OnRelease(int id, uint64_t epoch) {
    Instance& inst = instances_[static_cast<size_t>(id)];
    if (inst.state != InstState::kIdle || inst.epoch != epoch) return;
    Log(EventKind::kInstanceRelease, "inst=" + std::to_string(id));
    Retire(id, Termination::kUser);
  }

  SimReport Finish() {
    SimReport& r = report_;
    r.jobs = r.job_results.size();
    double time = 0.0;
    size_t hits = 0;
    for (const JobResult& j : r.job_results) {
      time += j.makespan();
      if (j.hit()) ++hits;
    }
    for (const Instance& inst : instances_) {
      r.total_cost += inst.rec.bill;
      r.instance_hours[catalog_.at(inst.rec.type).name + (inst.rec.spot ? "/spot" : "/ondemand")] +=
          inst.rec.hours;
      r.instances.push_back(inst.rec);
    }
    const auto n = static_cast<double>(r.jobs);
    r.avg_cost = r.total_cost / n;
    r.avg_time = time / n;
    r.hit_rate = static_cast<double>(hits) / n;
    return std::move(report_);
  }

  const SimConfig& config_;
  std::span<const JobClass> classes_;
  const Catalog& catalog_;
  std::vector<std::optional<CyclicPrice>> prices_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  uint64_t seq_ = 0;
  int64_t now_ = 0;
  std::vector<Instance> instances_;
  std::vector<std::vector<int>> idle_;
  std::vector<JobState> jobs_;
  std::map<std::tuple<const JobClass*, TaskId, TypeId>, double> expected_;
  SimReport report_;
};

void CheckClasses(std::span<const JobClass> classes, const Catalog& catalog) {
  if (classes.empty()) throw InvalidArgument("no workflow classes to simulate");
  for (const JobClass& c : classes) {
    const std::string& id = c.job.class_id;
    if (c.plan.class_id != id) {
      throw Error(ErrorCode::kMismatch, "no plan for workflow class '" + id + "'");
    }
    if (c.plan.configs.size() != c.job.size()) {
      throw Error(ErrorCode::kMismatch, "plan for '" + id + "' has " +
                                            std::to_string(c.plan.configs.size()) +
                                            " tasks, workflow has " + std::to_string(c.job.size()));
    }
    for (size_t i = 0; i < c.job.size(); ++i) {
      if (i < c.plan.task_names.size() && c.plan.task_names[i] != c.job.tasks[i].name) {
        throw Error(ErrorCode::kMismatch, "plan for '" + id + "' task " + std::to_string(i) +
                                              " is " + c.plan.task_names[i] + ", workflow has " +
                                              c.job.tasks[i].name);
      }
      const HybridConfig& cfg = c.plan.configs[i];
      cfg.Validate(std::max(cfg.size(), size_t{1}));
      for (const HybridDim& d : cfg.dims()) {
        if (d.type < 0 || static_cast<size_t>(d.type) >= catalog.size()) {
          throw Error(ErrorCode::kMismatch, "plan for '" + id + "' uses an unknown type");
        }
      }
    }
    if (!(c.job.deadline > 0.0)) {
      throw InvalidArgument("workflow class '" + id + "' has no deadline");
    }
  }
}

}  // namespace

SimReport Simulate(const SimConfig& config, std::span<const JobClass> classes,
                   const Catalog& catalog, const SpotPriceTrace& trace) {
  config.Validate();
  CheckClasses(classes, catalog);
  Simulation sim(config, classes, catalog, trace);
  return sim.Run();
}

std::string ReportJson(const SimReport& r, const SimConfig& config) {
  using nlohmann::ordered_json;
  ordered_json hours = ordered_json::object();
  for (const auto& [k, v] : r.instance_hours) hours[k] = v;
  ordered_json j = {
      {"config",
       {{"lambda", config.lambda},
        {"jobs", config.job_count},
        {"seed", config.seed},
        {"idle_release", config.idle_release == IdleRelease::kHourBoundary ? "hour-boundary"
                                                                          : "immediate"}}},
      {"jobs", r.jobs},
      {"total_cost", r.total_cost},
      {"avg_cost", r.avg_cost},
      {"avg_time", r.avg_time},
      {"hit_rate", r.hit_rate},
      {"instances", r.instances.size()},
      {"out_of_bid", r.out_of_bid},
      {"reused", r.reused},
      {"consolidated", r.consolidated},
      {"instance_hours", hours}};
  return j.dump(2) + "\n";
}

std::string JobTableCsv(const SimReport& r) {
  std::ostringstream os;
  os << "job,class,arrival,finish,makespan,deadline,hit,restarts\n";
  for (const JobResult& j : r.job_results) {
    os << j.id << ',' << j.class_id << ',' << j.arrival << ',' << j.finish << ','
       << j.makespan() << ',' << j.deadline << ',' << (j.hit() ? 1 : 0) << ',' << j.restarts
       << '\n';
  }
  return os.str();
}

std::string EventLog(const SimReport& r) {
  std::string out;
  for (const std::string& e : r.events) {
    out += e;
    out += '\n';
  }
  return out;
}

}  // namespace spotflow
