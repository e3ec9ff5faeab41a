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


#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "spotflow/error.hpp"
#include "spotflow/simulator.hpp"
#include "testkit.hpp"

using namespace spotflow;

namespace {

TaskProfile Seconds(double s) { return TaskProfile{s * 1e9, 0, 0, 0, 0}; }  // on m1.small

JobClass MakeClass(WorkflowJob job, std::vector<HybridConfig> configs) {
  JobClass c;
  c.plan.class_id = job.class_id;
  c.plan.deadline = job.deadline;
  for (const Task& t : job.tasks) c.plan.task_names.push_back(t.name);
  c.plan.configs = std::move(configs);
  c.job = std::move(job);
  return c;
}

WorkflowJob Chain(std::initializer_list<double> seconds, double deadline) {
  WorkflowJob job;
  job.class_id = "chain";
  job.deadline = deadline;
  int i = 0;
  for (double s : seconds) {
    job.AddTask("t" + std::to_string(i), Seconds(s));
    if (i > 0) job.AddEdge(i - 1, i);
    ++i;
  }
  return job;
}

SpotPriceTrace Flat(double price) {
  SpotPriceTrace t;
  const Catalog catalog = Catalog::DefaultM1();
  for (const InstanceType& type : catalog.types()) {
    t.Add(type.name, PriceSeries({{kTraceEpoch, price}, {kTraceEpoch + 30 * 86400, price}}));
  }
  return t;
}

HybridConfig Od(TypeId t) { return HybridConfig::OnDemand(t, Catalog::DefaultM1().at(t).ondemand_price); }
HybridConfig SpotThenOd(TypeId t, double bid) {
  return HybridConfig({{t, bid, true}, {t, Catalog::DefaultM1().at(t).ondemand_price, false}});
}

SimConfig One() {
  SimConfig s;
  s.job_count = 1;
  s.trace_offset = 0;
  return s;
}

struct Planned {
  Catalog catalog = Catalog::DefaultM1();
  SpotPriceTrace trace;
  std::vector<JobClass> classes;
};

// Montage and Epigenomics planned with spot refinement, shared by the
// randomized simulator properties.
const Planned& PlannedFixture(const std::string& shape) {
  static std::map<std::string, Planned> cache;
  auto it = cache.find(shape);
  if (it != cache.end()) return it->second;
  Planned p;
  p.trace = SpotPriceTrace::LoadDir(testkit::DataPath("traces/" + shape), p.catalog);
  PlannerOptions opt;
  opt.samples = 2000;
  opt.guarantee = 0.9;
  for (const WorkflowJob& j : {MakeMontage(3), MakeEpigenomics(2)}) {
    JobClass c;
    c.job = ResolveJobTargets(j, p.catalog, opt);
    c.plan = PlanWorkflow(j, p.catalog, p.trace, opt);
    p.classes.push_back(std::move(c));
  }
  return cache.emplace(shape, std::move(p)).first->second;
}

struct LogEvent {
  int64_t t;
  std::string kind;
  std::map<std::string, std::string> kv;
};

std::vector<LogEvent> ParseLog(const std::string& log) {
  std::vector<LogEvent> out;
  std::istringstream in(log);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    LogEvent e;
    ls >> tok;
    e.t = std::stoll(tok.substr(2));
    ls >> e.kind;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) e.kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

TEST_CASE("billing examples") {
  const Catalog c = Catalog::DefaultM1();
  const PriceSeries flat({{kTraceEpoch, 0.05}, {kTraceEpoch + 86400, 0.05}});
  const CyclicPrice price(&flat, 0);

  InstanceRecord od;
  od.start = 0;
  od.end = 90 * 60;
  CHECK(BillInstance(od, c.at(0), nullptr) == doctest::Approx(0.12));
  CHECK(od.hours == 2);

  InstanceRecord oob;
  oob.spot = true;
  oob.start = 0;
  oob.end = 90 * 60;
  oob.termination = Termination::kOutOfBid;
  CHECK(BillInstance(oob, c.at(0), &price) == doctest::Approx(0.05));
  CHECK(oob.hours == 1);

  InstanceRecord user;
  user.spot = true;
  user.start = 0;
  user.end = 30 * 60;
  CHECK(BillInstance(user, c.at(0), &price) == doctest::Approx(0.05));

  InstanceRecord brief;
  brief.start = 100;
  brief.end = 100;
  CHECK(BillInstance(brief, c.at(0), nullptr) == doctest::Approx(0.06));

  // The market price at each hour start, not the bid.
  const PriceSeries step({{kTraceEpoch, 0.02}, {kTraceEpoch + 3600, 0.07}, {kTraceEpoch + 86400, 0.07}});
  const CyclicPrice stepped(&step, 0);
  InstanceRecord two;
  two.spot = true;
  two.bid = 1.0;
  two.start = 0;
  two.end = 7000;
  CHECK(BillInstance(two, c.at(0), &stepped) == doctest::Approx(0.09));

  InstanceRecord bad;
  bad.start = 10;
  bad.end = 5;
  CHECK_THROWS_AS(BillInstance(bad, c.at(0), nullptr), Error);
}

TEST_CASE("single on-demand task bills one rounded hour") {
  const Catalog c = Catalog::DefaultM1();
  const std::vector<JobClass> classes{MakeClass(Chain({1800}, 3600), {Od(0)})};
  const SimReport r = Simulate(One(), classes, c, {});
  CHECK(r.jobs == 1);
  CHECK(r.total_cost == doctest::Approx(0.06));
  CHECK(r.hit_rate == 1.0);
  REQUIRE(r.instances.size() == 1);
  CHECK(r.instances[0].start == 120);
  CHECK(r.job_results[0].makespan() == 120 + 1800);

  const std::vector<JobClass> late{MakeClass(Chain({1800}, 1900), {Od(0)})};
  CHECK(Simulate(One(), late, c, {}).hit_rate == 0.0);
}

TEST_CASE("a 61-minute on-demand task bills two hours") {
  const Catalog c = Catalog::DefaultM1();
  const std::vector<JobClass> classes{MakeClass(Chain({61 * 60}, 9000), {Od(0)})};
  for (IdleRelease rel : {IdleRelease::kHourBoundary, IdleRelease::kImmediate}) {
    SimConfig s = One();
    s.idle_release = rel;
    const SimReport r = Simulate(s, classes, c, {});
    REQUIRE(r.instances.size() == 1);
    CHECK(r.instances[0].hours == 2);
    CHECK(r.total_cost == doctest::Approx(0.12));
    CHECK(r.instance_hours.at("m1.small/ondemand") == 2);
  }
}

TEST_CASE("out-of-bid spot falls back to on-demand") {
  // The spot instance is ready at 420 s; the price jumps above the bid ten
  // minutes later.
  const Catalog c = Catalog::DefaultM1();
  SpotPriceTrace trace;
  trace.Add("m1.small", PriceSeries({{kTraceEpoch, 0.02},
                                     {kTraceEpoch + 1020, 1.0},
                                     {kTraceEpoch + 1020 + 3600, 0.02},
                                     {kTraceEpoch + 86400, 0.02}}));
  const std::vector<JobClass> classes{MakeClass(Chain({1800}, 3600), {SpotThenOd(0, 0.05)})};
  SimConfig s = One();
  s.record_events = true;
  const SimReport r = Simulate(s, classes, c, trace);
  CHECK(r.out_of_bid == 1);
  CHECK(r.hit_rate == 1.0);
  CHECK(r.job_results[0].restarts == 1);
  CHECK(r.job_results[0].finish == 1020 + 120 + 1800);
  REQUIRE(r.instances.size() == 2);
  CHECK(r.instances[0].spot);
  CHECK(r.instances[0].termination == Termination::kOutOfBid);
  CHECK(r.instances[0].bill == 0.0);  // the partial spot hour is free
  CHECK(r.instances[1].bill == doctest::Approx(0.06));
  CHECK(r.total_cost == doctest::Approx(0.06));
  REQUIRE(r.tasks.size() == 2);
  CHECK_FALSE(r.tasks[0].completed);
  CHECK(r.tasks[0].end == 1020);
  CHECK(r.tasks[1].completed);
  CHECK(r.tasks[1].attempt == 1);
  CHECK(EventLog(r).find("OutOfBid") != std::string::npos);
}

TEST_CASE("idle instances are reused and spot requests consolidate onto on-demand") {
  const Catalog c = Catalog::DefaultM1();
  const SpotPriceTrace cheap = Flat(0.02);
  {
    const std::vector<JobClass> classes{MakeClass(Chain({600, 600}, 9000), {Od(0), Od(0)})};
    const SimReport r = Simulate(One(), classes, c, cheap);
    CHECK(r.reused == 1);
    CHECK(r.instances.size() == 1);
    CHECK(r.tasks[1].start == r.tasks[0].end);
  }
  {
    const std::vector<JobClass> classes{MakeClass(Chain({600, 600}, 9000), {Od(0), SpotThenOd(0, 0.05)})};
    const SimReport r = Simulate(One(), classes, c, cheap);
    CHECK(r.consolidated == 1);
    CHECK(r.instances.size() == 1);
    CHECK(r.tasks[1].start == r.tasks[0].end);
    CHECK(r.tasks[1].attempt == 0);
  }
  {
    // Not enough of the paid hour left: a new spot instance is acquired.
    const std::vector<JobClass> classes{MakeClass(Chain({600, 3300}, 9000), {Od(0), SpotThenOd(0, 0.05)})};
    const SimReport r = Simulate(One(), classes, c, cheap);
    CHECK(r.consolidated == 0);
    CHECK(r.instances.size() == 2);
    CHECK(r.tasks[1].start == r.tasks[0].end + 420);
  }
  {
    // Never the other way round.
    const std::vector<JobClass> classes{MakeClass(Chain({600, 600}, 9000), {SpotThenOd(0, 0.05), Od(0)})};
    const SimReport r = Simulate(One(), classes, c, cheap);
    CHECK(r.consolidated == 0);
    CHECK(r.reused == 0);
    CHECK(r.instances.size() == 2);
    CHECK(r.tasks[1].start == r.tasks[0].end + 120);
  }
  {
    // An idle spot instance only serves requests it can honour at its bid.
    const std::vector<JobClass> low{MakeClass(Chain({600, 600}, 9000), {SpotThenOd(0, 0.03), SpotThenOd(0, 0.05)})};
    CHECK(Simulate(One(), low, c, cheap).reused == 0);
    const std::vector<JobClass> high{MakeClass(Chain({600, 600}, 9000), {SpotThenOd(0, 0.05), SpotThenOd(0, 0.03)})};
    CHECK(Simulate(One(), high, c, cheap).reused == 1);
  }
}

TEST_CASE("hit rate counts late jobs") {
  const Catalog c = Catalog::DefaultM1();
  WorkflowJob fast = Chain({600}, 1000);
  fast.class_id = "fast";
  WorkflowJob slow = Chain({1800}, 1000);
  slow.class_id = "slow";
  const std::vector<JobClass> classes{MakeClass(fast, {Od(0)}), MakeClass(slow, {Od(0)})};
  SimConfig s;
  s.job_count = 2;
  s.idle_release = IdleRelease::kImmediate;
  const SimReport r = Simulate(s, classes, c, {});
  CHECK(r.hit_rate == 0.5);
  CHECK(r.job_results[0].class_id == "fast");
  CHECK(r.job_results[1].class_id == "slow");

  const std::vector<JobClass> same{MakeClass(fast, {Od(0)})};
  s.job_count = 20;
  CHECK(Simulate(s, same, c, {}).hit_rate == 1.0);
}

TEST_CASE("mismatched plans are rejected before simulating") {
  const Catalog c = Catalog::DefaultM1();
  JobClass bad = MakeClass(Chain({600, 600}, 9000), {Od(0)});
  const std::vector<JobClass> short_plan{bad};
  try {
    Simulate(One(), short_plan, c, {});
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMismatch);
  }
  JobClass renamed = MakeClass(Chain({600}, 9000), {Od(0)});
  renamed.plan.class_id = "other";
  const std::vector<JobClass> wrong_id{renamed};
  CHECK_THROWS_AS(Simulate(One(), wrong_id, c, {}), Error);
  const std::vector<JobClass> no_trace{MakeClass(Chain({600}, 9000), {SpotThenOd(0, 0.05)})};
  CHECK_THROWS_AS(Simulate(One(), no_trace, c, {}), Error);
  SimConfig zero;
  zero.lambda = 0;
  CHECK_THROWS_AS(Simulate(zero, no_trace, c, {}), Error);
}

TEST_CASE("simulation invariants over random seeds") {
  for (const char* shape : {"stable", "spiky", "alternating"}) {
    const Planned& p = PlannedFixture(shape);
    const auto outcome = testkit::RunProperty(std::string("simulator ") + shape, 25, 61, [&](uint64_t seed) {
      SimConfig s;
      s.seed = seed;
      s.job_count = 30;
      s.lambda = 0.05 + 0.5 * UniformUnit(*std::make_unique<Rng>(seed));
      s.record_events = true;
      const SimReport a = Simulate(s, p.classes, p.catalog, p.trace);
      const SimReport b = Simulate(s, p.classes, p.catalog, p.trace);

      // Conservation.
      double sum = 0.0;
      for (const InstanceRecord& i : a.instances) sum += i.bill;
      if (sum != a.total_cost) return false;
      // Determinism.
      if (ReportJson(a, s) != ReportJson(b, s) || EventLog(a) != EventLog(b) ||
          JobTableCsv(a) != JobTableCsv(b)) {
        return false;
      }
      // Every job completes; every task has exactly one completed attempt.
      std::map<std::pair<int, int>, int> done;
      for (const TaskRecord& t : a.tasks) done[{t.job, t.task}] += t.completed ? 1 : 0;
      for (const JobResult& j : a.job_results) {
        if (j.finish < j.arrival) return false;
        const JobClass& cls = p.classes[static_cast<size_t>(j.id) % p.classes.size()];
        for (size_t t = 0; t < cls.job.size(); ++t) {
          if (done[{j.id, static_cast<int>(t)}] != 1) return false;
        }
      }
      // Precedence, checked on the event log.
      std::map<std::pair<std::string, std::string>, int64_t> finished;
      for (const LogEvent& e : ParseLog(EventLog(a))) {
        if (e.kind == "TaskFinish") finished[{e.kv.at("job"), e.kv.at("task")}] = e.t;
        if (e.kind != "TaskStart") continue;
        const int job = std::stoi(e.kv.at("job"));
        const WorkflowJob& w = p.classes[static_cast<size_t>(job) % p.classes.size()].job;
        for (const Task& t : w.tasks) {
          if (t.name != e.kv.at("task")) continue;
          for (TaskId pred : t.predecessors) {
            auto it = finished.find({e.kv.at("job"), w.tasks[static_cast<size_t>(pred)].name});
            if (it == finished.end() || it->second > e.t) return false;
          }
        }
      }
      // No instance runs two tasks at once, and work stays inside its life.
      std::map<int, std::vector<const TaskRecord*>> by_inst;
      for (const TaskRecord& t : a.tasks) by_inst[t.instance].push_back(&t);
      for (const auto& [id, list] : by_inst) {
        const InstanceRecord& inst = a.instances[static_cast<size_t>(id)];
        for (size_t k = 0; k < list.size(); ++k) {
          if (list[k]->start < inst.start || list[k]->end > inst.end) return false;
          if (k > 0 && list[k]->start < list[k - 1]->end) return false;
        }
        if (inst.spot && inst.termination == Termination::kOutOfBid &&
            inst.hours != static_cast<double>((inst.end - inst.start) / 3600)) {
          return false;
        }
      }
      return a.hit_rate >= 0.0 && a.hit_rate <= 1.0;
    });
    INFO(outcome.name << " first failure seed " << (outcome.first_failure ? *outcome.first_failure : 0));
    CHECK(outcome.failures == 0);
  }
}

TEST_CASE("cyclic replay wraps the trace") {
  const PriceSeries s({{0, 1.0}, {100, 2.0}, {200, 3.0}});
  const CyclicPrice p(&s, 150);
  CHECK(p.At(0) == 2.0);
  CHECK(p.At(50) == 1.0);  // wrapped to the start
  CHECK(p.NextAbove(0, 1.5) == int64_t{0});
  CHECK(p.NextAbove(60, 1.5) == int64_t{150});
  CHECK_FALSE(p.NextAbove(0, 3.5));
}

TEST_CASE("report formats") {
  const Catalog c = Catalog::DefaultM1();
  const std::vector<JobClass> classes{MakeClass(Chain({1800}, 3600), {Od(0)})};
  SimConfig s = One();
  s.record_events = true;
  const SimReport r = Simulate(s, classes, c, {});
  const std::string json = ReportJson(r, s);
  CHECK(json.find("\"hit_rate\": 1.0") != std::string::npos);
  CHECK(json.find("\"m1.small/ondemand\": 1.0") != std::string::npos);
  const std::string csv = JobTableCsv(r);
  CHECK(csv.rfind("job,class,arrival,finish,makespan,deadline,hit,restarts\n", 0) == 0);
  CHECK(csv.find("0,chain,0,1920,1920,3600,1,0") != std::string::npos);
  const std::string log = EventLog(r);
  CHECK(log.find("t=0 JobArrival job=0 class=chain") != std::string::npos);
  CHECK(log.find("t=120 TaskStart job=0 task=t0 attempt=0 inst=0") != std::string::npos);
  CHECK(log.find("t=3720 InstanceRelease inst=0") != std::string::npos);
}
