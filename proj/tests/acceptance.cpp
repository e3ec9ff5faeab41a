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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Criterion numbers given on the command line select a
// subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "spotflow/error.hpp"
#include "spotflow/planner.hpp"
#include "spotflow/planner_hybrid.hpp"
#include "spotflow/simulator.hpp"
#include "testkit.hpp"

using namespace spotflow;

namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string summary;
};

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void Note(const std::string& s) { std::printf("    %s\n", s.c_str()); }

Catalog LoadCatalogFile(const std::string& rel) { return LoadCatalog(testkit::DataPath(rel)); }

SpotPriceTrace LoadTraces(const std::string& shape, const Catalog& c) {
  return SpotPriceTrace::LoadDir(testkit::DataPath("traces/" + shape), c);
}

struct FailureSlots {
  std::vector<std::unique_ptr<FailureModel>> models;
  std::vector<const FailureModel*> slots;

  FailureSlots(const Catalog& c, const SpotPriceTrace& trace) : slots(c.size(), nullptr) {
    for (const InstanceType& t : c.types()) {
      if (const PriceSeries* s = trace.Find(t.name)) {
        models.push_back(std::make_unique<FailureModel>(s, FfpParams{}));
        slots[static_cast<size_t>(t.id)] = models.back().get();
      }
    }
  }
};

JobClass PlanClass(const WorkflowJob& job, const Catalog& c, const SpotPriceTrace& trace,
                   const PlannerOptions& opt) {
  JobClass cls;
  cls.job = ResolveJobTargets(job, c, opt);
  cls.plan = PlanWorkflow(job, c, trace, opt);
  return cls;
}

std::vector<WorkflowJob> FixtureWorkflows() {
  return {LoadWorkflow(testkit::DataPath("workflows/montage_3.wf")),
          LoadWorkflow(testkit::DataPath("workflows/ligo_1.wf")),
          LoadWorkflow(testkit::DataPath("workflows/epigenomics_2.wf"))};
}

// 1. Search against exhaustive enumeration.
Verdict AStarEquivalence() {
  const auto fixtures = testkit::MakeAStarFixtures(60, 20261014);
  int matched = 0, compared = 0, infeasible = 0;
  const auto t0 = Clock::now();
  for (const testkit::AStarFixture& f : fixtures) {
    const TaskTimeTable table(f.job, f.catalog, 2000, 20261014);
    const WorkflowComposer comp(f.job, 2000, 20261014);
    const auto oracle = testkit::BruteForcePlan(f.job, table, comp);
    if (!oracle) {
      ++infeasible;
      continue;
    }
    ++compared;
    const AStarResult r = AStarConfigure(f.job, table, comp);
    if (testkit::OraclePlanCost(table, r.plan) == oracle->cost) {
      ++matched;
    } else {
      Note(Fmt("%s: search %.9f brute force %.9f", f.job.class_id.c_str(),
               testkit::OraclePlanCost(table, r.plan), oracle->cost));
    }
  }
  const double secs = Since(t0);
  return {compared >= 50 && matched == compared && secs < 10.0,
          Fmt("%d/%d fixtures match brute force (%d infeasible), %.2f s", matched, compared,
              infeasible, secs)};
}

// 2. Achieved hit rate against the requested guarantee.
Verdict HitRateAccuracy() {
  const Catalog c = LoadCatalogFile("catalog_nolag.csv");
  const SpotPriceTrace trace = LoadTraces("stable", c);
  const WorkflowJob job = LoadWorkflow(testkit::DataPath("workflows/montage_3.wf"));
  bool pass = true;
  double slowest = 0.0;
  int settings = 0, ok = 0;
  for (PlannerKind kind : {PlannerKind::kDynaNs, PlannerKind::kSpotOnly, PlannerKind::kDyna}) {
    std::string row;
    for (double p : {0.90, 0.92, 0.94, 0.96, 0.98}) {
      const auto t0 = Clock::now();
      PlannerOptions opt;
      opt.kind = kind;
      opt.guarantee = p;
      const std::vector<JobClass> classes{PlanClass(job, c, trace, opt)};
      SimConfig sim;
      sim.job_count = 1000;
      sim.seed = 7;
      const SimReport r = Simulate(sim, classes, c, trace);
      slowest = std::max(slowest, Since(t0));
      const bool good = r.hit_rate >= p && r.hit_rate <= p + 0.07;
      ++settings;
      ok += good ? 1 : 0;
      pass = pass && good;
      row += Fmt(" p=%.2f:%.3f%s", p, r.hit_rate, good ? "" : "!");
    }
    Note(std::string(PlannerKindName(kind)) + row);
  }
  return {pass && slowest < 120.0,
          Fmt("%d/%d settings within [p, p+0.07], slowest setting %.1f s", ok, settings, slowest)};
}

// 3. Every refined task dominates on-demand and costs no more.
Verdict RefinementSoundness() {
  const Catalog c = Catalog::DefaultM1();
  int refined = 0, violations = 0;
  for (const char* shape : {"stable", "spiky", "alternating"}) {
    const SpotPriceTrace trace = LoadTraces(shape, c);
    const FailureSlots failure(c, trace);
    for (WorkflowJob job : FixtureWorkflows()) {
      job.guarantee_p = 0.9;
      const TaskTimeTable table(job, c, kDefaultSampleCount, 11);
      const HybridRefiner refiner(table, failure.slots, RefineParams{}, 11);
      for (size_t t = 0; t < job.size(); ++t) {
        const auto task = static_cast<TaskId>(t);
        for (const InstanceType& od : c.types()) {
          const HybridConfig cfg = refiner.RefineTask(task, od.id);
          if (!cfg.has_spot()) continue;
          ++refined;
          const auto hybrid = refiner.TimeDistribution(task, cfg);
          const auto& ondemand = table.Planning(task, od.id);
          const double gap = testkit::OracleDominanceGap(
              {hybrid.samples().begin(), hybrid.samples().end()},
              {ondemand.samples().begin(), ondemand.samples().end()});
          double mean = 0.0;
          for (double x : ondemand.samples()) mean += x;
          mean /= static_cast<double>(ondemand.size());
          const double od_cost = od.ondemand_price * mean / 3600.0;
          if (gap > 0.01 || refiner.Cost(task, cfg).total > od_cost) {
            ++violations;
            Note(Fmt("%s %s task %zu od %s: gap %.4f cost %.5f vs %.5f", shape,
                     job.class_id.c_str(), t, od.name.c_str(), gap,
                     refiner.Cost(task, cfg).total, od_cost));
          }
        }
      }
    }
  }
  return {refined > 0 && violations == 0,
          Fmt("%d refined configurations, %d violations", refined, violations)};
}

// 4. Simulated cost ordering of the three planners.
Verdict CostSavings() {
  const Catalog c = Catalog::DefaultM1();
  bool pass = true;
  std::string summary;
  for (const char* shape : {"stable", "spiky"}) {
    const SpotPriceTrace trace = LoadTraces(shape, c);
    double cost[3] = {0, 0, 0};
    const PlannerKind kinds[3] = {PlannerKind::kDynaNs, PlannerKind::kSpotOnly, PlannerKind::kDyna};
    for (int k = 0; k < 3; ++k) {
      PlannerOptions opt;
      opt.kind = kinds[k];
      opt.guarantee = 0.9;
      std::vector<JobClass> classes;
      for (const WorkflowJob& w : FixtureWorkflows()) classes.push_back(PlanClass(w, c, trace, opt));
      SimConfig sim;
      sim.job_count = 1000;
      sim.seed = 5;
      const SimReport r = Simulate(sim, classes, c, trace);
      cost[k] = r.avg_cost;
      Note(Fmt("%s %-9s avg cost %.4f hit %.3f out-of-bid %zu", shape,
               std::string(PlannerKindName(kinds[k])).c_str(), r.avg_cost, r.hit_rate,
               r.out_of_bid));
    }
    const double dyna_ns = cost[0], spot_only = cost[1], dyna = cost[2];
    if (std::string(shape) == "stable") {
      const double savings = 1.0 - dyna / dyna_ns;
      const double spread = std::fabs(spot_only - dyna) / dyna;
      const bool a = dyna <= dyna_ns && savings >= 0.05;
      const bool b = spread <= 0.10;
      Note(Fmt("stable: Dyna saves %.1f%% vs DynaNS [%s]; SpotOnly differs from Dyna by %.1f%% [%s]",
               100 * savings, a ? "ok" : "FAIL", 100 * spread, b ? "ok" : "FAIL"));
      pass = pass && a && b;
      summary += Fmt("stable savings %.1f%%, SpotOnly/Dyna spread %.1f%%; ", 100 * savings, 100 * spread);
    } else {
      const bool a = spot_only > dyna;
      Note(Fmt("spiky: SpotOnly %.4f vs Dyna %.4f [%s]", spot_only, dyna, a ? "ok" : "FAIL"));
      pass = pass && a;
      summary += Fmt("spiky SpotOnly %.4f vs Dyna %.4f", spot_only, dyna);
    }
  }
  return {pass, summary};
}

// 5. Distribution arithmetic properties.
Verdict DistributionArithmetic() {
  bool pass = true;
  int total = 0;
  for (const testkit::PropertyOutcome& o : testkit::DistributionProperties(1000, 20261014)) {
    Note(Fmt("%-32s %d cases, %d failures, base seed %llu", o.name.c_str(), o.cases, o.failures,
             static_cast<unsigned long long>(o.base_seed)));
    if (o.first_failure) {
      Note(Fmt("  first failing seed %llu", static_cast<unsigned long long>(*o.first_failure)));
    }
    pass = pass && o.failures == 0 && o.cases >= 1000;
    ++total;
  }
  const EmpiricalDistribution sum = Convolve(FromNormal(10, 2, 10000, 1), FromNormal(20, 3, 10000, 2), 3);
  const double sd = std::sqrt(13.0);
  const bool mean_ok = std::fabs(sum.Mean() - 30.0) <= 0.3;
  const bool sd_ok = std::fabs(sum.Stddev() - sd) <= 0.05 * sd;
  Note(Fmt("Normal(10,2)+Normal(20,3): mean %.4f, std %.4f (analytic 30, %.4f)", sum.Mean(),
           sum.Stddev(), sd));
  return {pass && mean_ok && sd_ok,
          Fmt("%d properties x 1000 cases; normal sum %s", total, mean_ok && sd_ok ? "ok" : "off")};
}

// 6. Failure-time estimates against exhaustive start offsets.
Verdict FfpCorrectness() {
  const Catalog c = Catalog::DefaultM1();
  const SpotPriceTrace trace = LoadTraces("alternating", c);
  double worst = 0.0;
  int points = 0;
  for (const InstanceType& type : c.types()) {
    const PriceSeries* series = trace.Find(type.name);
    if (series == nullptr) continue;
    for (double f : {0.75, 1.0, 1.25}) {
      const double bid = f * type.ondemand_price;
      FfpParams params;
      params.step = 60;
      params.horizon = 7200;
      const FirstFailureDistribution est = EstimateFfp(*series, params, bid);
      const std::vector<double> exact =
          testkit::ExhaustiveCumulativeFailure(*series, bid, params.step, params.horizon);
      for (size_t k = 1; k < exact.size(); ++k) {
        const double d = std::fabs(est.CumulativeFailure(static_cast<double>(k) * 60.0) - exact[k]);
        worst = std::max(worst, d);
        ++points;
      }
    }
  }
  int monotone = 0;
  const PriceSeries* small = trace.Find("m1.small");
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    double b1 = 0.02 + 0.1 * UniformUnit(rng);
    double b2 = 0.02 + 0.1 * UniformUnit(rng);
    if (b1 > b2) std::swap(b1, b2);
    FfpParams params;
    params.seed = DeriveSeed(99, static_cast<uint64_t>(i));
    params.horizon = 7200;
    const FirstFailureDistribution lo = EstimateFfp(*small, params, b1);
    const FirstFailureDistribution hi = EstimateFfp(*small, params, b2);
    bool ok = true;
    for (int64_t t = 60; t <= 7200; t += 60) {
      ok = ok && hi.CumulativeFailure(static_cast<double>(t)) <= lo.CumulativeFailure(static_cast<double>(t));
    }
    monotone += ok ? 1 : 0;
  }
  return {worst <= 0.02 && monotone == 100,
          Fmt("max deviation %.4f over %d grid points; %d/100 bid pairs monotone", worst, points,
              monotone)};
}

// 7. Billing conservation, determinism and hour rounding.
Verdict BillingAndDeterminism() {
  const Catalog c = Catalog::DefaultM1();
  bool conserved = true, identical = true;
  size_t oob = 0;
  for (const char* shape : {"stable", "spiky", "alternating"}) {
    const SpotPriceTrace trace = LoadTraces(shape, c);
    PlannerOptions opt;
    opt.guarantee = 0.9;
    opt.samples = 2000;
    std::vector<JobClass> classes;
    for (const WorkflowJob& w : FixtureWorkflows()) classes.push_back(PlanClass(w, c, trace, opt));
    for (uint64_t seed : {1, 2, 3}) {
      SimConfig sim;
      sim.job_count = 200;
      sim.seed = seed;
      sim.record_events = true;
      const SimReport a = Simulate(sim, classes, c, trace);
      const SimReport b = Simulate(sim, classes, c, trace);
      double sum = 0.0;
      for (const InstanceRecord& i : a.instances) sum += i.bill;
      conserved = conserved && sum == a.total_cost;
      identical = identical && ReportJson(a, sim) == ReportJson(b, sim) &&
                  EventLog(a) == EventLog(b) && JobTableCsv(a) == JobTableCsv(b);
      oob += a.out_of_bid;
    }
  }
  WorkflowJob one;
  one.class_id = "one";
  one.deadline = 1e6;
  one.AddTask("t", TaskProfile{61 * 60 * 1e9, 0, 0, 0, 0});
  JobClass cls;
  cls.plan.class_id = "one";
  cls.plan.deadline = one.deadline;
  cls.plan.task_names = {"t"};
  cls.plan.configs = {HybridConfig::OnDemand(0, c.at(0).ondemand_price)};
  cls.job = one;
  SimConfig sim;
  sim.job_count = 1;
  const SimReport r = Simulate(sim, std::vector<JobClass>{cls}, c, {});
  const bool hours = r.instances.size() == 1 && r.instances[0].hours == 2 &&
                     r.total_cost == 2 * c.at(0).ondemand_price;
  return {conserved && identical && hours,
          Fmt("conservation %s, reports identical %s (%zu out-of-bid events seen), "
              "61-minute task billed %.0f h",
              conserved ? "exact" : "BROKEN", identical ? "yes" : "NO", oob,
              r.instances.empty() ? 0.0 : r.instances[0].hours)};
}

// 8. Planning time for a workflow of about a hundred tasks.
Verdict PlanningOverhead() {
  const Catalog c = Catalog::DefaultM1();
  const SpotPriceTrace trace = LoadTraces("stable", c);
  const WorkflowJob job = LoadWorkflow(testkit::DataPath("workflows/montage_32.wf"));
  PlannerOptions opt;
  opt.guarantee = 0.9;
  const auto t0 = Clock::now();
  const WorkflowPlan plan = PlanWorkflow(job, c, trace, opt);
  const double secs = Since(t0);
  return {job.size() >= 100 && secs < 60.0,
          Fmt("%zu tasks planned in %.2f s (%d iterations, %zu refined)", job.size(), secs,
              plan.iterations, plan.refined_tasks)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"A* equals brute force", AStarEquivalence},
      {"deadline hit rate accuracy", HitRateAccuracy},
      {"hybrid refinement soundness", RefinementSoundness},
      {"directional cost savings", CostSavings},
      {"distribution arithmetic", DistributionArithmetic},
      {"ffp correctness", FfpCorrectness},
      {"billing conservation and determinism", BillingAndDeterminism},
      {"planning overhead", PlanningOverhead},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s  %s [%.1f s]\n", n, v.pass ? "PASS" : "FAIL",
                criteria[i].first, v.summary.c_str(), Since(t0));
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
