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

// spotflow command-line tool.
//
//   spotflow plan      --spec exp.json            -> <out>/plans.json
//   spotflow simulate  --spec exp.json [--events] -> <out>/report.json, jobs.csv
//   spotflow run       plan + simulate
//   spotflow sweep     --guarantees 0.9,0.96      -> <out>/p0.90/...
//   spotflow ffp       --type m1.small --bid 0.05
//   spotflow generate  workflow | traces | catalog
//
// Exit codes: 0 ok, 1 usage or invalid argument, 2 parse error,
// 3 infeasible workflow, 4 plan/class mismatch, 5 i/o, 6 internal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spotflow/spotflow.h"

namespace {

class CliError {
 public:
  explicit CliError(sf_status status) : status_(status) {}
  sf_status status() const { return status_; }

 private:
  sf_status status_;
};

void Check(sf_status s) {
  if (s != SF_OK) throw CliError(s);
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { sf_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct ExperimentDeleter {
  void operator()(sf_experiment* e) const { sf_experiment_free(e); }
};
struct PlanCacheDeleter {
  void operator()(sf_plan_cache* c) const { sf_plan_cache_free(c); }
};
struct ReportDeleter {
  void operator()(sf_report* r) const { sf_report_free(r); }
};
using Experiment = std::unique_ptr<sf_experiment, ExperimentDeleter>;
using PlanCache = std::unique_ptr<sf_plan_cache, PlanCacheDeleter>;
using Report = std::unique_ptr<sf_report, ReportDeleter>;

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    throw CliError(SF_ERR_IO);
  }
}

// Flags shared by plan/simulate/run/sweep/ffp. Values left unset keep the
// spec file (or built-in default) value.
struct ExperimentFlags {
  std::string spec;
  std::map<std::string, std::string> values;
  std::vector<std::string> workflows;
};

void AddExperimentFlags(CLI::App* app, ExperimentFlags& f) {
  app->add_option("--spec", f.spec, "experiment spec (JSON)");
  auto value = [&](const char* name, const char* help) {
    const std::string key = std::string(name).substr(2);
    app->add_option_function<std::string>(
        name, [&f, key](const std::string& v) { f.values[key] = v; }, help);
  };
  value("--catalog", "instance catalog CSV");
  value("--trace-dir", "directory of <type>.csv spot price traces");
  app->add_option("--workflow", f.workflows,
                  "workflow file, optionally path:weight (repeatable)");
  value("--guarantee", "probabilistic deadline guarantee p in (0,1)");
  value("--deadline-factor", "deadline = Dmin + factor * (Dmax - Dmin)");
  value("--deadline", "explicit deadline in seconds");
  value("--lambda", "job arrivals per minute");
  value("--jobs", "number of jobs to simulate");
  value("--seed", "random seed");
  value("--planner", "dyna | dyna-ns | spot-only");
  value("--out", "output directory");
  value("--samples", "samples per distribution");
  value("--max-iter", "A* iteration budget");
  value("--account-for-lag", "include on-demand acquisition lag when planning");
  value("--idle-release", "hour-boundary | immediate");
}

Experiment MakeExperiment(const ExperimentFlags& f) {
  sf_experiment* raw = nullptr;
  Check(f.spec.empty() ? sf_experiment_create(&raw) : sf_experiment_load(f.spec.c_str(), &raw));
  Experiment exp(raw);
  for (const auto& [key, v] : f.values) Check(sf_experiment_set(exp.get(), key.c_str(), v.c_str()));
  if (!f.workflows.empty()) {
    std::string joined;
    for (const auto& w : f.workflows) {
      if (!joined.empty()) joined += ',';
      joined += w;
    }
    Check(sf_experiment_set(exp.get(), "workflows", joined.c_str()));
  }
  return exp;
}

std::string OutDir(const sf_experiment* exp) {
  OwnedString out;
  Check(sf_experiment_get(exp, "out", &out.p));
  return out.str();
}

PlanCache RunPlan(const sf_experiment* exp, const std::filesystem::path& out, bool quiet) {
  sf_plan_cache* raw = nullptr;
  double seconds = 0.0;
  Check(sf_plan(exp, &raw, &seconds));
  PlanCache cache(raw);
  std::filesystem::create_directories(out);
  Check(sf_plan_cache_save(cache.get(), (out / "plans.json").string().c_str()));
  OwnedString summary;
  Check(sf_plan_cache_summary(cache.get(), &summary.p));
  WriteFile(out / "plan_summary.csv", summary.str());
  if (!quiet) std::cout << summary.str();
  std::printf("planning_seconds=%.3f\n", seconds);
  std::printf("plans=%s\n", (out / "plans.json").string().c_str());
  return cache;
}

void RunSimulate(const sf_experiment* exp, const sf_plan_cache* cache,
                 const std::filesystem::path& out, bool events) {
  sf_report* raw = nullptr;
  Check(sf_simulate(exp, cache, events ? 1 : 0, &raw));
  Report report(raw);
  OwnedString json, jobs;
  Check(sf_report_json(report.get(), &json.p));
  Check(sf_report_jobs_csv(report.get(), &jobs.p));
  WriteFile(out / "report.json", json.str());
  WriteFile(out / "jobs.csv", jobs.str());
  if (events) {
    OwnedString log;
    Check(sf_report_events(report.get(), &log.p));
    WriteFile(out / "events.log", log.str());
  }
  sf_metrics m{};
  Check(sf_report_metrics(report.get(), &m));
  std::printf("jobs=%lld avg_cost=%.6f avg_time=%.1f hit_rate=%.4f out_of_bid=%lld\n",
              static_cast<long long>(m.jobs), m.avg_cost, m.avg_time, m.hit_rate,
              static_cast<long long>(m.out_of_bid));
  std::printf("report=%s\n", (out / "report.json").string().c_str());
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spotflow: deadline-aware workflow planning on spot and on-demand instances"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sf_version()));

  ExperimentFlags plan_flags, sim_flags, run_flags, sweep_flags, ffp_flags;

  CLI::App* plan = app.add_subcommand("plan", "plan every workflow class into a plan cache");
  AddExperimentFlags(plan, plan_flags);
  bool plan_quiet = false;
  plan->add_flag("--quiet", plan_quiet, "do not print the plan summary");

  CLI::App* sim = app.add_subcommand("simulate", "simulate jobs against a plan cache");
  AddExperimentFlags(sim, sim_flags);
  std::string plans_path;
  bool sim_events = false;
  sim->add_option("--plans", plans_path, "plan cache (default <out>/plans.json)");
  sim->add_flag("--events", sim_events, "also write <out>/events.log");

  CLI::App* run = app.add_subcommand("run", "plan, then simulate");
  AddExperimentFlags(run, run_flags);
  bool run_events = false;
  run->add_flag("--events", run_events, "also write <out>/events.log");

  CLI::App* sweep = app.add_subcommand("sweep", "plan and simulate for several guarantees");
  AddExperimentFlags(sweep, sweep_flags);
  std::string guarantees = "0.90,0.92,0.94,0.96,0.98,0.999";
  sweep->add_option("--guarantees", guarantees, "comma-separated list of p");

  CLI::App* ffp = app.add_subcommand("ffp", "cumulative failure probability table");
  AddExperimentFlags(ffp, ffp_flags);
  std::string ffp_type;
  double ffp_bid = 0.0;
  int64_t ffp_step = 300;
  int64_t ffp_horizon = 86400;
  std::string ffp_file;
  ffp->add_option("--type", ffp_type, "instance type name")->required();
  ffp->add_option("--bid", ffp_bid, "bid price per hour")->required();
  ffp->add_option("--step", ffp_step, "grid step in seconds");
  ffp->add_option("--horizon", ffp_horizon, "horizon in seconds");
  ffp->add_option("-o,--output", ffp_file, "write the table here instead of stdout");

  CLI::App* gen = app.add_subcommand("generate", "write fixture inputs");
  gen->require_subcommand(1);
  CLI::App* gen_wf = gen->add_subcommand("workflow", "synthetic workflow");
  std::string family = "montage";
  int size = 4;
  uint64_t gen_seed = 1;
  std::string gen_file;
  gen_wf->add_option("--family", family, "montage | ligo | epigenomics");
  gen_wf->add_option("--size", size, "projections, groups or lanes");
  gen_wf->add_option("--seed", gen_seed, "random seed");
  gen_wf->add_option("-o,--output", gen_file, "output file (default stdout)");
  CLI::App* gen_tr = gen->add_subcommand("traces", "synthetic spot price traces");
  std::string shape = "stable";
  std::string tr_catalog;
  std::string tr_dir;
  double days = 30;
  uint64_t tr_seed = 1;
  gen_tr->add_option("--shape", shape, "stable | spiky | alternating");
  gen_tr->add_option("--catalog", tr_catalog, "catalog CSV (default built-in)");
  gen_tr->add_option("--dir", tr_dir, "output directory")->required();
  gen_tr->add_option("--days", days, "trace length in days");
  gen_tr->add_option("--seed", tr_seed, "random seed");
  CLI::App* gen_cat = gen->add_subcommand("catalog", "built-in instance catalog");
  bool zero_lag = false;
  std::string cat_file;
  gen_cat->add_flag("--zero-lag", zero_lag, "clear acquisition lags");
  gen_cat->add_option("-o,--output", cat_file, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (plan->parsed()) {
      Experiment exp = MakeExperiment(plan_flags);
      RunPlan(exp.get(), OutDir(exp.get()), plan_quiet);
    } else if (sim->parsed()) {
      Experiment exp = MakeExperiment(sim_flags);
      const std::filesystem::path out = OutDir(exp.get());
      const std::string path = plans_path.empty() ? (out / "plans.json").string() : plans_path;
      sf_plan_cache* raw = nullptr;
      Check(sf_plan_cache_load(exp.get(), path.c_str(), &raw));
      PlanCache cache(raw);
      RunSimulate(exp.get(), cache.get(), out, sim_events);
    } else if (run->parsed()) {
      Experiment exp = MakeExperiment(run_flags);
      const std::filesystem::path out = OutDir(exp.get());
      PlanCache cache = RunPlan(exp.get(), out, true);
      RunSimulate(exp.get(), cache.get(), out, run_events);
    } else if (sweep->parsed()) {
      Experiment exp = MakeExperiment(sweep_flags);
      const std::filesystem::path base = OutDir(exp.get());
      for (const std::string& p : SplitList(guarantees)) {
        Check(sf_experiment_set(exp.get(), "guarantee", p.c_str()));
        const std::filesystem::path out = base / ("p" + p);
        std::printf("guarantee=%s\n", p.c_str());
        PlanCache cache = RunPlan(exp.get(), out, true);
        RunSimulate(exp.get(), cache.get(), out, false);
      }
    } else if (ffp->parsed()) {
      Experiment exp = MakeExperiment(ffp_flags);
      OwnedString table;
      Check(sf_ffp_table(exp.get(), ffp_type.c_str(), ffp_bid, ffp_step, ffp_horizon, &table.p));
      if (ffp_file.empty()) {
        std::cout << table.str();
      } else {
        WriteFile(ffp_file, table.str());
      }
    } else if (gen_wf->parsed()) {
      OwnedString text;
      Check(sf_generate_workflow(family.c_str(), size, gen_seed, &text.p));
      if (gen_file.empty()) {
        std::cout << text.str();
      } else {
        WriteFile(gen_file, text.str());
      }
    } else if (gen_tr->parsed()) {
      Check(sf_generate_traces(shape.c_str(), tr_catalog.c_str(),
                               static_cast<int64_t>(days * 86400.0), tr_seed, tr_dir.c_str()));
    } else if (gen_cat->parsed()) {
      OwnedString text;
      Check(sf_generate_catalog(zero_lag ? 1 : 0, &text.p));
      if (cat_file.empty()) {
        std::cout << text.str();
      } else {
        WriteFile(cat_file, text.str());
      }
    }
  } catch (const CliError& e) {
    const char* msg = sf_last_error();
    std::cerr << "error (" << sf_status_name(e.status()) << "): " << (*msg ? msg : "failed")
              << "\n";
    return static_cast<int>(e.status());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(SF_ERR_INTERNAL);
  }
  return 0;
}
