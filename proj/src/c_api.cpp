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

#include "spotflow/spotflow.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "json.hpp"
#include "spotflow/error.hpp"
#include "spotflow/experiment.hpp"

struct sf_experiment {
  spotflow::ExperimentSpec spec;
};

struct sf_plan_cache {
  spotflow::Catalog catalog;
  spotflow::PlanCache plans;
};

struct sf_report {
  spotflow::SimConfig config;
  spotflow::SimReport report;
};

namespace {

thread_local std::string g_last_error;

sf_status MapCode(spotflow::ErrorCode code) {
  switch (code) {
    case spotflow::ErrorCode::kInvalidArgument: return SF_ERR_INVALID_ARGUMENT;
    case spotflow::ErrorCode::kParse: return SF_ERR_PARSE;
    case spotflow::ErrorCode::kIo: return SF_ERR_IO;
    case spotflow::ErrorCode::kInfeasible: return SF_ERR_INFEASIBLE;
    case spotflow::ErrorCode::kMismatch: return SF_ERR_MISMATCH;
    case spotflow::ErrorCode::kInternal: return SF_ERR_INTERNAL;
  }
  return SF_ERR_INTERNAL;
}

template <typename F>
sf_status Guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return SF_OK;
  } catch (const spotflow::Error& e) {
    g_last_error = e.what();
    return MapCode(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SF_ERR_INTERNAL;
  }
}

sf_status Fail(sf_status status, const char* message) {
  g_last_error = message;
  return status;
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

spotflow::Catalog CatalogOf(const spotflow::ExperimentSpec& spec) {
  return spec.catalog.empty() ? spotflow::Catalog::DefaultM1()
                              : spotflow::LoadCatalog(spec.catalog);
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "0.1.0"; }

const char* sf_status_name(sf_status status) {
  switch (status) {
    case SF_OK: return "ok";
    case SF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SF_ERR_PARSE: return "parse error";
    case SF_ERR_INFEASIBLE: return "infeasible";
    case SF_ERR_MISMATCH: return "mismatch";
    case SF_ERR_IO: return "i/o error";
    case SF_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* sf_last_error(void) { return g_last_error.c_str(); }

void sf_string_free(char* s) { std::free(s); }

sf_status sf_experiment_create(sf_experiment** out) {
  if (out == nullptr) return Fail(SF_ERR_INVALID_ARGUMENT, "out is null");
  return Guard([&] { *out = new sf_experiment(); });
}

sf_status sf_experiment_load(const char* path, sf_experiment** out) {
  if (path == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "path and out are required");
  }
  return Guard([&] {
    auto* exp = new sf_experiment{spotflow::ExperimentSpec::Load(path)};
    *out = exp;
  });
}

sf_status sf_experiment_set(sf_experiment* exp, const char* key, const char* value) {
  if (exp == nullptr || key == nullptr || value == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "experiment, key and value are required");
  }
  return Guard([&] { exp->spec.Set(key, value); });
}

sf_status sf_experiment_json(const sf_experiment* exp, char** out) {
  if (exp == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "experiment and out are required");
  }
  return Guard([&] { *out = Dup(exp->spec.ToJson()); });
}

sf_status sf_experiment_get(const sf_experiment* exp, const char* key, char** out) {
  if (exp == nullptr || key == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "experiment, key and out are required");
  }
  return Guard([&] {
    const nlohmann::json j = nlohmann::json::parse(exp->spec.ToJson());
    auto it = j.find(key);
    if (it == j.end()) throw spotflow::InvalidArgument(std::string("unknown setting: ") + key);
    *out = Dup(it->is_string() ? it->get<std::string>() : it->dump());
  });
}

void sf_experiment_free(sf_experiment* exp) { delete exp; }

sf_status sf_plan(const sf_experiment* exp, sf_plan_cache** out, double* planning_seconds) {
  if (exp == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "experiment and out are required");
  }
  return Guard([&] {
    exp->spec.Validate();
    const auto start = std::chrono::steady_clock::now();
    spotflow::ExperimentInputs inputs = spotflow::LoadInputs(exp->spec);
    spotflow::PlanCache plans = spotflow::PlanAll(exp->spec, inputs);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    if (planning_seconds != nullptr) *planning_seconds = took.count();
    *out = new sf_plan_cache{std::move(inputs.catalog), std::move(plans)};
  });
}

sf_status sf_plan_cache_load(const sf_experiment* exp, const char* path, sf_plan_cache** out) {
  if (exp == nullptr || path == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "experiment, path and out are required");
  }
  return Guard([&] {
    spotflow::Catalog catalog = CatalogOf(exp->spec);
    spotflow::PlanCache plans = spotflow::PlanCache::Load(path, catalog);
    *out = new sf_plan_cache{std::move(catalog), std::move(plans)};
  });
}

sf_status sf_plan_cache_save(const sf_plan_cache* cache, const char* path) {
  if (cache == nullptr || path == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "cache and path are required");
  }
  return Guard([&] { cache->plans.Save(path, cache->catalog); });
}

sf_status sf_plan_cache_json(const sf_plan_cache* cache, char** out) {
  if (cache == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "cache and out are required");
  }
  return Guard([&] { *out = Dup(cache->plans.ToJson(cache->catalog)); });
}

sf_status sf_plan_cache_summary(const sf_plan_cache* cache, char** out) {
  if (cache == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "cache and out are required");
  }
  return Guard([&] { *out = Dup(spotflow::PlanSummaryCsv(cache->plans, cache->catalog)); });
}

void sf_plan_cache_free(sf_plan_cache* cache) { delete cache; }

sf_status sf_simulate(const sf_experiment* exp, const sf_plan_cache* cache, int record_events,
                      sf_report** out) {
  if (exp == nullptr || cache == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "experiment, cache and out are required");
  }
  return Guard([&] {
    exp->spec.Validate();
    const spotflow::ExperimentInputs inputs = spotflow::LoadInputs(exp->spec);
    const std::vector<spotflow::JobClass> classes =
        spotflow::BindClasses(exp->spec, inputs, cache->plans);
    spotflow::SimConfig config = exp->spec.Simulation();
    config.record_events = record_events != 0;
    spotflow::SimReport report =
        spotflow::Simulate(config, classes, inputs.catalog, inputs.trace);
    *out = new sf_report{config, std::move(report)};
  });
}

sf_status sf_report_json(const sf_report* report, char** out) {
  if (report == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "report and out are required");
  }
  return Guard([&] { *out = Dup(spotflow::ReportJson(report->report, report->config)); });
}

sf_status sf_report_jobs_csv(const sf_report* report, char** out) {
  if (report == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "report and out are required");
  }
  return Guard([&] { *out = Dup(spotflow::JobTableCsv(report->report)); });
}

sf_status sf_report_events(const sf_report* report, char** out) {
  if (report == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "report and out are required");
  }
  return Guard([&] { *out = Dup(spotflow::EventLog(report->report)); });
}

sf_status sf_report_metrics(const sf_report* report, sf_metrics* out) {
  if (report == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "report and out are required");
  }
  const spotflow::SimReport& r = report->report;
  out->jobs = static_cast<int64_t>(r.jobs);
  out->total_cost = r.total_cost;
  out->avg_cost = r.avg_cost;
  out->avg_time = r.avg_time;
  out->hit_rate = r.hit_rate;
  out->out_of_bid = static_cast<int64_t>(r.out_of_bid);
  out->reused = static_cast<int64_t>(r.reused);
  out->consolidated = static_cast<int64_t>(r.consolidated);
  g_last_error.clear();
  return SF_OK;
}

void sf_report_free(sf_report* report) { delete report; }

sf_status sf_ffp_table(const sf_experiment* exp, const char* type_name, double bid,
                       int64_t step, int64_t horizon, char** out) {
  if (exp == nullptr || type_name == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "experiment, type and out are required");
  }
  if (step <= 0 || horizon < step) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "need step > 0 and horizon >= step");
  }
  return Guard([&] {
    const spotflow::Catalog catalog = CatalogOf(exp->spec);
    if (!catalog.Find(type_name)) {
      throw spotflow::Error(spotflow::ErrorCode::kMismatch,
                            std::string("unknown instance type: ") + type_name);
    }
    if (exp->spec.trace_dir.empty()) throw spotflow::InvalidArgument("no trace directory set");
    const spotflow::SpotPriceTrace trace =
        spotflow::SpotPriceTrace::LoadDir(exp->spec.trace_dir, catalog);
    const spotflow::PriceSeries* series = trace.Find(type_name);
    if (series == nullptr) {
      throw spotflow::Error(spotflow::ErrorCode::kMismatch,
                            std::string("no price trace for type ") + type_name);
    }
    spotflow::FfpParams params;
    params.step = step;
    params.horizon = horizon;
    params.seed = exp->spec.seed;
    const spotflow::FirstFailureDistribution ffp = spotflow::EstimateFfp(*series, params, bid);
    std::ostringstream os;
    os << "t,cumulative_failure\n";
    for (int64_t t = 0; t <= horizon; t += step) {
      os << t << ',' << ffp.CumulativeFailure(static_cast<double>(t)) << '\n';
    }
    *out = Dup(os.str());
  });
}

sf_status sf_generate_workflow(const char* family, int size, uint64_t seed, char** out) {
  if (family == nullptr || out == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "family and out are required");
  }
  return Guard([&] {
    const std::string f = family;
    spotflow::WorkflowJob job;
    if (f == "montage") {
      job = spotflow::MakeMontage(size, seed);
    } else if (f == "ligo") {
      job = spotflow::MakeLigo(size, 2, seed);
    } else if (f == "epigenomics") {
      job = spotflow::MakeEpigenomics(size, seed);
    } else {
      throw spotflow::InvalidArgument("unknown workflow family: " + f);
    }
    *out = Dup(spotflow::FormatWorkflow(job));
  });
}

sf_status sf_generate_traces(const char* shape, const char* catalog, int64_t duration,
                             uint64_t seed, const char* dir) {
  if (shape == nullptr || dir == nullptr) {
    return Fail(SF_ERR_INVALID_ARGUMENT, "shape and dir are required");
  }
  return Guard([&] {
    const auto s = spotflow::ParseTraceShape(shape);
    if (!s) throw spotflow::InvalidArgument(std::string("unknown trace shape: ") + shape);
    const spotflow::Catalog cat = catalog == nullptr || *catalog == '\0'
                                      ? spotflow::Catalog::DefaultM1()
                                      : spotflow::LoadCatalog(catalog);
    spotflow::SaveTraceDir(spotflow::MakeFixtureTraces(*s, cat, duration, seed), dir);
  });
}

sf_status sf_generate_catalog(int zero_lag, char** out) {
  if (out == nullptr) return Fail(SF_ERR_INVALID_ARGUMENT, "out is required");
  return Guard([&] {
    const spotflow::Catalog base = spotflow::Catalog::DefaultM1();
    if (zero_lag == 0) {
      *out = Dup(spotflow::FormatCatalog(base));
      return;
    }
    std::vector<spotflow::InstanceType> types(base.types().begin(), base.types().end());
    for (auto& t : types) {
      t.lag_ondemand = 0;
      t.lag_spot = 0;
    }
    *out = Dup(spotflow::FormatCatalog(spotflow::Catalog(types)));
  });
}

}  // extern "C"
