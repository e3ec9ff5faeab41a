/*
 * Copyright 2026 The spotflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * spotflow C API.
 *
 * Every call returns an sf_status. On failure a message describing the
 * error is available from sf_last_error() on the calling thread until the
 * next call on that thread. Strings returned through char** out-parameters
 * are owned by the caller and released with sf_string_free().
 */
#ifndef SPOTFLOW_SPOTFLOW_H_
#define SPOTFLOW_SPOTFLOW_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SPOTFLOW_BUILDING_LIBRARY)
#define SF_API __attribute__((visibility("default")))
#else
#define SF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_INVALID_ARGUMENT = 1,
  SF_ERR_PARSE = 2,
  SF_ERR_INFEASIBLE = 3,
  SF_ERR_MISMATCH = 4,
  SF_ERR_IO = 5,
  SF_ERR_INTERNAL = 6
} sf_status;

typedef struct sf_experiment sf_experiment;
typedef struct sf_plan_cache sf_plan_cache;
typedef struct sf_report sf_report;

typedef struct sf_metrics {
  int64_t jobs;
  double total_cost;
  double avg_cost;
  double avg_time;
  double hit_rate;
  int64_t out_of_bid;
  int64_t reused;
  int64_t consolidated;
} sf_metrics;

SF_API const char* sf_version(void);
SF_API const char* sf_status_name(sf_status status);
SF_API const char* sf_last_error(void);
SF_API void sf_string_free(char* s);

/* Experiment settings. Keys are the command-line flag names without the
 * leading dashes ("guarantee", "trace-dir", ...); "workflow" appends. */
SF_API sf_status sf_experiment_create(sf_experiment** out);
SF_API sf_status sf_experiment_load(const char* path, sf_experiment** out);
SF_API sf_status sf_experiment_set(sf_experiment* exp, const char* key,
                                   const char* value);
/* Current value of one field as text; keys as printed by
 * sf_experiment_json ("out", "trace_dir", ...). */
SF_API sf_status sf_experiment_get(const sf_experiment* exp, const char* key,
                                   char** out);
SF_API sf_status sf_experiment_json(const sf_experiment* exp, char** out);
SF_API void sf_experiment_free(sf_experiment* exp);

/* Plans every workflow class of the experiment. planning_seconds may be
 * NULL. */
SF_API sf_status sf_plan(const sf_experiment* exp, sf_plan_cache** out,
                         double* planning_seconds);
SF_API sf_status sf_plan_cache_load(const sf_experiment* exp, const char* path,
                                    sf_plan_cache** out);
SF_API sf_status sf_plan_cache_save(const sf_plan_cache* cache,
                                    const char* path);
SF_API sf_status sf_plan_cache_json(const sf_plan_cache* cache, char** out);
/* One CSV row per task of every plan. */
SF_API sf_status sf_plan_cache_summary(const sf_plan_cache* cache, char** out);
SF_API void sf_plan_cache_free(sf_plan_cache* cache);

SF_API sf_status sf_simulate(const sf_experiment* exp,
                             const sf_plan_cache* cache, int record_events,
                             sf_report** out);
SF_API sf_status sf_report_json(const sf_report* report, char** out);
SF_API sf_status sf_report_jobs_csv(const sf_report* report, char** out);
/* Empty unless the simulation recorded events. */
SF_API sf_status sf_report_events(const sf_report* report, char** out);
SF_API sf_status sf_report_metrics(const sf_report* report, sf_metrics* out);
SF_API void sf_report_free(sf_report* report);

/* CSV "t,cumulative_failure" for one catalog type of the experiment's trace
 * at the given bid, sampled every step seconds up to horizon. */
SF_API sf_status sf_ffp_table(const sf_experiment* exp, const char* type_name,
                              double bid, int64_t step, int64_t horizon,
                              char** out);

/* Workflow text for family "montage" (size = projections), "ligo"
 * (size = groups of width 2) or "epigenomics" (size = lanes). */
SF_API sf_status sf_generate_workflow(const char* family, int size,
                                      uint64_t seed, char** out);
/* Writes <dir>/<type>.csv for every type of the catalog (NULL or empty for
 * the built-in one). shape is "stable", "spiky" or "alternating". */
SF_API sf_status sf_generate_traces(const char* shape, const char* catalog,
                                    int64_t duration, uint64_t seed,
                                    const char* dir);
/* Built-in catalog as CSV; zero_lag clears acquisition lags. */
SF_API sf_status sf_generate_catalog(int zero_lag, char** out);

#ifdef __cplusplus
}
#endif

#endif  /* SPOTFLOW_SPOTFLOW_H_ */
