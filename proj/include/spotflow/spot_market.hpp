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

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spotflow/cloud_model.hpp"

namespace spotflow {

struct PricePoint {
  int64_t time = 0;    // seconds since epoch
  double price = 0.0;  // USD per hour
};

struct TraceStats {
  size_t points = 0;
  double mean = 0.0;
  double stdev = 0.0;
  double min = 0.0;
  double max = 0.0;
  int64_t duration = 0;
};

// Step function of spot prices for one instance type: each point's price
// holds until the next point.
class PriceSeries {
 public:
  PriceSeries() = default;
  // Throws InvalidArgument on empty input, non-increasing timestamps or
  // non-positive prices.
  explicit PriceSeries(std::vector<PricePoint> points);

  std::span<const PricePoint> points() const { return points_; }
  int64_t start() const { return points_.front().time; }
  int64_t end() const { return points_.back().time; }
  int64_t duration() const { return end() - start(); }
  bool empty() const { return points_.empty(); }

  size_t IndexAt(int64_t t) const;
  double PriceAt(int64_t t) const;
  // Earliest time in [t, end()] at which the price strictly exceeds bid.
  std::optional<int64_t> NextAbove(int64_t t, double bid) const;

  TraceStats Stats() const;

 private:
  std::vector<PricePoint> points_;
};

// Trace CSV: `timestamp,price` per line where timestamp is epoch seconds or
// ISO-8601 (YYYY-MM-DDTHH:MM:SS[Z]). '#' comments and a header line starting
// with "timestamp" are allowed.
PriceSeries ParseTrace(std::string_view content,
                       const std::string& source = "trace");
PriceSeries LoadTrace(const std::string& path);
std::string FormatTrace(const PriceSeries& series);

// ISO-8601 or integer epoch seconds.
std::optional<int64_t> ParseTimestamp(std::string_view s);

// Price series per instance type name.
class SpotPriceTrace {
 public:
  void Add(const std::string& type_name, PriceSeries series);
  const PriceSeries* Find(const std::string& type_name) const;
  bool empty() const { return series_.empty(); }
  const std::map<std::string, PriceSeries>& all() const { return series_; }

  // Loads `<dir>/<type name>.csv` for each catalog type that has a file.
  static SpotPriceTrace LoadDir(const std::string& dir, const Catalog& catalog);

 private:
  std::map<std::string, PriceSeries> series_;
};

// Deterministic synthetic traces.
enum class TraceShape {
  kStable,       // narrow band well below the on-demand price
  kSpiky,        // cheap most of the time, rare spikes far above on-demand
  kAlternating,  // square wave between a low and a high price
};

std::optional<TraceShape> ParseTraceShape(std::string_view name);

inline constexpr int64_t kTraceEpoch = 1262304000;  // 2010-01-01T00:00:00Z

// Prices drawn every `step` seconds from N(mean, stdev) clipped to
// [min, max]; the first two points are min and max.
PriceSeries MakeBandSeries(double mean, double stdev, double min, double max,
                           int64_t duration, int64_t step, uint64_t seed);
// Uniform base prices in [base_min, base_max] with single-step spikes to
// spike_price at probability spike_prob per step.
PriceSeries MakeSpikySeries(double base_min, double base_max, double spike_price,
                            double spike_prob, int64_t duration, int64_t step,
                            uint64_t seed);
// low for half_period seconds, then high for half_period, repeated.
PriceSeries MakeAlternatingSeries(double low, double high, int64_t half_period,
                                  int64_t duration);

// One series per catalog type, scaled to each type's on-demand price.
SpotPriceTrace MakeFixtureTraces(TraceShape shape, const Catalog& catalog,
                                 int64_t duration = 30 * 86400, uint64_t seed = 1);

// Writes `<dir>/<type>.csv` for every series.
void SaveTraceDir(const SpotPriceTrace& trace, const std::string& dir);

struct FfpParams {
  int num_trials = 10000;
  int64_t horizon = 86400;  // seconds
  int64_t step = 60;        // seconds
  uint64_t seed = 1;
};

// Discretized first-failure time of a spot instance at a fixed bid: mass[k]
// is the probability that the first out-of-bid event happens at elapsed
// time in [k*step, (k+1)*step).
class FirstFailureDistribution {
 public:
  FirstFailureDistribution(int64_t step, std::vector<double> mass,
                           double no_failure);

  // Masses from trial counts; cumulative values are exact count ratios, so
  // pointwise order between two count vectors is preserved.
  static FirstFailureDistribution FromCounts(int64_t step, const std::vector<uint64_t>& counts,
                                             uint64_t trials);

  static FirstFailureDistribution NeverFails(int64_t step = 60);
  static FirstFailureDistribution FailsAt(int64_t t, int64_t step = 60);

  int64_t step() const { return step_; }
  std::span<const double> mass() const { return mass_; }
  double no_failure() const { return no_failure_; }

  // Sum of the masses at grid points strictly below t.
  double CumulativeFailure(double t) const;

  // Inverse-CDF draw: failure time (left edge of its bucket) or nullopt for
  // survival over the horizon.
  std::optional<double> Sample(double u) const;

 private:
  int64_t step_;
  std::vector<double> mass_;
  std::vector<double> cumulative_;  // cumulative_[k] = sum of mass_[0..k]
  double no_failure_;
};

// Monte-Carlo walk from uniformly random start times over the series
// duration. All bids share the same start offsets for a given seed, which
// makes the estimate exactly monotone in the bid.
FirstFailureDistribution EstimateFfp(const PriceSeries& series,
                                     const FfpParams& params, double bid);

// Memoizes EstimateFfp per bid for one price series.
class FailureModel {
 public:
  FailureModel(const PriceSeries* series, FfpParams params);

  const PriceSeries* series() const { return series_; }
  const FfpParams& params() const { return params_; }

  std::shared_ptr<const FirstFailureDistribution> At(double bid) const;
  double CumulativeFailure(double bid, double t) const;

 private:
  const PriceSeries* series_;
  FfpParams params_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const FirstFailureDistribution>> cache_;
};

}  // namespace spotflow
