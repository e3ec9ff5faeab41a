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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "spotflow/error.hpp"
#include "spotflow/random.hpp"
#include "spotflow/spot_market.hpp"
#include "text_util.hpp"

namespace spotflow {

namespace {

double Cents4(double p) { return std::round(p * 1e4) / 1e4; }

void CheckGrid(int64_t duration, int64_t step) {
  if (step <= 0 || duration < step) {
    throw InvalidArgument("trace needs step > 0 and duration >= step");
  }
}

// Measured band statistics of the m1 family: mean, stdev, min, max.
struct Band {
  double mean, stdev, min, max;
};

const std::map<std::string, Band>& StableBands() {
  static const std::map<std::string, Band> bands = {
      {"m1.small", {0.041, 0.003, 0.038, 0.05}},
      {"m1.medium", {0.0676, 0.003, 0.064, 0.08}},
      {"m1.large", {0.160, 0.005, 0.152, 0.172}},
      {"m1.xlarge", {0.320, 0.009, 0.304, 0.336}},
  };
  return bands;
}

// Price statistics with rare outliers: mean, stdev, min, max.
const std::map<std::string, Band>& SpikyBands() {
  static const std::map<std::string, Band> bands = {
      {"m1.small", {0.048, 0.438, 0.007, 10.0}},
      {"m1.medium", {0.246, 1.31, 0.0001, 10.0}},
      {"m1.large", {0.069, 0.770, 0.026, 40.0}},
      {"m1.xlarge", {0.413, 2.22, 0.052, 20.0}},
  };
  return bands;
}

struct SpikyParams {
  double base_max, prob;
};

// Moment match a uniform [min, base_max] base with spikes to max taken
// with probability prob.
SpikyParams MatchSpiky(const Band& b) {
  const double second = b.stdev * b.stdev + b.mean * b.mean;
  double prob = second / (b.max * b.max);
  double base_max = b.min;
  for (int i = 0; i < 8; ++i) {
    base_max = std::max(b.min, 2.0 * (b.mean - prob * b.max) / (1.0 - prob) - b.min);
    const double base_second =
        (b.min * b.min + b.min * base_max + base_max * base_max) / 3.0;
    prob = std::clamp((second - base_second) / (b.max * b.max - base_second), 0.0, 1.0);
  }
  return {base_max, prob};
}

}  // namespace

std::optional<TraceShape> ParseTraceShape(std::string_view name) {
  if (name == "stable") return TraceShape::kStable;
  if (name == "spiky") return TraceShape::kSpiky;
  if (name == "alternating") return TraceShape::kAlternating;
  return std::nullopt;
}

PriceSeries MakeBandSeries(double mean, double stdev, double min, double max,
                           int64_t duration, int64_t step, uint64_t seed) {
  CheckGrid(duration, step);
  if (!(min > 0.0 && min <= mean && mean <= max)) {
    throw InvalidArgument("band needs 0 < min <= mean <= max");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(mean, stdev);
  std::vector<PricePoint> pts;
  for (int64_t t = 0; t <= duration; t += step) {
    double p = std::clamp(normal(rng), min, max);
    if (pts.size() == 0) p = min;
    if (pts.size() == 1) p = max;
    pts.push_back({kTraceEpoch + t, Cents4(p)});
  }
  return PriceSeries(std::move(pts));
}

PriceSeries MakeSpikySeries(double base_min, double base_max, double spike_price,
                            double spike_prob, int64_t duration, int64_t step,
                            uint64_t seed) {
  CheckGrid(duration, step);
  if (!(base_min > 0.0 && base_min <= base_max && spike_price > base_max)) {
    throw InvalidArgument("spiky trace needs 0 < base_min <= base_max < spike");
  }
  Rng rng(seed);
  std::vector<PricePoint> pts;
  for (int64_t t = 0; t <= duration; t += step) {
    double p = base_min + (base_max - base_min) * UniformUnit(rng);
    if (UniformUnit(rng) < spike_prob) p = spike_price;
    pts.push_back({kTraceEpoch + t, Cents4(p)});
  }
  return PriceSeries(std::move(pts));
}

PriceSeries MakeAlternatingSeries(double low, double high, int64_t half_period,
                                  int64_t duration) {
  CheckGrid(duration, half_period);
  if (!(low > 0.0 && high > 0.0)) throw InvalidArgument("prices must be > 0");
  std::vector<PricePoint> pts;
  bool lo = true;
  for (int64_t t = 0; t <= duration; t += half_period) {
    pts.push_back({kTraceEpoch + t, lo ? low : high});
    lo = !lo;
  }
  return PriceSeries(std::move(pts));
}

SpotPriceTrace MakeFixtureTraces(TraceShape shape, const Catalog& catalog,
                                 int64_t duration, uint64_t seed) {
  SpotPriceTrace trace;
  const Band small = StableBands().at("m1.small");
  for (const InstanceType& type : catalog.types()) {
    const uint64_t s = DeriveSeed(seed, static_cast<uint64_t>(type.id));
    const double scale = type.ondemand_price / 0.06;
    switch (shape) {
      case TraceShape::kStable: {
        auto it = StableBands().find(type.name);
        Band b = it != StableBands().end()
                     ? it->second
                     : Band{small.mean * scale, small.stdev * scale, small.min * scale,
                            small.max * scale};
        trace.Add(type.name, MakeBandSeries(b.mean, b.stdev, b.min, b.max, duration, 300, s));
        break;
      }
      case TraceShape::kSpiky: {
        auto it = SpikyBands().find(type.name);
        const Band small_spiky = SpikyBands().at("m1.small");
        Band b = it != SpikyBands().end()
                     ? it->second
                     : Band{small_spiky.mean * scale, small_spiky.stdev * scale,
                            small_spiky.min * scale, small_spiky.max * scale};
        const SpikyParams m = MatchSpiky(b);
        trace.Add(type.name,
                  MakeSpikySeries(b.min, m.base_max, b.max, m.prob, duration, 300, s));
        break;
      }
      case TraceShape::kAlternating:
        trace.Add(type.name, MakeAlternatingSeries(0.5 * type.ondemand_price,
                                                   1.5 * type.ondemand_price, 1800, duration));
        break;
    }
  }
  return trace;
}

void SaveTraceDir(const SpotPriceTrace& trace, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  for (const auto& [name, series] : trace.all()) {
    text::WriteFile((std::filesystem::path(dir) / (name + ".csv")).string(), FormatTrace(series));
  }
}

}  // namespace spotflow
