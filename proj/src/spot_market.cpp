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

#include "spotflow/spot_market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "spotflow/error.hpp"
#include "spotflow/random.hpp"
#include "text_util.hpp"

namespace spotflow {

namespace {

// Howard Hinnant's days_from_civil.
int64_t DaysFromCivil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

}  // namespace

std::optional<int64_t> ParseTimestamp(std::string_view s) {
  s = text::Trim(s);
  if (auto v = text::ParseInt(s)) return *v;
  // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]
  if (s.size() < 19) return std::nullopt;
  auto num = [&](size_t pos, size_t len) -> std::optional<int> {
    auto v = text::ParseInt(s.substr(pos, len));
    if (!v || s.substr(pos, len).find_first_not_of("0123456789") != std::string_view::npos) {
      return std::nullopt;
    }
    return static_cast<int>(*v);
  };
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  auto y = num(0, 4), mo = num(5, 2), d = num(8, 2);
  auto h = num(11, 2), mi = num(14, 2), sec = num(17, 2);
  if (!y || !mo || !d || !h || !mi || !sec) return std::nullopt;
  if (*mo < 1 || *mo > 12 || *d < 1 || *d > 31 || *h > 23 || *mi > 59 ||
      *sec > 60) {
    return std::nullopt;
  }
  auto rest = s.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    size_t i = 1;
    while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
    rest.remove_prefix(i);
  }
  if (!(rest.empty() || rest == "Z" || rest == "+00:00")) return std::nullopt;
  const int64_t days = DaysFromCivil(*y, static_cast<unsigned>(*mo),
                                     static_cast<unsigned>(*d));
  return days * 86400 + *h * 3600 + *mi * 60 + *sec;
}

PriceSeries::PriceSeries(std::vector<PricePoint> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw InvalidArgument("price series is empty");
  for (size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].price > 0.0) || !std::isfinite(points_[i].price)) {
      throw InvalidArgument("spot prices must be positive");
    }
    if (i > 0 && points_[i].time <= points_[i - 1].time) {
      throw InvalidArgument("timestamps must be strictly increasing");
    }
  }
}

size_t PriceSeries::IndexAt(int64_t t) const {
  auto it = std::upper_bound(
      points_.begin(), points_.end(), t,
      [](int64_t v, const PricePoint& p) { return v < p.time; });
  if (it == points_.begin()) return 0;
  return static_cast<size_t>(it - points_.begin()) - 1;
}

double PriceSeries::PriceAt(int64_t t) const {
  return points_[IndexAt(t)].price;
}

std::optional<int64_t> PriceSeries::NextAbove(int64_t t, double bid) const {
  size_t i = IndexAt(t);
  if (points_[i].price > bid) return std::max(t, points_[i].time);
  for (++i; i < points_.size(); ++i) {
    if (points_[i].price > bid) return points_[i].time;
  }
  return std::nullopt;
}

TraceStats PriceSeries::Stats() const {
  TraceStats s;
  s.points = points_.size();
  s.min = points_.front().price;
  s.max = points_.front().price;
  double sum = 0.0;
  for (const auto& p : points_) {
    sum += p.price;
    s.min = std::min(s.min, p.price);
    s.max = std::max(s.max, p.price);
  }
  s.mean = sum / static_cast<double>(s.points);
  double var = 0.0;
  for (const auto& p : points_) var += (p.price - s.mean) * (p.price - s.mean);
  s.stdev = s.points > 1 ? std::sqrt(var / static_cast<double>(s.points - 1)) : 0.0;
  s.duration = duration();
  return s;
}

PriceSeries ParseTrace(std::string_view content, const std::string& source) {
  std::vector<PricePoint> points;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = text::StripComment(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (points.empty() && line.substr(0, 9) == "timestamp") continue;
    auto f = text::Split(line, ',');
    if (f.size() != 2) {
      throw ParseError(source, line_no, "expected 'timestamp,price'");
    }
    auto t = ParseTimestamp(f[0]);
    if (!t) throw ParseError(source, line_no, "bad timestamp '" + std::string(f[0]) + "'");
    auto price = text::ParseDouble(f[1]);
    if (!price || !(*price > 0.0)) {
      throw ParseError(source, line_no, "bad price '" + std::string(f[1]) + "'");
    }
    if (!points.empty() && *t <= points.back().time) {
      throw ParseError(source, line_no, "timestamps are not strictly increasing");
    }
    points.push_back({*t, *price});
  }
  if (points.empty()) throw ParseError(source, line_no, "empty trace");
  return PriceSeries(std::move(points));
}

PriceSeries LoadTrace(const std::string& path) {
  return ParseTrace(text::ReadFile(path), path);
}

std::string FormatTrace(const PriceSeries& series) {
  std::ostringstream out;
  out.precision(10);
  out << "timestamp,price\n";
  for (const auto& p : series.points()) out << p.time << ',' << p.price << '\n';
  return out.str();
}

void SpotPriceTrace::Add(const std::string& type_name, PriceSeries series) {
  series_[type_name] = std::move(series);
}

const PriceSeries* SpotPriceTrace::Find(const std::string& type_name) const {
  auto it = series_.find(type_name);
  return it == series_.end() ? nullptr : &it->second;
}

SpotPriceTrace SpotPriceTrace::LoadDir(const std::string& dir,
                                       const Catalog& catalog) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "trace directory not found: " + dir);
  }
  SpotPriceTrace trace;
  for (const auto& t : catalog.types()) {
    const fs::path file = fs::path(dir) / (t.name + ".csv");
    if (fs::exists(file)) trace.Add(t.name, LoadTrace(file.string()));
  }
  return trace;
}

FirstFailureDistribution::FirstFailureDistribution(int64_t step,
                                                   std::vector<double> mass,
                                                   double no_failure)
    : step_(step), mass_(std::move(mass)), no_failure_(no_failure) {
  if (step_ <= 0) throw InvalidArgument("ffp step must be positive");
  cumulative_.resize(mass_.size());
  double acc = 0.0;
  for (size_t k = 0; k < mass_.size(); ++k) {
    if (mass_[k] < 0.0) throw InvalidArgument("negative failure mass");
    acc += mass_[k];
    cumulative_[k] = acc;
  }
  if (std::abs(acc + no_failure_ - 1.0) > 1e-9) {
    throw InvalidArgument("failure masses must sum to 1");
  }
}

FirstFailureDistribution FirstFailureDistribution::FromCounts(
    int64_t step, const std::vector<uint64_t>& counts, uint64_t trials) {
  if (trials == 0) throw InvalidArgument("ffp needs >= 1 trial");
  const auto total = static_cast<double>(trials);
  std::vector<double> mass(counts.size());
  std::vector<double> cumulative(counts.size());
  uint64_t acc = 0;
  for (size_t k = 0; k < counts.size(); ++k) {
    mass[k] = static_cast<double>(counts[k]) / total;
    acc += counts[k];
    cumulative[k] = static_cast<double>(acc) / total;
  }
  if (acc > trials) throw InvalidArgument("more failures than trials");
  FirstFailureDistribution out(step, std::move(mass),
                               static_cast<double>(trials - acc) / total);
  out.cumulative_ = std::move(cumulative);
  return out;
}

FirstFailureDistribution FirstFailureDistribution::NeverFails(int64_t step) {
  return FirstFailureDistribution(step, {}, 1.0);
}

FirstFailureDistribution FirstFailureDistribution::FailsAt(int64_t t,
                                                           int64_t step) {
  std::vector<double> mass(static_cast<size_t>(t / step) + 1, 0.0);
  mass.back() = 1.0;
  return FirstFailureDistribution(step, std::move(mass), 0.0);
}

double FirstFailureDistribution::CumulativeFailure(double t) const {
  if (!(t > 0.0) || mass_.empty()) return 0.0;
  // Grid points k*step < t.
  auto count = static_cast<size_t>(std::ceil(t / static_cast<double>(step_)));
  if (count == 0) return 0.0;
  count = std::min(count, mass_.size());
  return cumulative_[count - 1];
}

std::optional<double> FirstFailureDistribution::Sample(double u) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return std::nullopt;
  return static_cast<double>((it - cumulative_.begin()) * step_);
}

FirstFailureDistribution EstimateFfp(const PriceSeries& series,
                                     const FfpParams& params, double bid) {
  if (params.num_trials < 1) throw InvalidArgument("ffp needs >= 1 trial");
  if (params.step <= 0 || params.horizon < 0) {
    throw InvalidArgument("ffp step must be > 0 and horizon >= 0");
  }
  if (!(bid > 0.0)) throw InvalidArgument("bid must be positive");
  const auto points = series.points();
  const size_t n = points.size();
  // next[i]: first index >= i whose price exceeds the bid, n if none.
  std::vector<size_t> next(n + 1, n);
  for (size_t i = n; i-- > 0;) next[i] = points[i].price > bid ? i : next[i + 1];

  const size_t buckets = static_cast<size_t>(params.horizon / params.step) + 1;
  std::vector<uint64_t> count(buckets, 0);
  Rng rng(params.seed);
  const auto span = static_cast<uint64_t>(series.duration());
  for (int trial = 0; trial < params.num_trials; ++trial) {
    const int64_t start =
        series.start() + (span > 0 ? static_cast<int64_t>(UniformBelow(rng, span)) : 0);
    const size_t idx = series.IndexAt(start);
    int64_t elapsed;
    if (points[idx].price > bid) {
      elapsed = 0;
    } else {
      const size_t j = next[idx + 1];
      if (j == n) continue;  // trace end reached: survival
      elapsed = points[j].time - start;
    }
    if (elapsed > params.horizon) continue;
    ++count[static_cast<size_t>(elapsed / params.step)];
  }
  return FirstFailureDistribution::FromCounts(params.step, count,
                                              static_cast<uint64_t>(params.num_trials));
}

FailureModel::FailureModel(const PriceSeries* series, FfpParams params)
    : series_(series), params_(params) {
  if (series_ == nullptr) throw InvalidArgument("failure model needs a trace");
  if (params_.num_trials < 1) throw InvalidArgument("num_trials must be >= 1");
  if (params_.step <= 0) throw InvalidArgument("step must be positive");
}

std::shared_ptr<const FirstFailureDistribution> FailureModel::At(double bid) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(bid);
  if (it != cache_.end()) return it->second;
  auto ffp = std::make_shared<const FirstFailureDistribution>(
      EstimateFfp(*series_, params_, bid));
  cache_.emplace(bid, ffp);
  return ffp;
}

double FailureModel::CumulativeFailure(double bid, double t) const {
  return At(bid)->CumulativeFailure(t);
}

}  // namespace spotflow
