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

#include "spotflow/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "spotflow/error.hpp"
#include "spotflow/random.hpp"

namespace spotflow {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kMismatch: return "mismatch";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

std::vector<uint32_t> RandomPermutation(size_t n, uint64_t seed) {
  std::vector<uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(seed);
  for (size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[UniformBelow(rng, i)]);
  }
  return perm;
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples,
                                             uint64_t seed)
    : seed_(seed) {
  if (samples.size() < 2) {
    throw InvalidArgument("distribution needs at least 2 samples, got " +
                          std::to_string(samples.size()));
  }
  double sum = 0.0;
  for (double s : samples) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw InvalidArgument("distribution samples must be finite and >= 0");
    }
    sum += s;
  }
  mean_ = sum / static_cast<double>(samples.size());
  auto sorted = std::make_shared<std::vector<double>>(samples);
  std::sort(sorted->begin(), sorted->end());
  sorted_ = std::move(sorted);
  samples_ = std::make_shared<const std::vector<double>>(std::move(samples));
}

EmpiricalDistribution EmpiricalDistribution::PointMass(double value, size_t n) {
  return EmpiricalDistribution(std::vector<double>(n, value), 0);
}

double EmpiricalDistribution::Stddev() const {
  double acc = 0.0;
  for (double s : *samples_) acc += (s - mean_) * (s - mean_);
  return std::sqrt(acc / static_cast<double>(samples_->size() - 1));
}

double EmpiricalDistribution::Percentile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidArgument("percentile q must lie in [0, 1]");
  }
  return (*sorted_)[NearestRankIndex(q, sorted_->size())];
}

size_t NearestRankIndex(double q, size_t n) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidArgument("percentile q must lie in [0, 1]");
  }
  // The slack keeps products like 0.96 * 100 from rounding up a rank.
  auto rank = static_cast<size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<size_t>(rank, 1, n);
  return rank - 1;
}

double PercentileInPlace(std::vector<double>& samples, double q) {
  if (samples.empty()) throw InvalidArgument("percentile of empty sample set");
  const size_t k = NearestRankIndex(q, samples.size());
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k),
                   samples.end());
  return samples[k];
}

double EmpiricalDistribution::Cdf(double t) const {
  auto it = std::upper_bound(sorted_->begin(), sorted_->end(), t);
  return static_cast<double>(it - sorted_->begin()) /
         static_cast<double>(sorted_->size());
}

EmpiricalDistribution EmpiricalDistribution::Shifted(double delta) const {
  std::vector<double> out(*samples_);
  for (double& s : out) s += delta;
  return EmpiricalDistribution(std::move(out), seed_);
}

EmpiricalDistribution FromGamma(double shape, double scale, size_t n,
                                uint64_t seed) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw InvalidArgument("gamma shape and scale must be positive");
  }
  if (n < 2) throw InvalidArgument("sample count must be >= 2");
  Rng rng(seed);
  std::gamma_distribution<double> gamma(shape, scale);
  std::vector<double> out(n);
  for (double& s : out) s = gamma(rng);
  return EmpiricalDistribution(std::move(out), seed);
}

EmpiricalDistribution FromNormal(double mu, double sigma, size_t n,
                                 uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("normal sigma must be >= 0");
  if (n < 2) throw InvalidArgument("sample count must be >= 2");
  if (mu < 0.0 && sigma == 0.0) {
    throw InvalidArgument("degenerate normal with negative mean");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(mu, sigma);
  std::vector<double> out(n);
  for (double& s : out) {
    do {
      s = normal(rng);
    } while (s < 0.0);
  }
  return EmpiricalDistribution(std::move(out), seed);
}

EmpiricalDistribution Convolve(const EmpiricalDistribution& a,
                               const EmpiricalDistribution& b, uint64_t seed) {
  const size_t n = std::max(a.size(), b.size());
  const auto pa = RandomPermutation(a.size(), DeriveSeed(seed, 0));
  const auto pb = RandomPermutation(b.size(), DeriveSeed(seed, 1));
  auto sa = a.samples();
  auto sb = b.samples();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = sa[pa[i % sa.size()]] + sb[pb[i % sb.size()]];
  }
  return EmpiricalDistribution(std::move(out), seed);
}

EmpiricalDistribution MaxOf(std::span<const EmpiricalDistribution> dists,
                            uint64_t seed) {
  if (dists.empty()) throw InvalidArgument("max_of needs at least one input");
  if (dists.size() == 1) return dists.front();
  size_t n = 0;
  for (const auto& d : dists) n = std::max(n, d.size());
  std::vector<double> out(n, 0.0);
  for (size_t k = 0; k < dists.size(); ++k) {
    auto s = dists[k].samples();
    const auto perm = RandomPermutation(s.size(), DeriveSeed(seed, k));
    for (size_t i = 0; i < n; ++i) {
      out[i] = std::max(out[i], s[perm[i % s.size()]]);
    }
  }
  return EmpiricalDistribution(std::move(out), seed);
}

double Percentile(const EmpiricalDistribution& d, double q) {
  return d.Percentile(q);
}

double Expectation(const EmpiricalDistribution& d) { return d.Mean(); }

double DominanceGap(const EmpiricalDistribution& c2,
                    const EmpiricalDistribution& c1) {
  auto s2 = c2.sorted();
  auto s1 = c1.sorted();
  const double n2 = static_cast<double>(s2.size());
  const double n1 = static_cast<double>(s1.size());
  size_t i2 = 0;
  size_t i1 = 0;
  double worst = 0.0;
  // Walk the merged grid; at each distinct t both CDFs count samples <= t.
  while (i2 < s2.size() || i1 < s1.size()) {
    double t;
    if (i1 >= s1.size()) {
      t = s2[i2];
    } else if (i2 >= s2.size()) {
      t = s1[i1];
    } else {
      t = std::min(s1[i1], s2[i2]);
    }
    while (i2 < s2.size() && s2[i2] <= t) ++i2;
    while (i1 < s1.size() && s1[i1] <= t) ++i1;
    const double gap = static_cast<double>(i1) / n1 - static_cast<double>(i2) / n2;
    worst = std::max(worst, gap);
  }
  return worst;
}

bool Dominates(const EmpiricalDistribution& c2, const EmpiricalDistribution& c1,
               double epsilon) {
  if (epsilon < 0.0) throw InvalidArgument("dominance epsilon must be >= 0");
  return DominanceGap(c2, c1) <= epsilon;
}

}  // namespace spotflow
