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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace spotflow {

inline constexpr size_t kDefaultSampleCount = 10000;

// Sample-based representation of a nonnegative random variable. Samples are
// kept in draw order (pairing order for binary operations) together with a
// sorted view for order statistics. Instances are immutable and share their
// storage, so copies are cheap and safe to read from several threads.
class EmpiricalDistribution {
 public:
  // Throws InvalidArgument if fewer than two samples are given or any sample
  // is negative or non-finite.
  EmpiricalDistribution(std::vector<double> samples, uint64_t seed);

  static EmpiricalDistribution PointMass(double value,
                                         size_t n = kDefaultSampleCount);

  std::span<const double> samples() const { return *samples_; }
  std::span<const double> sorted() const { return *sorted_; }
  size_t size() const { return samples_->size(); }
  uint64_t seed() const { return seed_; }

  double Mean() const { return mean_; }
  double Stddev() const;
  double Min() const { return sorted_->front(); }
  double Max() const { return sorted_->back(); }

  // Nearest-rank percentile: smallest sample v with F(v) >= q.
  double Percentile(double q) const;
  // Fraction of samples <= t.
  double Cdf(double t) const;

  EmpiricalDistribution Shifted(double delta) const;

 private:
  std::shared_ptr<const std::vector<double>> samples_;
  std::shared_ptr<const std::vector<double>> sorted_;
  double mean_ = 0.0;
  uint64_t seed_ = 0;
};

EmpiricalDistribution FromGamma(double shape, double scale, size_t n,
                                uint64_t seed);
EmpiricalDistribution FromNormal(double mu, double sigma, size_t n,
                                 uint64_t seed);

// X + Y under independence. Each operand is independently permuted before the
// element-wise sum; the result has max(|a|, |b|) samples.
EmpiricalDistribution Convolve(const EmpiricalDistribution& a,
                               const EmpiricalDistribution& b, uint64_t seed);

// max(X_1..X_k) under independence, same pairing scheme as Convolve.
EmpiricalDistribution MaxOf(std::span<const EmpiricalDistribution> dists,
                            uint64_t seed);

double Percentile(const EmpiricalDistribution& d, double q);

// 0-based index of the nearest-rank order statistic for q over n samples.
size_t NearestRankIndex(double q, size_t n);

// Nearest-rank percentile of an unsorted buffer (partially reorders it).
double PercentileInPlace(std::vector<double>& samples, double q);
double Expectation(const EmpiricalDistribution& d);

inline constexpr double kDefaultDominanceEpsilon = 0.01;

// First-order stochastic dominance of the faster variable: true iff
// F_c2(t) >= F_c1(t) - epsilon at every point of the merged sample grid.
bool Dominates(const EmpiricalDistribution& c2, const EmpiricalDistribution& c1,
               double epsilon = kDefaultDominanceEpsilon);

// Largest violation max_t (F_c1(t) - F_c2(t)), clamped at zero.
double DominanceGap(const EmpiricalDistribution& c2,
                    const EmpiricalDistribution& c1);

}  // namespace spotflow
