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
#include <numeric>
#include <vector>

#include "doctest.h"
#include "spotflow/distributions.hpp"
#include "spotflow/error.hpp"
#include "testkit.hpp"

using namespace spotflow;

namespace {

EmpiricalDistribution Range(int lo, int hi) {
  std::vector<double> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return EmpiricalDistribution(std::move(v), 0);
}

bool SamePercentiles(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  for (int k = 0; k <= 100; ++k) {
    if (a.Percentile(k / 100.0) != b.Percentile(k / 100.0)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("from_gamma matches catalog means") {
  CHECK(FromGamma(129.3, 0.79, 10000, 1).Mean() == doctest::Approx(129.3 * 0.79).epsilon(0.02));
  CHECK(FromGamma(1, 1, 10000, 2).Mean() == doctest::Approx(1.0).epsilon(0.03));
  CHECK(FromGamma(408.1, 0.26, 10000, 3).Mean() == doctest::Approx(106.1).epsilon(0.02));
  CHECK(FromGamma(2, 3, 10000, 4).Mean() == doctest::Approx(6.0).epsilon(0.03));
  CHECK_THROWS_AS(FromGamma(0, 1, 10, 1), Error);
  CHECK_THROWS_AS(FromGamma(1, -1, 10, 1), Error);
  CHECK_THROWS_AS(FromGamma(1, 1, 1, 1), Error);
}

TEST_CASE("from_normal matches moments and truncates at zero") {
  CHECK(FromNormal(150.3, 50.0, 10000, 1).Mean() == doctest::Approx(150.3).epsilon(0.02));
  CHECK(FromNormal(1034.0, 146.4, 10000, 2).Stddev() == doctest::Approx(146.4).epsilon(0.05));
  const EmpiricalDistribution pm = FromNormal(5, 0, 100, 3);
  CHECK(std::all_of(pm.samples().begin(), pm.samples().end(), [](double x) { return x == 5; }));
  const EmpiricalDistribution wide = FromNormal(1, 10, 5000, 4);
  CHECK(wide.Min() >= 0.0);
  CHECK_THROWS_AS(FromNormal(1, -1, 10, 1), Error);
}

TEST_CASE("convolve examples") {
  const auto sum = Convolve(EmpiricalDistribution::PointMass(2), EmpiricalDistribution::PointMass(3), 1);
  CHECK(sum.Min() == 5);
  CHECK(sum.Max() == 5);

  const auto n = Convolve(FromNormal(10, 2, 10000, 1), FromNormal(20, 3, 10000, 2), 3);
  CHECK(n.Mean() == doctest::Approx(30).epsilon(0.01));
  CHECK(n.Stddev() == doctest::Approx(std::sqrt(13.0)).epsilon(0.05));

  const auto a = FromGamma(3, 2, 10000, 5);
  CHECK(SamePercentiles(Convolve(a, EmpiricalDistribution::PointMass(0), 7), a));
}

TEST_CASE("max_of examples") {
  const std::vector<EmpiricalDistribution> pm{EmpiricalDistribution::PointMass(2),
                                              EmpiricalDistribution::PointMass(3)};
  const auto m = MaxOf(pm, 1);
  CHECK(m.Min() == 3);
  CHECK(m.Max() == 3);

  const auto d = FromGamma(2, 2, 1000, 9);
  const std::vector<EmpiricalDistribution> one{d};
  CHECK(std::equal(MaxOf(one, 1).samples().begin(), MaxOf(one, 1).samples().end(),
                   d.samples().begin()));

  // E[max] of two independent uniforms on {1..100}, by enumerating pairs.
  double oracle = 0;
  for (int i = 1; i <= 100; ++i) {
    for (int j = 1; j <= 100; ++j) oracle += std::max(i, j);
  }
  oracle /= 10000.0;
  Rng rng(11);
  std::vector<double> u1(10000), u2(10000);
  for (double& x : u1) x = 1 + static_cast<double>(UniformBelow(rng, 100));
  for (double& x : u2) x = 1 + static_cast<double>(UniformBelow(rng, 100));
  const std::vector<EmpiricalDistribution> us{EmpiricalDistribution(u1, 1),
                                              EmpiricalDistribution(u2, 2)};
  CHECK(MaxOf(us, 3).Mean() == doctest::Approx(oracle).epsilon(0.03));

  const std::vector<EmpiricalDistribution> none;
  CHECK_THROWS_AS(MaxOf(none, 1), Error);
}

TEST_CASE("percentile examples") {
  CHECK(Percentile(EmpiricalDistribution::PointMass(5), 0.9) == 5);
  const auto r = Range(1, 100);
  CHECK(Percentile(r, 0.96) == testkit::OracleNearestRank({r.samples().begin(), r.samples().end()}, 0.96));
  CHECK(Percentile(r, 0.96) == 96);
  CHECK(Percentile(r, 1.0) == 100);
  CHECK(Percentile(r, 0.0) == 1);
  CHECK_THROWS_AS(Percentile(r, 1.5), Error);
  CHECK_THROWS_AS(Percentile(r, -0.1), Error);
}

TEST_CASE("expectation examples") {
  CHECK(Expectation(EmpiricalDistribution::PointMass(7)) == 7);
  CHECK(Expectation(EmpiricalDistribution({0, 10}, 0)) == 5);
}

TEST_CASE("dominance examples") {
  const auto d = FromGamma(3, 1, 1000, 1);
  CHECK(Dominates(d, d, 0));
  const auto two = EmpiricalDistribution::PointMass(2);
  const auto three = EmpiricalDistribution::PointMass(3);
  CHECK(Dominates(two, three, 0));
  CHECK_FALSE(Dominates(three, two, 0));
  CHECK(Dominates(FromNormal(10, 1, 10000, 1), FromNormal(12, 1, 10000, 2), 0.01));
  CHECK_FALSE(Dominates(FromNormal(12, 1, 10000, 1), FromNormal(10, 1, 10000, 2), 0.01));
  CHECK_THROWS_AS(Dominates(d, d, -0.1), Error);
}

TEST_CASE("construction rejects malformed samples") {
  CHECK_THROWS_AS(EmpiricalDistribution({1.0}, 0), Error);
  CHECK_THROWS_AS(EmpiricalDistribution({1.0, -1.0}, 0), Error);
  CHECK_THROWS_AS(EmpiricalDistribution({1.0, NAN}, 0), Error);
}

TEST_CASE("distribution properties hold over randomized cases") {
  for (const testkit::PropertyOutcome& p : testkit::DistributionProperties(1000, 20261014)) {
    INFO(p.name << " base_seed=" << p.base_seed
                << " first_failure=" << (p.first_failure ? *p.first_failure : 0));
    CHECK(p.cases == 1000);
    CHECK(p.failures == 0);
  }
}
