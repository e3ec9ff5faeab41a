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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spotflow/distributions.hpp"
#include "spotflow/random.hpp"

namespace spotflow {

struct GammaParams {
  double k = 1.0;
  double theta = 1.0;
  double mean() const { return k * theta; }
};

struct NormalParams {
  double mu = 0.0;
  double sigma = 0.0;
};

using TypeId = int;

struct InstanceType {
  TypeId id = 0;
  std::string name;
  double ondemand_price = 0.0;  // USD per hour
  double cpu_speed = 0.0;       // instructions per second
  GammaParams seq_io;           // MB/s
  NormalParams rnd_io;          // MB/s equivalent
  GammaParams net_in;           // download from storage, MB/s
  GammaParams net_out;          // upload to storage, MB/s
  double lag_ondemand = 120.0;  // seconds
  double lag_spot = 420.0;      // seconds
};

// Instance types indexed by id, id 0 the cheapest, strictly ascending in
// on-demand price.
class Catalog {
 public:
  Catalog() = default;
  // Reassigns ids to positions and validates ordering and field ranges.
  explicit Catalog(std::vector<InstanceType> types);

  // m1.small/medium/large/xlarge: measured price, I/O and network parameters;
  // cpu_speed is synthetic (1e9 instr/s for small, doubling per size).
  static Catalog DefaultM1();

  size_t size() const { return types_.size(); }
  bool empty() const { return types_.empty(); }
  const InstanceType& at(TypeId id) const;
  const InstanceType& cheapest() const { return types_.front(); }
  const InstanceType& most_expensive() const { return types_.back(); }
  std::optional<TypeId> Find(std::string_view name) const;
  std::span<const InstanceType> types() const { return types_; }

 private:
  std::vector<InstanceType> types_;
};

// Catalog text: '#' comments, one record per line,
//   name,ondemand_price,cpu_speed,seq_k,seq_theta,rnd_mu,rnd_sigma,
//   in_k,in_theta,out_k,out_theta,lag_ondemand,lag_spot
// An optional header line starting with "name" is skipped.
Catalog ParseCatalog(std::string_view text, const std::string& source = "catalog");
Catalog LoadCatalog(const std::string& path);
std::string FormatCatalog(const Catalog& catalog);

struct TaskProfile {
  double instr = 0.0;        // instructions
  double seq_io_mb = 0.0;    // sequential local I/O
  double rnd_io_mb = 0.0;    // random local I/O
  double net_in_mb = 0.0;    // downloaded
  double net_out_mb = 0.0;   // uploaded
};

void ValidateProfile(const TaskProfile& profile);

// One draw of the bandwidths of an instance type.
struct BandwidthDraw {
  double seq = 0.0;
  double rnd = 0.0;
  double in = 0.0;
  double out = 0.0;
};

// Per-resource streams so that the draw sequence does not depend on which
// profile fields are nonzero.
class BandwidthSampler {
 public:
  BandwidthSampler(const InstanceType& type, uint64_t seed);
  BandwidthDraw Next();

 private:
  Rng seq_rng_, rnd_rng_, in_rng_, out_rng_;
  std::gamma_distribution<double> seq_, in_, out_;
  std::normal_distribution<double> rnd_;
};

double TaskTime(const TaskProfile& profile, const InstanceType& type,
                const BandwidthDraw& bw);

// T = instr/cpu + seq/SeqBand + rnd/RndBand + in/InBand + out/OutBand with the
// bandwidths drawn from the type's calibrated distributions.
EmpiricalDistribution TaskTimeDistribution(const TaskProfile& profile,
                                           const InstanceType& type,
                                           size_t n, uint64_t seed);

// price * E[T] / 3600, hour rounding ignored.
double ExpectedOndemandCost(const InstanceType& type,
                            const EmpiricalDistribution& dist);

struct GammaFit {
  GammaParams params;
  bool degenerate = false;  // zero variance: caller should use a point mass
};

struct NormalFit {
  NormalParams params;
  bool degenerate = false;
};

// Method of moments (k = m^2/v, theta = v/m) with population variance.
GammaFit FitGamma(std::span<const double> samples);
NormalFit FitNormal(std::span<const double> samples);

}  // namespace spotflow
