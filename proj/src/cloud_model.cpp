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

#include "spotflow/cloud_model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spotflow/error.hpp"
#include "text_util.hpp"

namespace spotflow {

namespace text {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

}  // namespace text

namespace {

void CheckGamma(const GammaParams& g, const std::string& what) {
  if (!(g.k > 0.0) || !(g.theta > 0.0)) {
    throw InvalidArgument(what + ": gamma parameters must be positive");
  }
}

}  // namespace

Catalog::Catalog(std::vector<InstanceType> types) : types_(std::move(types)) {
  if (types_.empty()) throw InvalidArgument("catalog has no instance types");
  for (size_t i = 0; i < types_.size(); ++i) {
    auto& t = types_[i];
    t.id = static_cast<TypeId>(i);
    if (!(t.ondemand_price > 0.0)) {
      throw InvalidArgument(t.name + ": on-demand price must be positive");
    }
    if (!(t.cpu_speed > 0.0)) {
      throw InvalidArgument(t.name + ": cpu speed must be positive");
    }
    CheckGamma(t.seq_io, t.name + " seq_io");
    CheckGamma(t.net_in, t.name + " net_in");
    CheckGamma(t.net_out, t.name + " net_out");
    if (!(t.rnd_io.sigma >= 0.0) || !(t.rnd_io.mu > 0.0)) {
      throw InvalidArgument(t.name + ": rnd_io needs mu > 0 and sigma >= 0");
    }
    if (t.lag_ondemand < 0.0 || t.lag_spot < 0.0) {
      throw InvalidArgument(t.name + ": acquisition lag must be >= 0");
    }
    if (i > 0 && !(t.ondemand_price > types_[i - 1].ondemand_price)) {
      throw InvalidArgument("catalog must be strictly ascending in price: " +
                            types_[i - 1].name + " then " + t.name);
    }
    for (size_t j = 0; j < i; ++j) {
      if (types_[j].name == t.name) {
        throw InvalidArgument("duplicate instance type " + t.name);
      }
    }
  }
}

Catalog Catalog::DefaultM1() {
  std::vector<InstanceType> types = {
      {0, "m1.small", 0.06, 1e9, {129.3, 0.79}, {150.3, 50.0},
       {51.8, 1.8}, {107.3, 0.55}, 120.0, 420.0},
      {1, "m1.medium", 0.12, 2e9, {127.1, 0.80}, {128.9, 8.4},
       {279.9, 0.55}, {421.1, 0.27}, 120.0, 420.0},
      {2, "m1.large", 0.24, 4e9, {376.6, 0.28}, {172.9, 34.8},
       {6187.7, 0.44}, {571.4, 0.22}, 120.0, 420.0},
      {3, "m1.xlarge", 0.48, 8e9, {408.1, 0.26}, {1034.0, 146.4},
       {15313.4, 0.23}, {420.3, 0.29}, 120.0, 420.0},
  };
  return Catalog(std::move(types));
}

const InstanceType& Catalog::at(TypeId id) const {
  if (id < 0 || static_cast<size_t>(id) >= types_.size()) {
    throw InvalidArgument("unknown instance type id " + std::to_string(id));
  }
  return types_[static_cast<size_t>(id)];
}

std::optional<TypeId> Catalog::Find(std::string_view name) const {
  for (const auto& t : types_) {
    if (t.name == name) return t.id;
  }
  return std::nullopt;
}

Catalog ParseCatalog(std::string_view content, const std::string& source) {
  std::vector<InstanceType> types;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = text::StripComment(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (types.empty() && line.substr(0, 4) == "name") continue;
    auto f = text::Split(line, ',');
    if (f.size() != 13) {
      throw ParseError(source, line_no,
                       "expected 13 fields, got " + std::to_string(f.size()));
    }
    InstanceType t;
    t.name = std::string(f[0]);
    if (t.name.empty()) throw ParseError(source, line_no, "empty type name");
    double v[12];
    for (int i = 0; i < 12; ++i) {
      auto parsed = text::ParseDouble(f[static_cast<size_t>(i) + 1]);
      if (!parsed) {
        throw ParseError(source, line_no,
                         "bad number '" + std::string(f[static_cast<size_t>(i) + 1]) + "'");
      }
      v[i] = *parsed;
    }
    t.ondemand_price = v[0];
    t.cpu_speed = v[1];
    t.seq_io = {v[2], v[3]};
    t.rnd_io = {v[4], v[5]};
    t.net_in = {v[6], v[7]};
    t.net_out = {v[8], v[9]};
    t.lag_ondemand = v[10];
    t.lag_spot = v[11];
    types.push_back(std::move(t));
    try {
      // Validate incrementally so errors point at the offending line.
      Catalog check(types);
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (types.empty()) throw ParseError(source, line_no, "no instance types");
  return Catalog(std::move(types));
}

Catalog LoadCatalog(const std::string& path) {
  return ParseCatalog(text::ReadFile(path), path);
}

std::string FormatCatalog(const Catalog& catalog) {
  using text::Num;
  std::ostringstream out;
  out << "name,ondemand_price,cpu_speed,seq_k,seq_theta,rnd_mu,rnd_sigma,"
         "in_k,in_theta,out_k,out_theta,lag_ondemand,lag_spot\n";
  for (const auto& t : catalog.types()) {
    out << t.name << ',' << Num(t.ondemand_price) << ',' << Num(t.cpu_speed) << ','
        << Num(t.seq_io.k) << ',' << Num(t.seq_io.theta) << ',' << Num(t.rnd_io.mu) << ','
        << Num(t.rnd_io.sigma) << ',' << Num(t.net_in.k) << ',' << Num(t.net_in.theta) << ','
        << Num(t.net_out.k) << ',' << Num(t.net_out.theta) << ',' << Num(t.lag_ondemand)
        << ',' << Num(t.lag_spot) << '\n';
  }
  return out.str();
}

void ValidateProfile(const TaskProfile& p) {
  for (double v : {p.instr, p.seq_io_mb, p.rnd_io_mb, p.net_in_mb, p.net_out_mb}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("task profile fields must be finite and >= 0");
    }
  }
}

BandwidthSampler::BandwidthSampler(const InstanceType& type, uint64_t seed)
    : seq_rng_(DeriveSeed(seed, 1)),
      rnd_rng_(DeriveSeed(seed, 2)),
      in_rng_(DeriveSeed(seed, 3)),
      out_rng_(DeriveSeed(seed, 4)),
      seq_(type.seq_io.k, type.seq_io.theta),
      in_(type.net_in.k, type.net_in.theta),
      out_(type.net_out.k, type.net_out.theta),
      rnd_(type.rnd_io.mu, type.rnd_io.sigma) {}

BandwidthDraw BandwidthSampler::Next() {
  // Zero or negative draws are resampled: they would divide by zero, and
  // the normal's negative tail is not a physical bandwidth.
  BandwidthDraw d;
  do { d.seq = seq_(seq_rng_); } while (!(d.seq > 0.0));
  do { d.rnd = rnd_(rnd_rng_); } while (!(d.rnd > 0.0));
  do { d.in = in_(in_rng_); } while (!(d.in > 0.0));
  do { d.out = out_(out_rng_); } while (!(d.out > 0.0));
  return d;
}

double TaskTime(const TaskProfile& p, const InstanceType& type,
                const BandwidthDraw& bw) {
  return p.instr / type.cpu_speed + p.seq_io_mb / bw.seq +
         p.rnd_io_mb / bw.rnd + p.net_in_mb / bw.in + p.net_out_mb / bw.out;
}

EmpiricalDistribution TaskTimeDistribution(const TaskProfile& profile,
                                           const InstanceType& type, size_t n,
                                           uint64_t seed) {
  ValidateProfile(profile);
  if (n < 2) throw InvalidArgument("sample count must be >= 2");
  BandwidthSampler sampler(type, seed);
  std::vector<double> out(n);
  for (double& s : out) s = TaskTime(profile, type, sampler.Next());
  return EmpiricalDistribution(std::move(out), seed);
}

double ExpectedOndemandCost(const InstanceType& type,
                            const EmpiricalDistribution& dist) {
  return type.ondemand_price * dist.Mean() / 3600.0;
}

GammaFit FitGamma(std::span<const double> samples) {
  if (samples.size() < 2) throw InvalidArgument("fit needs >= 2 samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= n;
  GammaFit fit;
  if (!(var > 0.0) || !(mean > 0.0)) {
    fit.degenerate = true;
    fit.params = {1.0, mean};
    return fit;
  }
  fit.params = {mean * mean / var, var / mean};
  return fit;
}

NormalFit FitNormal(std::span<const double> samples) {
  if (samples.size() < 2) throw InvalidArgument("fit needs >= 2 samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= n;
  NormalFit fit;
  fit.params = {mean, std::sqrt(var)};
  fit.degenerate = !(var > 0.0);
  return fit;
}

}  // namespace spotflow
