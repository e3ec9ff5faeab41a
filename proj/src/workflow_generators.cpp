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

// Synthetic workflows shaped after Montage, Ligo and Epigenomics. Stage
// profiles are rough magnitudes (Montage I/O heavy, Epigenomics CPU heavy,
// Ligo mixed) with a +-20% deterministic jitter per task.

#include <string>

#include "spotflow/error.hpp"
#include "spotflow/random.hpp"
#include "spotflow/workflow_dag.hpp"

namespace spotflow {

namespace {

class ProfileJitter {
 public:
  explicit ProfileJitter(uint64_t seed) : rng_(seed) {}

  TaskProfile operator()(const TaskProfile& base) {
    auto j = [&](double v) { return v * (0.8 + 0.4 * UniformUnit(rng_)); };
    return {j(base.instr), j(base.seq_io_mb), j(base.rnd_io_mb), j(base.net_in_mb),
            j(base.net_out_mb)};
  }

 private:
  Rng rng_;
};

// Stage magnitudes below are per unit; each generator scales them so that
// a task runs for minutes to about an hour on the cheapest m1 type.
TaskProfile Scaled(const TaskProfile& p, double k) {
  return {p.instr * k, p.seq_io_mb * k, p.rnd_io_mb * k, p.net_in_mb * k, p.net_out_mb * k};
}

std::string Indexed(const char* stem, int i) { return std::string(stem) + "_" + std::to_string(i); }

}  // namespace

WorkflowJob MakeMontage(int projections, uint64_t seed) {
  if (projections < 2) throw InvalidArgument("montage needs >= 2 projections");
  ProfileJitter jitter(DeriveSeed(seed, 0x6d6f6e));
  const TaskProfile project = Scaled({3e10, 1500, 800, 400, 200}, 30);
  const TaskProfile diff = Scaled({1e10, 600, 400, 150, 20}, 30);
  const TaskProfile concat = Scaled({5e9, 100, 50, 20, 10}, 30);
  const TaskProfile bgmodel = Scaled({4e10, 200, 100, 20, 10}, 30);
  const TaskProfile background = Scaled({2e10, 1200, 600, 300, 200}, 30);
  const TaskProfile imgtbl = Scaled({5e9, 300, 200, 50, 10}, 30);
  const TaskProfile add = Scaled({6e10, 4000, 1500, 800, 600}, 30);
  const TaskProfile shrink = Scaled({2e10, 800, 200, 50, 50}, 30);
  const TaskProfile jpeg = Scaled({1e10, 200, 50, 20, 30}, 30);

  WorkflowJob job;
  job.class_id = "montage_" + std::to_string(projections);
  std::vector<TaskId> proj;
  for (int i = 0; i < projections; ++i) proj.push_back(job.AddTask(Indexed("mProjectPP", i), jitter(project)));
  std::vector<TaskId> diffs;
  for (int i = 0; i + 1 < projections; ++i) {
    const TaskId d = job.AddTask(Indexed("mDiffFit", i), jitter(diff));
    job.AddEdge(proj[static_cast<size_t>(i)], d);
    job.AddEdge(proj[static_cast<size_t>(i) + 1], d);
    diffs.push_back(d);
  }
  const TaskId c = job.AddTask("mConcatFit", jitter(concat));
  for (TaskId d : diffs) job.AddEdge(d, c);
  const TaskId bg = job.AddTask("mBgModel", jitter(bgmodel));
  job.AddEdge(c, bg);
  const TaskId tbl = job.AddTask("mImgtbl", jitter(imgtbl));
  for (int i = 0; i < projections; ++i) {
    const TaskId b = job.AddTask(Indexed("mBackground", i), jitter(background));
    job.AddEdge(bg, b);
    job.AddEdge(proj[static_cast<size_t>(i)], b);
    job.AddEdge(b, tbl);
  }
  const TaskId a = job.AddTask("mAdd", jitter(add));
  job.AddEdge(tbl, a);
  const TaskId s = job.AddTask("mShrink", jitter(shrink));
  job.AddEdge(a, s);
  const TaskId jp = job.AddTask("mJPEG", jitter(jpeg));
  job.AddEdge(s, jp);
  return AssignIds(job);
}

WorkflowJob MakeLigo(int groups, int width, uint64_t seed) {
  if (groups < 1 || width < 1) throw InvalidArgument("ligo needs groups, width >= 1");
  ProfileJitter jitter(DeriveSeed(seed, 0x6c69676f));
  const TaskProfile tmplt = Scaled({1.5e11, 500, 300, 100, 50}, 10);
  const TaskProfile inspiral = Scaled({4e11, 1000, 600, 200, 50}, 10);
  const TaskProfile thinca = Scaled({2e10, 100, 50, 50, 20}, 10);
  const TaskProfile trigbank = Scaled({1e10, 100, 50, 30, 20}, 10);

  WorkflowJob job;
  job.class_id = "ligo_" + std::to_string(groups) + "x" + std::to_string(width);
  for (int g = 0; g < groups; ++g) {
    const std::string gs = std::to_string(g) + "_";
    const TaskId th1 = job.AddTask("Thinca1_" + std::to_string(g), jitter(thinca));
    const TaskId th2 = job.AddTask("Thinca2_" + std::to_string(g), jitter(thinca));
    for (int i = 0; i < width; ++i) {
      const TaskId tb = job.AddTask("TmpltBank_" + gs + std::to_string(i), jitter(tmplt));
      const TaskId in1 = job.AddTask("Inspiral1_" + gs + std::to_string(i), jitter(inspiral));
      job.AddEdge(tb, in1);
      job.AddEdge(in1, th1);
      const TaskId tr = job.AddTask("TrigBank_" + gs + std::to_string(i), jitter(trigbank));
      job.AddEdge(th1, tr);
      const TaskId in2 = job.AddTask("Inspiral2_" + gs + std::to_string(i), jitter(inspiral));
      job.AddEdge(tr, in2);
      job.AddEdge(in2, th2);
    }
  }
  return AssignIds(job);
}

WorkflowJob MakeEpigenomics(int lanes, uint64_t seed) {
  if (lanes < 1) throw InvalidArgument("epigenomics needs >= 1 lane");
  ProfileJitter jitter(DeriveSeed(seed, 0x65706967));
  const TaskProfile split = Scaled({5e10, 1000, 100, 1000, 50}, 5);
  const TaskProfile filter = Scaled({3e11, 200, 50, 20, 20}, 5);
  const TaskProfile sol2sanger = Scaled({1e11, 200, 50, 10, 10}, 5);
  const TaskProfile fastq2bfq = Scaled({1.5e11, 200, 50, 10, 10}, 5);
  const TaskProfile map = Scaled({8e11, 500, 200, 50, 20}, 5);
  const TaskProfile merge = Scaled({1e11, 800, 200, 20, 20}, 5);
  const TaskProfile index = Scaled({2e11, 600, 300, 20, 20}, 5);
  const TaskProfile pileup = Scaled({3e11, 800, 300, 20, 200}, 5);

  WorkflowJob job;
  job.class_id = "epigenomics_" + std::to_string(lanes);
  const TaskId s = job.AddTask("fastQSplit", jitter(split));
  const TaskId m = job.AddTask("mapMerge", jitter(merge));
  for (int i = 0; i < lanes; ++i) {
    TaskId prev = s;
    const std::pair<const char*, TaskProfile> stages[] = {
        {"filterContams", filter}, {"sol2sanger", sol2sanger}, {"fastq2bfq", fastq2bfq}, {"map", map}};
    for (const auto& [stem, base] : stages) {
      const TaskId t = job.AddTask(Indexed(stem, i), jitter(base));
      job.AddEdge(prev, t);
      prev = t;
    }
    job.AddEdge(prev, m);
  }
  const TaskId ix = job.AddTask("maqIndex", jitter(index));
  job.AddEdge(m, ix);
  const TaskId p = job.AddTask("pileup", jitter(pileup));
  job.AddEdge(ix, p);
  return AssignIds(job);
}

}  // namespace spotflow
