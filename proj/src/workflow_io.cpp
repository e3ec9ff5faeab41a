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

#include <map>
#include <sstream>

#include "spotflow/error.hpp"
#include "spotflow/workflow_dag.hpp"
#include "text_util.hpp"

namespace spotflow {

WorkflowJob ParseWorkflow(std::string_view content, const std::string& source) {
  WorkflowJob job;
  std::map<std::string, TaskId, std::less<>> by_name;
  size_t line_no = 0;
  size_t pos = 0;
  bool saw_header = false;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = text::StripComment(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto f = text::SplitWhitespace(line);
    const auto& kw = f[0];
    auto number = [&](size_t i) {
      auto v = text::ParseDouble(f[i]);
      if (!v) throw ParseError(source, line_no, "bad number '" + std::string(f[i]) + "'");
      return *v;
    };
    if (kw == "workflow") {
      if (f.size() != 2) throw ParseError(source, line_no, "usage: workflow <class_id>");
      job.class_id = std::string(f[1]);
      saw_header = true;
    } else if (kw == "deadline") {
      if (f.size() != 2) throw ParseError(source, line_no, "usage: deadline <seconds>");
      job.deadline = number(1);
      if (!(job.deadline > 0.0)) throw ParseError(source, line_no, "deadline must be > 0");
    } else if (kw == "guarantee") {
      if (f.size() != 2) throw ParseError(source, line_no, "usage: guarantee <p>");
      job.guarantee_p = number(1);
      if (!(job.guarantee_p > 0.0 && job.guarantee_p <= 1.0)) {
        throw ParseError(source, line_no, "guarantee must lie in (0, 1]");
      }
    } else if (kw == "task") {
      if (f.size() != 7) {
        throw ParseError(source, line_no,
                         "usage: task <name> <instr> <seq_io> <rnd_io> <net_in> <net_out>");
      }
      const std::string name(f[1]);
      if (by_name.contains(name)) throw ParseError(source, line_no, "duplicate task " + name);
      TaskProfile p{number(2), number(3), number(4), number(5), number(6)};
      try {
        by_name[name] = job.AddTask(name, p);
      } catch (const Error& e) {
        throw ParseError(source, line_no, e.what());
      }
    } else if (kw == "edge") {
      if (f.size() != 3) throw ParseError(source, line_no, "usage: edge <from> <to>");
      auto a = by_name.find(f[1]);
      auto b = by_name.find(f[2]);
      if (a == by_name.end() || b == by_name.end()) {
        throw ParseError(source, line_no, "edge references unknown task");
      }
      try {
        job.AddEdge(a->second, b->second);
      } catch (const Error& e) {
        throw ParseError(source, line_no, e.what());
      }
    } else {
      throw ParseError(source, line_no, "unknown keyword '" + std::string(kw) + "'");
    }
  }
  if (!saw_header) throw ParseError(source, line_no, "missing 'workflow <class_id>' line");
  if (job.tasks.empty()) throw ParseError(source, line_no, "workflow has no tasks");
  try {
    return AssignIds(job);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
}

WorkflowJob LoadWorkflow(const std::string& path) {
  return ParseWorkflow(text::ReadFile(path), path);
}

std::string FormatWorkflow(const WorkflowJob& job) {
  using text::Num;
  std::ostringstream out;
  out << "workflow " << job.class_id << '\n';
  if (job.deadline > 0.0) out << "deadline " << Num(job.deadline) << '\n';
  out << "guarantee " << Num(job.guarantee_p) << '\n';
  for (const auto& t : job.tasks) {
    out << "task " << t.name << ' ' << Num(t.profile.instr) << ' ' << Num(t.profile.seq_io_mb)
        << ' ' << Num(t.profile.rnd_io_mb) << ' ' << Num(t.profile.net_in_mb) << ' '
        << Num(t.profile.net_out_mb) << '\n';
  }
  for (const auto& t : job.tasks) {
    for (TaskId s : t.successors) {
      out << "edge " << t.name << ' ' << job.tasks[static_cast<size_t>(s)].name << '\n';
    }
  }
  return out.str();
}

}  // namespace spotflow
