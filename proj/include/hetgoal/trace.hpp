#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetgoal/posg.hpp"

namespace hetgoal {

struct TraceStep {
  std::array<std::pair<int, int>, 2> pos;  // post-step positions
  std::array<int, 2> actions{0, 0};
  std::array<double, 2> rewards{0.0, 0.0};
  std::vector<AchievedGoal> achieved;
  std::vector<CollectAttempt> collects;
};

struct EpisodeTrace {
  EnvKind env_kind = EnvKind::Reaching;
  int grid_side = 0;
  EpisodeConfig config;
  GoalMask ego_mask, tm_mask;
  std::array<std::pair<int, int>, 2> start_pos;
  std::vector<TraceStep> steps;

  double ego_return() const {
    double r = 0.0;
    for (const auto& s : steps) r += s.rewards[0];
    return r;
  }
};

// Framed binary episode log: little-endian, versioned header, one frame per
// episode. Also emits JSONL for inspection.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path, bool jsonl = false);
  ~TraceWriter();
  void write(const EpisodeTrace& trace);
  void close();

 private:
  struct Impl;
  Impl* impl_;
};

std::vector<EpisodeTrace> read_traces(const std::string& path);
std::string trace_to_json(const EpisodeTrace& trace);

}  // namespace hetgoal
