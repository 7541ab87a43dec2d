#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qtune {

struct TraceRecord {
  std::uint64_t episode = 0;
  std::uint64_t step = 0;
  std::uint64_t action = 0;  // flat index of the configuration evaluated
  double reward = 0.0;
  double cum_reward = 0.0;  // within the episode
  double best_metric = 0.0;  // maximize-form, over the whole run
  double elapsed_ms = 0.0;
};

inline constexpr const char* kTraceHeader = "episode,step,action,reward,cum_reward,best_metric,elapsed_ms";

struct Trace {
  std::vector<TraceRecord> records;

  // With `timing` off the elapsed_ms column is written as 0 so that traces
  // are byte-reproducible.
  void write_csv(std::ostream& os, bool timing = false) const;
  std::string to_csv(bool timing = false) const;
  static Trace read_csv(std::istream& is);

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

}  // namespace qtune
