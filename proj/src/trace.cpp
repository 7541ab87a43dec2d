#include "qtune/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "qtune/bench.hpp"
#include "qtune/error.hpp"

namespace qtune {
namespace {

template <typename T>
T parse_field(std::string_view text, std::size_t lineno, const char* name) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(lineno, std::string("bad ") + name + " field '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void Trace::write_csv(std::ostream& os, bool timing) const {
  os << kTraceHeader << '\n';
  for (const auto& r : records) {
    os << r.episode << ',' << r.step << ',' << r.action << ',' << format_double(r.reward) << ','
       << format_double(r.cum_reward) << ',' << format_double(r.best_metric) << ','
       << (timing ? format_double(r.elapsed_ms) : std::string("0")) << '\n';
  }
}

std::string Trace::to_csv(bool timing) const {
  std::ostringstream os;
  write_csv(os, timing);
  return os.str();
}

Trace Trace::read_csv(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError(0, "empty trace file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError(lineno, "unexpected trace header");
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    std::string_view f[7];
    for (int i = 0; i < 7; ++i) {
      auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (i == 6)) throw ParseError(lineno, "expected 7 fields");
      f[i] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    TraceRecord r;
    r.episode = parse_field<std::uint64_t>(f[0], lineno, "episode");
    r.step = parse_field<std::uint64_t>(f[1], lineno, "step");
    r.action = parse_field<std::uint64_t>(f[2], lineno, "action");
    r.reward = parse_field<double>(f[3], lineno, "reward");
    r.cum_reward = parse_field<double>(f[4], lineno, "cum_reward");
    r.best_metric = parse_field<double>(f[5], lineno, "best_metric");
    r.elapsed_ms = parse_field<double>(f[6], lineno, "elapsed_ms");
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace qtune
