#pragma once

#include <string_view>

namespace qtune {

// Messages go to stderr unless quiet mode is on. Thread-safe.
void set_quiet(bool quiet);
bool quiet();
void log_warning(std::string_view message);
void log_info(std::string_view message);

}  // namespace qtune
