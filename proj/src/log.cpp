#include "qtune/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace qtune {
namespace {

std::atomic<bool> g_quiet{false};
std::mutex g_mutex;

}  // namespace

void set_quiet(bool q) { g_quiet.store(q); }
bool quiet() { return g_quiet.load(); }

void log_warning(std::string_view message) {
  if (quiet()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "qtune: warning: " << message << '\n';
}

void log_info(std::string_view message) {
  if (quiet()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "qtune: " << message << '\n';
}

}  // namespace qtune
