#include "tgrpo/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace tgrpo::diag {
namespace {

std::atomic<std::uint64_t> g_count{0};
std::atomic<bool> g_quiet{false};
std::mutex g_mutex;

bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

}  // namespace

void warn(std::string_view message) {
  const std::uint64_t n = g_count.fetch_add(1) + 1;
  if (g_quiet.load()) return;
  if (n > kVerboseWarnings && !is_power_of_two(n)) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::clog << "[tgrpo warning #" << n << "] " << message << '\n';
}

std::uint64_t warning_count() { return g_count.load(); }
void reset_warning_count() { g_count.store(0); }
void set_quiet(bool quiet) { g_quiet.store(quiet); }

}  // namespace tgrpo::diag
