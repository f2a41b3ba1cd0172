#ifndef TGRPO_DIAGNOSTICS_HPP_
#define TGRPO_DIAGNOSTICS_HPP_

#include <cstdint>
#include <string_view>

namespace tgrpo::diag {

// Thread-safe warning sink on stderr. Every call is counted; the first
// kVerboseWarnings are printed, later ones only at powers of two.
inline constexpr std::uint64_t kVerboseWarnings = 16;

void warn(std::string_view message);

std::uint64_t warning_count();
void reset_warning_count();

// Silences stderr output (counting continues). Used by tests that provoke
// warnings on purpose.
void set_quiet(bool quiet);

}  // namespace tgrpo::diag

#endif  // TGRPO_DIAGNOSTICS_HPP_
