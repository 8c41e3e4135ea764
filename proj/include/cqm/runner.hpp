#pragma once

#include <iosfwd>
#include <string>

#include "cqm/config.hpp"

namespace cqm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFlagged = 2;

/// Executes one configured run: writes CSV output plus a `<out>.manifest`
/// with the fully resolved config. Returns 0 on success, 2 when diagnostics
/// were flagged (ran, but suspicious), 1 on error. Messages go to `log`.
/// Relative output paths are placed under $CQMSIM_OUT_DIR when that is set.
int run(const SimConfig& cfg, std::ostream& log);

/// Resolved output path for a config (after defaulting and the environment
/// override). Exposed for tests.
std::string resolve_output_path(const SimConfig& cfg);

}  // namespace cqm
