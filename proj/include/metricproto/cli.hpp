#pragma once

namespace metricproto {

/// CLI entry point (subcommands: fit, predict, rates, verify, list-families).
/// Returns 0 on success, 1 on validation failure, 2 on I/O error.
int run_cli(int argc, const char* const* argv);

} // namespace metricproto
