#pragma once

namespace scenalloc::cli {

// Runs one subcommand: ingest, fixture, sdg train, sdg generate, validate,
// optimize, backtest, report. Exit codes: 0 success, 1 runtime failure
// (machine-readable error JSON on stderr), 2 usage.
int dispatch(int argc, const char* const* argv);

}  // namespace scenalloc::cli
