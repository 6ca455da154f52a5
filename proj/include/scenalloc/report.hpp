#pragma once

#include <string>
#include <vector>

namespace scenalloc::cli {

// Reads a backtest output directory (summary.json) and writes one CSV table
// per metric (rows = CVaR grid, columns = strategies) plus expense and
// net-return tables and a readable text summary. Returns the summary text.
std::string write_report(const std::string& backtest_dir, const std::string& out_dir,
                         const std::vector<std::string>& comments);

}  // namespace scenalloc::cli
