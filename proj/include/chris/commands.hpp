#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chris::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitSoftViolation = 2;  // constraint unmet, closest configuration used

/// Runs one command line (program name excluded), e.g.
/// {"simulate", "--trace", "t.csv", "--table", "table.csv", "--out", "run"}.
/// Every command writes its artifacts plus manifest.json into --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chris::cli
