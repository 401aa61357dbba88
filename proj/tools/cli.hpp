#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace homog::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,       // bad flags, unreadable or malformed configuration
  kInvalid = 2,     // flux validation or level-set condition failed
  kSolverFailure = 3,
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// "# homog <command> config_hash=<16 hex digits> seed=<seed>\n", where the
/// hash covers record.dump().
std::string header_comment(const std::string& command, const nlohmann::json& record,
                           std::uint64_t seed);

/// Runs one command line (without the program name). Files go to the
/// output directory, short summaries to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace homog::cli
