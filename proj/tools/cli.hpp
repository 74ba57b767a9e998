#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "treetomo/error.hpp"

namespace treetomo::cli {

// Exit status for each error class; 1 is reserved for usage errors.
enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kFormat = 2,
  kInsufficientData = 3,
  kOutOfRange = 4,
  kInternal = 5,
};

int exit_code(ErrorCode code);

/// Runs one command. `args` excludes the program name. Artifacts go to the
/// --out directory when given, otherwise to `out`; errors go to `err` as a
/// single `error <Code> <message>` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treetomo::cli
