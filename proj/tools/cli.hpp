#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlg::cli {

enum Exit { kOk = 0, kMismatch = 1, kInputError = 2, kCapExceeded = 3, kSolverFailure = 4 };

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

/// Runs one command line (program name excluded). Reports are echoed to
/// `out`, diagnostics go to `err`; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlg::cli
