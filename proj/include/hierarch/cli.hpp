#pragma once

// Command-line front end. Every subcommand emits JSON lines carrying a
// `kind` and a `schema` field. With --out, the records go to that file and a
// manifest is written next to it (<out>.manifest.json); `replay MANIFEST`
// re-runs the recorded command and checks the output digests.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hierarch::cli {

inline constexpr int kSchema = 1;
inline constexpr std::string_view kToolVersion = "hierarch 0.1.0";

/// `args` excludes the program name. Returns 0 on success, 1 on domain or
/// file errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace hierarch::cli
