#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace orbfb::cli {

inline constexpr const char* kVersion = "1.0.0";

// Executes one subcommand and returns the produced report (CSV or JSON)
// without touching the filesystem. Throws CLI11/std errors on bad usage.
struct CommandResult {
    std::string output;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
};
CommandResult execute(const std::vector<std::string>& args);

// 64-bit FNV-1a of the report bytes, as "fnv1a64:<hex>".
std::string digest(const std::string& bytes);

// Full entry point: parses argv, runs the subcommand, writes the report and
// its manifest, handles verify-manifest. Returns the process exit code.
int run(int argc, char** argv, std::ostream& console);

}  // namespace orbfb::cli
