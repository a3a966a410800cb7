#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mfb/config.hpp"

namespace mfb {

/// One failed in-run assertion or aborted step; a row of failures.csv.
struct Failure {
    std::string subcommand;
    std::string check;
    std::string detail;
};

struct CommandResult {
    int exit_code = 0;
    std::vector<Failure> failures;
    std::vector<std::filesystem::path> files;  // artifacts written, in order
};

const std::vector<std::string>& subcommand_names();
bool is_subcommand(std::string_view name);

/// Runs a subcommand and writes its CSV artifacts under `out_dir`. Exit code 0 iff
/// every in-run assertion passed; otherwise 1 and failures.csv is written.
CommandResult run_command(std::string_view subcommand, const RunConfig& config, const std::filesystem::path& out_dir,
                          std::ostream& log);

/// failures.csv with columns subcommand,check,detail.
std::filesystem::path write_failures(const std::filesystem::path& out_dir, const std::string& digest,
                                     const std::vector<Failure>& failures);

}  // namespace mfb
