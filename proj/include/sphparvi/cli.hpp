#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace sphparvi {

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumeric = 3 };

struct SelftestResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Kernel quadrature, gradient finite-difference and momentum-conservation
/// checks run against the library itself.
std::vector<SelftestResult> run_selftest();

/// Reads SPH_PARVI_THREADS (default 1) and applies it. Throws ConfigError
/// on a value that is not a positive integer.
int apply_thread_env();

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& config_path, const std::vector<std::string>& overrides,
                 std::ostream& out, std::ostream& err);
int cmd_selftest(std::ostream& out);

}  // namespace sphparvi
