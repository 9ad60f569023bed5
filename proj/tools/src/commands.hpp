#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace macromc::cli {

/// Process exit status. The values are a stable scripting contract.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitNoSignal = 3,
    kExitLowConfidence = 4,
    kExitIo = 5,
};

/// Environment variable naming the config file used when --config is absent.
inline constexpr const char* kConfigEnv = "MACROMC_CONFIG";
/// Environment variable overriding the directory of bundled data files.
inline constexpr const char* kDataDirEnv = "MACROMC_DATA_DIR";

/// Runs one command line (`args` excludes the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace macromc::cli
