#pragma once

#include <string>
#include <vector>

namespace emscale::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInsufficientData = 4;
inline constexpr int kExitNumerical = 5;

// Subcommand entry points; args exclude the subcommand name itself.
int cmd_synth(const std::vector<std::string>& args);
int cmd_analyze(const std::vector<std::string>& args);
int cmd_classify(const std::vector<std::string>& args);
int cmd_sweep(const std::vector<std::string>& args);

// Dispatch on args[0]; this is what main() calls.
int run_cli(const std::vector<std::string>& args);

}  // namespace emscale::cli
