#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace binfim_cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDomainError = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> nodes_per_axis;
};

void run_analyze(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void run_sweep_bins(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void run_conv_example(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void run_mc_validate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Loads the config, applies overrides, dispatches the command, and maps
/// exceptions to exit codes. `command` is one of analyze, sweep-bins,
/// conv-example, mc-validate.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& out_dir, const Overrides& overrides);

}  // namespace binfim_cli
