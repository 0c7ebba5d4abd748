#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "swd/config.hpp"

namespace swd::cli {

struct RunOptions {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  int workers = 1;
};

/// Executes a config-driven command and returns the sidecar paths written.
std::vector<std::filesystem::path> run(const RunConfig& config, const RunOptions& options);

}  // namespace swd::cli
