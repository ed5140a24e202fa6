#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ratbench/core.hpp"

namespace ratbench {

inline constexpr int kConfigSchemaVersion = 1;

/// Reads a design from config JSON. Relative file references (arrival
/// distribution files) resolve against `base_dir`.
ExperimentDesign parse_design(std::string_view json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentDesign load_design(const std::filesystem::path& path);

/// Config JSON with every strategy written as an explicit joint table, so a
/// re-load reproduces the design exactly.
std::string export_design(const ExperimentDesign& design);

}  // namespace ratbench
