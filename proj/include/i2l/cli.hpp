#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "i2l/envs.hpp"

namespace i2l::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the i2l binary. args excludes the program name.
int run(const std::vector<std::string>& args);

// $I2L_RUN_DIR, or "run".
std::filesystem::path output_root();

// "default", or comma-separated gravity=/mass=/friction= overrides, e.g.
// "mass=2,friction=3". Throws ContractError on anything else.
envs::DynamicsConfig parse_setting(const std::string& text);
std::string setting_label(const envs::DynamicsConfig& config);

// Flat key=value files; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const std::map<std::string, std::string>& values);

struct CellSummary {
  std::string algorithm;
  std::string setting;
  int completed = 0;
  int failed = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population std over completed seeds
};
// Header "algo,setting,n,mean,std,failed".
void write_summary_csv(const std::filesystem::path& path, const std::vector<CellSummary>& rows);

}  // namespace i2l::cli
