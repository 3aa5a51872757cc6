#pragma once

#include <filesystem>
#include <string>

#include "config.hpp"
#include "gotedit/harness.hpp"

namespace gotedit::cli {

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// "# config_hash=<hex> tool_version=<v>" followed by a newline.
std::string metadata_line(const ExperimentConfig& cfg);

std::string runs_csv(const ExperimentConfig& cfg, const StudyResult& result);
std::string timings_csv(const ExperimentConfig& cfg, const StudyResult& result);
std::string aggregate_csv(const ExperimentConfig& cfg, const StudyResult& result);
std::string summary_text(const ExperimentConfig& cfg, const StudyResult& result);

std::string csv_number(double v);

}  // namespace gotedit::cli
