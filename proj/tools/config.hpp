#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "gotedit/harness.hpp"
#include "gotedit/regression.hpp"

namespace gotedit::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// A config file or flag that cannot be accepted. line is 0 for problems not
// tied to a particular line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct ExperimentConfig {
  StudyConfig study;
  std::string params_dir;  // empty: build a template model per sequence
  LossConfig loss;
  std::filesystem::path out_dir = "gotedit-out";
  bool timings = false;
};

// Parses `key = value` lines grouped under [section] headers. Blank lines and
// lines starting with # or ; are skipped. Keys may appear in any order; unset
// keys keep their defaults.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Sets one `section.key` as if it had appeared in a config file.
void set_field(ExperimentConfig& cfg, const std::string& name, const std::string& value);

// Every result-affecting key in canonical order, one `section.key = value`
// per line. The worker count and output location are left out.
std::string canonical_config(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const ExperimentConfig& cfg);

// Cross-field checks, reported as ConfigError naming the offending key.
void validate(const ExperimentConfig& cfg);

std::vector<Mode> parse_modes(const std::string& list);

}  // namespace gotedit::cli
