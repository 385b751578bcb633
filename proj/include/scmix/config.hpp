#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scmix/discrepancy.hpp"
#include "scmix/mixing.hpp"
#include "scmix/synth_domains.hpp"
#include "scmix/trainer.hpp"

namespace scmix {

enum class SweepAxis { kMixedTargets, kGridCandidates };

const char* sweep_axis_name(SweepAxis axis);  // "nc", "grid"
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kMixedTargets;
  // One entry per sweep point; N_c points hold a single value.
  std::vector<std::vector<int>> values = {{1}, {2}, {3}, {4}, {5}};

  void validate() const;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

// Toy instances for exhaustive reachability enumeration.
struct EnumerateConfig {
  int height = 4;
  int width = 4;
  int num_classes = 2;
  int targets = 2;
  int instances = 20;
  int mixed_targets = 2;
  std::vector<int> grid_candidates = {1, 2};

  void validate() const;
  friend bool operator==(const EnumerateConfig&, const EnumerateConfig&) = default;
};

// File inputs of the augment subcommand. Relative paths resolve against the
// config file's directory.
struct AugmentInputs {
  std::string source_image;
  std::string source_label;
  std::vector<std::string> target_images;
  std::vector<std::string> target_probs;  // empty when a model supplies them
  bool apply_post_augment = false;

  friend bool operator==(const AugmentInputs&, const AugmentInputs&) = default;
};

struct ExperimentConfig {
  BenchmarkConfig benchmark = BenchmarkConfig::defaults();
  TrainConfig trainer;  // holds the mixing and augment sections
  ProxyDistanceOptions discrepancy;
  SweepConfig sweep;
  EnumerateConfig enumerate;
  AugmentInputs inputs;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::filesystem::path base_dir;  // directory of the parsed file, not emitted

  void validate() const;
};

bool same_settings(const ExperimentConfig& a, const ExperimentConfig& b);

// Line-oriented "key = value" text. "[section]" headers prefix the keys that
// follow with "section."; keys may also be written fully dotted. '#' starts a
// comment. Throws ConfigError naming the key on unknown keys, duplicates,
// malformed values, constraint violations and missing required sections.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::set<std::string>& required_sections = {});
ExperimentConfig parse_config_file(const std::filesystem::path& path,
                                   const std::set<std::string>& required_sections = {});

// Canonical text; parse_config_text(emit_config(c)) reproduces c.
std::string emit_config(const ExperimentConfig& config);

// Canonical text with the output directory reset to its default, so the
// same run written to different directories has the same provenance.
std::string emit_config_without_output(const ExperimentConfig& config);

// FNV-1a 64 of emit_config_without_output, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text, const std::string& key);

}  // namespace scmix
