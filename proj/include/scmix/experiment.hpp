#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scmix/config.hpp"

namespace scmix {

struct ComparisonRow {
  std::string method;
  std::uint64_t seed = 0;
  double miou_compound = 0.0;
  double miou_open = 0.0;
  std::vector<std::optional<double>> per_class;  // compound split
};

struct MethodSummary {
  std::string method;
  int runs = 0;
  double mean_compound = 0.0;
  double std_compound = 0.0;  // sample standard deviation, 0 for one run
  double mean_open = 0.0;
  double std_open = 0.0;
};

struct ComparisonReport {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  int num_classes = 0;
  std::vector<ComparisonRow> rows;  // method-major, seed-minor
  std::vector<MethodSummary> summary;

  const MethodSummary& summary_for(const std::string& method) const;
};

std::vector<MethodSummary> summarize(const std::vector<ComparisonRow>& rows);

// Trains every method once per seed on one shared benchmark. `on_row` sees
// rows as they complete, in report order. Seeds of a method run on up to
// `jobs` threads.
ComparisonReport run_comparison(const ExperimentConfig& config,
                                const std::vector<Method>& methods,
                                const std::vector<std::uint64_t>& seeds,
                                const std::function<void(const ComparisonRow&)>& on_row = {},
                                int jobs = 1);

// Same as above on an already generated benchmark.
ComparisonReport run_comparison(const ExperimentConfig& config,
                                const CompoundBenchmark& benchmark,
                                const std::vector<Method>& methods,
                                const std::vector<std::uint64_t>& seeds,
                                const std::function<void(const ComparisonRow&)>& on_row = {},
                                int jobs = 1);

struct SweepRow {
  std::string value;                  // "3" or "2/4/8"
  std::optional<std::uint64_t> seed;  // empty on aggregate rows
  double miou_compound = 0.0;
  double miou_open = 0.0;
};

struct SweepReport {
  std::string config_hash;
  std::string axis;
  std::vector<std::uint64_t> seeds;
  // Per point: one row per seed, then the aggregate (mean) row.
  std::vector<SweepRow> rows;

  const SweepRow& aggregate_for(const std::string& value) const;
};

std::string sweep_point_label(const std::vector<int>& point);

// scmix-st at every sweep point, with the other settings held fixed.
SweepReport run_sweep(const ExperimentConfig& config,
                      const std::vector<std::uint64_t>& seeds, int jobs = 1);

std::string comparison_csv(const ComparisonReport& report);
std::string comparison_json(const ComparisonReport& report);
std::string sweep_csv(const SweepReport& report);
std::string sweep_json(const SweepReport& report);

// Random toy instance for reachability checks: uniform pixel values,
// uniform labels, random one-hot pseudo-labels and a confidence in
// {0.25, 0.5, 0.75, 1}.
struct ToyInstance {
  LabeledImage source;
  std::vector<TargetTriple> targets;
};

ToyInstance make_toy_instance(const EnumerateConfig& config, RngStream stream);

struct ReachabilityResult {
  std::size_t classmix_size = 0;
  std::size_t scmix_size = 0;
  std::size_t violations = 0;  // ClassMix outputs SCMix cannot produce
  bool strict = false;
};

// ClassMix against every target versus SCMix with the configured N_c and G.
ReachabilityResult check_reachability(const ToyInstance& instance,
                                      const EnumerateConfig& config);

// Fixed six-decimal rendering shared by every CSV report.
std::string format_metric(double v);

}  // namespace scmix
