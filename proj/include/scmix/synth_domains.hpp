#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scmix/rng.hpp"
#include "scmix/tensor.hpp"

namespace scmix {

// Photometric parameters of one synthetic domain.
struct DomainSpec {
  double brightness_shift = 0.0;  // additive, in [-0.5, 0.5]
  double hue_rotation = 0.0;      // degrees, rotation about the gray axis
  double contrast_scale = 1.0;    // around mid-gray, > 0
  double noise_sigma = 0.0;       // additive Gaussian, >= 0
  double texture_frequency = 3.0; // sinusoidal modulation cycles per image

  void validate(const std::string& where) const;
  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

struct SceneSample {
  ImageTensor image;
  LabelMap labels;
  int domain_id = 0;
};

// Maximum number of classes the renderer has colors and shapes for.
inline constexpr int kPaletteSize = 8;
inline constexpr double kTextureAmplitude = 0.12;

// Renders class 0 as background and classes C-1..1 as shapes on top of each
// other (class 1 ends up topmost), then applies brightness, hue, contrast,
// texture modulation and noise, clipping to [0,1].
//
// Draw order on `stream`: 3 color-jitter draws per class (class 0 first),
// 5 geometry draws per shape (class C-1 first), 2 texture phases, then
// 2 draws per channel value of noise in row-major order when sigma > 0.
SceneSample generate_scene(const DomainSpec& spec, int num_classes, int height,
                           int width, RngStream stream, int domain_id = 0);

struct BenchmarkConfig {
  int height = 48;
  int width = 48;
  int num_classes = 4;
  DomainSpec source;
  std::vector<DomainSpec> targets;  // the N seen compound subdomains
  DomainSpec open;
  int samples_per_split = 100;
  std::uint64_t seed = 7;

  static BenchmarkConfig defaults();
  // Throws ConfigError; returns non-fatal warnings (duplicate subdomains).
  std::vector<std::string> validate() const;

  friend bool operator==(const BenchmarkConfig&, const BenchmarkConfig&) = default;
};

// Euclidean distance, in normalized parameter space, from `point` to the
// convex hull of `hull`.
double distance_to_hull(const DomainSpec& point,
                        const std::vector<DomainSpec>& hull);

struct Split {
  std::string name;
  int domain_id = 0;
  std::vector<SceneSample> samples;
};

// Source (labeled), N unlabeled target splits and the held-out open split.
// Target labels stay inside the benchmark for evaluation; training code reads
// targets through target_images() only.
class CompoundBenchmark {
 public:
  CompoundBenchmark(BenchmarkConfig config, Split source,
                    std::vector<Split> targets, Split open,
                    std::vector<std::string> warnings);
  CompoundBenchmark(const CompoundBenchmark&) = delete;
  CompoundBenchmark& operator=(const CompoundBenchmark&) = delete;
  CompoundBenchmark(CompoundBenchmark&&) = default;
  CompoundBenchmark& operator=(CompoundBenchmark&&) = default;

  const BenchmarkConfig& config() const { return config_; }
  const Split& source() const { return source_; }
  const Split& open() const { return open_; }
  std::size_t target_count() const { return targets_.size(); }
  // Images of every seen subdomain, concatenated in subdomain order.
  const std::vector<const ImageTensor*>& target_images() const { return target_images_; }
  // Evaluation-only access to labeled target splits.
  const Split& target_split_for_evaluation(std::size_t i) const { return targets_.at(i); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t split_count() const { return targets_.size() + 2; }

 private:
  BenchmarkConfig config_;
  Split source_;
  std::vector<Split> targets_;
  Split open_;
  std::vector<const ImageTensor*> target_images_;
  std::vector<std::string> warnings_;
};

CompoundBenchmark make_compound_benchmark(const BenchmarkConfig& cfg);

}  // namespace scmix
