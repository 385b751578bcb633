#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scmix/masking.hpp"
#include "scmix/rng.hpp"
#include "scmix/tensor.hpp"

namespace scmix {

// A target image with its teacher pseudo-labels and scalar confidence.
struct TargetTriple {
  ImageTensor image;
  OneHotLabel pseudo_labels;
  float confidence = 0.0f;

  void validate() const;
};

// Labeled source image; the one-hot form is cached for fusion.
struct LabeledImage {
  ImageTensor image;
  LabelMap labels;
  OneHotLabel one_hot;

  LabeledImage(ImageTensor image, LabelMap labels);
};

// 0 = source pixel, k = target k (1-based).
class ProvenanceMap : public Grid<std::uint16_t> {
 public:
  ProvenanceMap() = default;
  ProvenanceMap(int height, int width, std::vector<std::uint16_t> values);
};

struct MixedSample {
  ImageTensor image;
  OneHotLabel labels;
  WeightMap weights;
  ProvenanceMap provenance;
};

// x', y', w' of the grid-fused compound target, plus the grid index per pixel.
struct CompoundTarget {
  ImageTensor image;
  OneHotLabel labels;
  WeightMap weights;
  std::vector<std::uint16_t> source_index;
};

enum class Mixer { kNone, kCutMix, kClassMix, kSCMix };

const char* mixer_name(Mixer mixer);
Mixer parse_mixer(const std::string& name);

struct MixParams {
  int mixed_targets = 3;                   // N_c
  std::vector<int> grid_candidates = {2, 4, 8};  // G
  Mixer baseline = Mixer::kSCMix;

  void validate() const;
  friend bool operator==(const MixParams&, const MixParams&) = default;
};

// Color jitter then optional Gaussian blur.
struct AugmentParams {
  double jitter_scale = 0.2;       // per-channel gain in [1-s, 1+s]
  double jitter_brightness = 0.1;  // offset in [-b, b], shared by channels
  double blur_probability = 0.5;
  double blur_sigma_min = 0.15;
  double blur_sigma_max = 1.15;

  static AugmentParams identity();
  void validate() const;
  friend bool operator==(const AugmentParams&, const AugmentParams&) = default;
};

struct CutRect {
  int y0 = 0;
  int x0 = 0;
  int height = 0;
  int width = 0;
  bool contains(int y, int x) const {
    return y >= y0 && y < y0 + height && x >= x0 && x < x0 + width;
  }
};

CompoundTarget fuse_compound_targets(std::span<const TargetTriple> targets,
                                     const GridMask& mask);

MixedSample class_mix_fuse(const ImageTensor& source,
                           const OneHotLabel& source_labels,
                           const CompoundTarget& compound,
                           const ClassMask& mask);

// Draw order: grid-dims stream (g_h, g_v), grid-values stream (cells
// row-major), class-subset stream (cells row-major). All three streams are
// derived from `base`.
MixedSample scmix(const LabeledImage& source,
                  std::span<const TargetTriple> targets, const MixParams& params,
                  const RngStream& base);

// Pastes ceil(c_s / 2) image-level source classes onto the target. Uses the
// class-subset stream derived from `base`, matching scmix with N_c = 1 and
// G = [1].
MixedSample classmix_single(const LabeledImage& source,
                            const TargetTriple& target, const RngStream& base);

// Area fraction a ~ U[area_min, area_max], side lengths round(H*sqrt(a)) and
// round(W*sqrt(a)), position uniform. Empty rectangles are redrawn (at most
// 64 attempts); `redraws` receives the number of rejected draws.
CutRect sample_cutmix_rect(int height, int width, RngStream& stream,
                           double area_min = 0.25, double area_max = 0.5,
                           int* redraws = nullptr);

MixedSample cutmix_with_rect(const LabeledImage& source,
                             const TargetTriple& target, const CutRect& rect);

MixedSample cutmix_single(const LabeledImage& source, const TargetTriple& target,
                          const RngStream& base);

// Normalized 1-D Gaussian taps for radius ceil(2 sigma).
std::vector<double> gaussian_kernel(double sigma);
// Separable blur with clamped borders.
ImageTensor gaussian_blur(const ImageTensor& image, double sigma);

// Jitter stream: 3 channel gains then the offset. Blur stream: the coin, then
// sigma when the coin lands.
ImageTensor post_augment(const ImageTensor& image, const AugmentParams& params,
                         const RngStream& base);

// Exact byte encoding of (image, labels, weights).
std::string canonical_bytes(const MixedSample& sample);

using ReachableSet = std::set<std::string>;

inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

// Number of draw combinations enumerate_reachable would visit.
std::uint64_t count_draw_combinations(const LabeledImage& source,
                                      std::span<const TargetTriple> targets,
                                      const MixParams& params, Mixer mixer);

// Every output the mixer can produce on these fixed inputs. SCMix visits
// all (g_h, g_v) in G x G, every cell assignment and every per-cell class
// subset; ClassMix visits every class subset against each given target.
// Throws CombinatorialLimit above kEnumerationLimit combinations.
ReachableSet enumerate_reachable(const LabeledImage& source,
                                 std::span<const TargetTriple> targets,
                                 const MixParams& params, Mixer mixer);

}  // namespace scmix
