#include "scmix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace scmix {

namespace {

void require_targets_consistent(std::span<const TargetTriple> targets) {
  if (targets.empty()) throw InvalidArgument("at least one target is required");
  for (const auto& t : targets) {
    t.validate();
    require_same_extent(t.image, targets[0].image, "target images");
    if (t.pseudo_labels.num_classes() != targets[0].pseudo_labels.num_classes()) {
      throw ShapeMismatch("targets disagree on class count");
    }
  }
}

GridMask single_cell_mask(int height, int width) {
  return GridMask(GridGeometry(height, width, 1, 1), 1, {1});
}

// All k-subsets of `items` (ascending input gives ascending subsets).
std::vector<std::vector<std::uint16_t>> combinations(
    const std::vector<std::uint16_t>& items, int k) {
  std::vector<std::vector<std::uint16_t>> out;
  const int n = static_cast<int>(items.size());
  if (k < 0 || k > n) return out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::vector<std::uint16_t> combo;
    combo.reserve(idx.size());
    for (int i : idx) combo.push_back(items[static_cast<std::size_t>(i)]);
    out.push_back(std::move(combo));
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t cap = kEnumerationLimit + 1;
  if (a == 0 || b == 0) return 0;
  if (a >= cap || b >= cap || a > cap / b) return cap;
  return std::min(a * b, cap);
}

std::vector<std::pair<int, int>> grid_dim_pairs(const std::vector<int>& g) {
  std::vector<int> values = g;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<std::pair<int, int>> pairs;
  for (int gh : values) {
    for (int gv : values) pairs.emplace_back(gh, gv);
  }
  return pairs;
}

template <class T>
void append_bytes(std::string& out, std::span<const T> values) {
  out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(T));
}

}  // namespace

void TargetTriple::validate() const {
  require_same_extent(image, pseudo_labels, "target image vs pseudo-labels");
  if (!(confidence >= 0.0f && confidence <= 1.0f)) {
    throw InvalidArgument("target confidence " + std::to_string(confidence) +
                          " outside [0,1]");
  }
}

LabeledImage::LabeledImage(ImageTensor image_in, LabelMap labels_in)
    : image(std::move(image_in)), labels(std::move(labels_in)),
      one_hot(one_hot_encode(labels, labels.num_classes())) {
  require_same_extent(image, labels, "source image vs labels");
}

ProvenanceMap::ProvenanceMap(int height, int width, std::vector<std::uint16_t> values)
    : Grid(height, width, 1, std::move(values)) {}

const char* mixer_name(Mixer mixer) {
  switch (mixer) {
    case Mixer::kNone: return "none";
    case Mixer::kCutMix: return "cutmix";
    case Mixer::kClassMix: return "classmix";
    case Mixer::kSCMix: return "scmix";
  }
  return "unknown";
}

Mixer parse_mixer(const std::string& name) {
  if (name == "none") return Mixer::kNone;
  if (name == "cutmix") return Mixer::kCutMix;
  if (name == "classmix") return Mixer::kClassMix;
  if (name == "scmix") return Mixer::kSCMix;
  throw InvalidArgument("unknown mixer '" + name +
                        "' (expected none, cutmix, classmix or scmix)");
}

void MixParams::validate() const {
  if (mixed_targets < 1) {
    throw ConfigError("mixing.mixed_targets: must satisfy N_c >= 1");
  }
  if (grid_candidates.empty()) {
    throw ConfigError("mixing.grid_candidates: G must be nonempty");
  }
  for (int g : grid_candidates) {
    if (g < 1) throw ConfigError("mixing.grid_candidates: entries must be >= 1");
  }
}

AugmentParams AugmentParams::identity() {
  AugmentParams p;
  p.jitter_scale = 0.0;
  p.jitter_brightness = 0.0;
  p.blur_probability = 0.0;
  return p;
}

void AugmentParams::validate() const {
  if (!(jitter_scale >= 0.0 && jitter_scale <= 1.0)) {
    throw ConfigError("augment.jitter_scale: must satisfy 0 <= s <= 1");
  }
  if (!(jitter_brightness >= 0.0 && jitter_brightness <= 1.0)) {
    throw ConfigError("augment.jitter_brightness: must satisfy 0 <= b <= 1");
  }
  if (!(blur_probability >= 0.0 && blur_probability <= 1.0)) {
    throw ConfigError("augment.blur_probability: must satisfy 0 <= p <= 1");
  }
  if (!(blur_sigma_min > 0.0 && blur_sigma_min <= blur_sigma_max)) {
    throw ConfigError("augment.blur_sigma_min/max: must satisfy 0 < min <= max");
  }
}

CompoundTarget fuse_compound_targets(std::span<const TargetTriple> targets,
                                     const GridMask& mask) {
  require_targets_consistent(targets);
  require_same_extent(targets[0].image, mask, "target vs grid mask");
  const int h = mask.height();
  const int w = mask.width();
  const int c = targets[0].pseudo_labels.num_classes();
  std::vector<float> image(static_cast<std::size_t>(h) * w * 3);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(h) * w * c);
  std::vector<float> weights(static_cast<std::size_t>(h) * w);
  std::vector<std::uint16_t> index(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint16_t k = mask(y, x);
      if (k < 1 || k > targets.size()) {
        throw InvalidArgument("grid mask value " + std::to_string(k) +
                              " has no matching target (have " +
                              std::to_string(targets.size()) + ")");
      }
      const TargetTriple& t = targets[k - 1];
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      for (int ch = 0; ch < 3; ++ch) image[3 * p + ch] = t.image(y, x, ch);
      for (int cl = 0; cl < c; ++cl) labels[p * c + cl] = t.pseudo_labels(y, x, cl);
      weights[p] = t.confidence;
      index[p] = k;
    }
  }
  return CompoundTarget{ImageTensor(h, w, std::move(image)),
                        OneHotLabel(h, w, c, std::move(labels)),
                        WeightMap(h, w, std::move(weights)), std::move(index)};
}

MixedSample class_mix_fuse(const ImageTensor& source,
                           const OneHotLabel& source_labels,
                           const CompoundTarget& compound,
                           const ClassMask& mask) {
  require_same_extent(source, source_labels, "source vs labels");
  require_same_extent(source, compound.image, "source vs compound target");
  require_same_extent(source, mask, "source vs class mask");
  if (source_labels.num_classes() != compound.labels.num_classes()) {
    throw ShapeMismatch("source and compound labels disagree on class count");
  }
  const int h = source.height();
  const int w = source.width();
  const int c = source_labels.num_classes();
  std::vector<float> image(static_cast<std::size_t>(h) * w * 3);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(h) * w * c);
  std::vector<float> weights(static_cast<std::size_t>(h) * w);
  std::vector<std::uint16_t> provenance(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const bool from_source = mask(y, x) != 0;
      for (int ch = 0; ch < 3; ++ch) {
        image[3 * p + ch] = from_source ? source(y, x, ch) : compound.image(y, x, ch);
      }
      for (int cl = 0; cl < c; ++cl) {
        labels[p * c + cl] =
            from_source ? source_labels(y, x, cl) : compound.labels(y, x, cl);
      }
      weights[p] = from_source ? 1.0f : compound.weights(y, x);
      provenance[p] = from_source ? 0 : compound.source_index[p];
    }
  }
  return MixedSample{ImageTensor(h, w, std::move(image)),
                     OneHotLabel(h, w, c, std::move(labels)),
                     WeightMap(h, w, std::move(weights)),
                     ProvenanceMap(h, w, std::move(provenance))};
}

MixedSample scmix(const LabeledImage& source,
                  std::span<const TargetTriple> targets, const MixParams& params,
                  const RngStream& base) {
  params.validate();
  if (targets.size() != static_cast<std::size_t>(params.mixed_targets)) {
    throw InvalidArgument("scmix needs exactly N_c=" +
                          std::to_string(params.mixed_targets) + " targets, got " +
                          std::to_string(targets.size()));
  }
  require_same_extent(source.image, targets[0].image, "source vs targets");
  RngStream dims_stream = base.derive(StreamPurpose::kGridDims);
  RngStream values_stream = base.derive(StreamPurpose::kGridValues);
  RngStream class_stream = base.derive(StreamPurpose::kClassSubset);

  const auto [gh, gv] = sample_grid_dims(params.grid_candidates, dims_stream);
  const GridGeometry geometry(source.image.height(), source.image.width(), gh, gv);
  const GridMask grid = make_grid_mask(geometry, params.mixed_targets, values_stream);
  const CompoundTarget compound = fuse_compound_targets(targets, grid);
  const ClassMask classes =
      build_class_mask(source.labels, geometry, params.mixed_targets, class_stream);
  return class_mix_fuse(source.image, source.one_hot, compound, classes);
}

MixedSample classmix_single(const LabeledImage& source,
                            const TargetTriple& target, const RngStream& base) {
  require_same_extent(source.image, target.image, "source vs target");
  RngStream class_stream = base.derive(StreamPurpose::kClassSubset);
  const int h = source.image.height();
  const int w = source.image.width();
  const GridGeometry whole(h, w, 1, 1);
  auto present = classes_per_cell(source.labels, whole);
  const int k = classes_to_select(static_cast<int>(present[0].size()), 2);
  std::vector<std::vector<std::uint16_t>> selection{
      select_classes(std::move(present[0]), k, class_stream)};
  const ClassMask mask = class_mask_from_selection(source.labels, whole, selection);
  const CompoundTarget compound =
      fuse_compound_targets(std::span<const TargetTriple>(&target, 1),
                            single_cell_mask(h, w));
  return class_mix_fuse(source.image, source.one_hot, compound, mask);
}

CutRect sample_cutmix_rect(int height, int width, RngStream& stream,
                           double area_min, double area_max, int* redraws) {
  if (!(area_min >= 0.0 && area_min <= area_max && area_max <= 1.0)) {
    throw InvalidArgument("cutmix area range must satisfy 0 <= min <= max <= 1");
  }
  int rejected = 0;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double area = stream.uniform_real(area_min, area_max);
    const double side = std::sqrt(area);
    CutRect r;
    r.height = static_cast<int>(std::lround(height * side));
    r.width = static_cast<int>(std::lround(width * side));
    if (r.height < 1 || r.width < 1) {
      ++rejected;
      continue;
    }
    r.y0 = static_cast<int>(stream.uniform_int(0, height - r.height));
    r.x0 = static_cast<int>(stream.uniform_int(0, width - r.width));
    if (redraws) *redraws = rejected;
    return r;
  }
  throw Error("cutmix rectangle stayed empty after 64 draws");
}

MixedSample cutmix_with_rect(const LabeledImage& source,
                             const TargetTriple& target, const CutRect& rect) {
  const int h = source.image.height();
  const int w = source.image.width();
  if (rect.height < 1 || rect.width < 1 || rect.y0 < 0 || rect.x0 < 0 ||
      rect.y0 + rect.height > h || rect.x0 + rect.width > w) {
    throw InvalidArgument("cutmix rectangle is empty or outside the image");
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(h) * w, 0);
  for (int y = rect.y0; y < rect.y0 + rect.height; ++y) {
    for (int x = rect.x0; x < rect.x0 + rect.width; ++x) {
      mask[static_cast<std::size_t>(y) * w + x] = 1;
    }
  }
  const CompoundTarget compound = fuse_compound_targets(
      std::span<const TargetTriple>(&target, 1), single_cell_mask(h, w));
  return class_mix_fuse(source.image, source.one_hot, compound,
                        ClassMask(h, w, std::move(mask)));
}

MixedSample cutmix_single(const LabeledImage& source, const TargetTriple& target,
                          const RngStream& base) {
  require_same_extent(source.image, target.image, "source vs target");
  RngStream stream = base.derive(StreamPurpose::kCutMix);
  const CutRect rect =
      sample_cutmix_rect(source.image.height(), source.image.width(), stream);
  return cutmix_with_rect(source, target, rect);
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("blur sigma must be positive");
  const int radius = static_cast<int>(std::ceil(2.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
  return taps;
}

ImageTensor gaussian_blur(const ImageTensor& image, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = image.height();
  const int w = image.width();
  std::vector<double> horizontal(image.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xx = std::clamp(x + i, 0, w - 1);
          acc += taps[static_cast<std::size_t>(i + radius)] * image(y, xx, ch);
        }
        horizontal[image.index(y, x, ch)] = acc;
      }
    }
  }
  std::vector<float> out(image.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int yy = std::clamp(y + i, 0, h - 1);
          acc += taps[static_cast<std::size_t>(i + radius)] *
                 horizontal[image.index(yy, x, ch)];
        }
        out[image.index(y, x, ch)] =
            std::clamp(static_cast<float>(acc), 0.0f, 1.0f);
      }
    }
  }
  return ImageTensor(h, w, std::move(out));
}

ImageTensor post_augment(const ImageTensor& image, const AugmentParams& params,
                         const RngStream& base) {
  params.validate();
  RngStream jitter = base.derive(StreamPurpose::kJitter);
  RngStream blur = base.derive(StreamPurpose::kBlur);
  double gains[3];
  for (double& g : gains) {
    g = jitter.uniform_real(1.0 - params.jitter_scale, 1.0 + params.jitter_scale);
  }
  const double offset =
      jitter.uniform_real(-params.jitter_brightness, params.jitter_brightness);

  std::vector<float> out(image.size());
  const auto in = image.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = in[i] * gains[i % 3] + offset;
    out[i] = std::clamp(static_cast<float>(v), 0.0f, 1.0f);
  }
  ImageTensor jittered(image.height(), image.width(), std::move(out));
  if (params.blur_probability > 0.0 && blur.next_unit() < params.blur_probability) {
    const double sigma = blur.uniform_real(params.blur_sigma_min, params.blur_sigma_max);
    return gaussian_blur(jittered, sigma);
  }
  return jittered;
}

std::string canonical_bytes(const MixedSample& sample) {
  std::string out;
  const std::int32_t dims[3] = {sample.image.height(), sample.image.width(),
                                sample.labels.num_classes()};
  out.append(reinterpret_cast<const char*>(dims), sizeof(dims));
  append_bytes(out, sample.image.values());
  append_bytes(out, sample.labels.values());
  append_bytes(out, sample.weights.values());
  return out;
}

std::uint64_t count_draw_combinations(const LabeledImage& source,
                                      std::span<const TargetTriple> targets,
                                      const MixParams& params, Mixer mixer) {
  const int h = source.image.height();
  const int w = source.image.width();
  switch (mixer) {
    case Mixer::kClassMix: {
      const auto present = classes_per_cell(source.labels, GridGeometry(h, w, 1, 1));
      const int n = static_cast<int>(present[0].size());
      return saturating_mul(targets.size(), binomial(n, classes_to_select(n, 2)));
    }
    case Mixer::kSCMix: {
      params.validate();
      std::uint64_t total = 0;
      for (const auto& [gh, gv] : grid_dim_pairs(params.grid_candidates)) {
        const GridGeometry geometry(h, w, gh, gv);
        std::uint64_t n = 1;
        for (int cell = 0; cell < geometry.cell_count(); ++cell) {
          n = saturating_mul(n, static_cast<std::uint64_t>(params.mixed_targets));
        }
        for (const auto& cell : classes_per_cell(source.labels, geometry)) {
          const int c = static_cast<int>(cell.size());
          n = saturating_mul(n, binomial(c, classes_to_select(c, params.mixed_targets)));
        }
        total = std::min<std::uint64_t>(total + n, kEnumerationLimit + 1);
      }
      return total;
    }
    default:
      throw InvalidArgument(std::string("enumeration is not defined for mixer ") +
                            mixer_name(mixer));
  }
}

ReachableSet enumerate_reachable(const LabeledImage& source,
                                 std::span<const TargetTriple> targets,
                                 const MixParams& params, Mixer mixer) {
  require_targets_consistent(targets);
  const std::uint64_t combos = count_draw_combinations(source, targets, params, mixer);
  if (combos > kEnumerationLimit) {
    throw CombinatorialLimit("enumeration would visit more than " +
                             std::to_string(kEnumerationLimit) + " draw combinations");
  }
  const int h = source.image.height();
  const int w = source.image.width();
  ReachableSet out;

  if (mixer == Mixer::kClassMix) {
    const GridGeometry whole(h, w, 1, 1);
    const auto present = classes_per_cell(source.labels, whole);
    const int k = classes_to_select(static_cast<int>(present[0].size()), 2);
    const auto subsets = combinations(present[0], k);
    for (const auto& target : targets) {
      const CompoundTarget compound = fuse_compound_targets(
          std::span<const TargetTriple>(&target, 1), single_cell_mask(h, w));
      for (const auto& subset : subsets) {
        const ClassMask mask = class_mask_from_selection(source.labels, whole, {subset});
        out.insert(canonical_bytes(
            class_mix_fuse(source.image, source.one_hot, compound, mask)));
      }
    }
    return out;
  }

  // SCMix
  const int nc = params.mixed_targets;
  if (targets.size() != static_cast<std::size_t>(nc)) {
    throw InvalidArgument("SCMix enumeration needs exactly N_c targets");
  }
  for (const auto& [gh, gv] : grid_dim_pairs(params.grid_candidates)) {
    const GridGeometry geometry(h, w, gh, gv);
    const int cells = geometry.cell_count();
    std::vector<std::vector<std::vector<std::uint16_t>>> cell_subsets;
    for (const auto& present : classes_per_cell(source.labels, geometry)) {
      cell_subsets.push_back(combinations(
          present, classes_to_select(static_cast<int>(present.size()), nc)));
    }
    std::vector<std::uint16_t> assignment(static_cast<std::size_t>(cells), 1);
    while (true) {
      const CompoundTarget compound =
          fuse_compound_targets(targets, GridMask(geometry, nc, assignment));
      std::vector<std::size_t> choice(static_cast<std::size_t>(cells), 0);
      while (true) {
        std::vector<std::vector<std::uint16_t>> selection(static_cast<std::size_t>(cells));
        for (int cell = 0; cell < cells; ++cell) {
          selection[cell] = cell_subsets[cell][choice[cell]];
        }
        const ClassMask mask =
            class_mask_from_selection(source.labels, geometry, selection);
        out.insert(canonical_bytes(
            class_mix_fuse(source.image, source.one_hot, compound, mask)));
        int pos = 0;
        while (pos < cells && ++choice[pos] == cell_subsets[pos].size()) {
          choice[pos] = 0;
          ++pos;
        }
        if (pos == cells) break;
      }
      int pos = 0;
      while (pos < cells && ++assignment[pos] > nc) {
        assignment[pos] = 1;
        ++pos;
      }
      if (pos == cells) break;
    }
  }
  return out;
}

}  // namespace scmix
