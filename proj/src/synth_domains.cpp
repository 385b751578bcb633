#include "scmix/synth_domains.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace scmix {

namespace {

using Rgb = std::array<float, 3>;

// Object hues of classes 1-3 are spaced widely enough that a 40 degree
// rotation keeps every color nearest its own class.
constexpr std::array<Rgb, kPaletteSize> kBaseColors = {{
    {0.45f, 0.50f, 0.40f},  // 0 background
    {0.85f, 0.30f, 0.25f},  // 1 disc
    {0.30f, 0.70f, 0.35f},  // 2 rectangle
    {0.30f, 0.40f, 0.85f},  // 3 stripe band
    {0.55f, 0.30f, 0.70f},  // 4 triangle
    {0.25f, 0.70f, 0.65f},  // 5 ring
    {0.90f, 0.55f, 0.15f},  // 6 cross
    {0.60f, 0.60f, 0.62f},  // 7 ellipse
}};

constexpr double kColorJitter = 0.06;

enum class ShapeKind { kDisc, kRectangle, kStripe, kTriangle, kRing, kCross, kEllipse };

ShapeKind shape_for_class(int c) {
  return static_cast<ShapeKind>((c - 1) % 7);
}

// Pixel-center membership test parameterized by five unit draws.
struct Shape {
  ShapeKind kind;
  std::array<double, 5> u;
  int height;
  int width;
  int cls = 0;

  bool contains(double px, double py) const {
    const double m = std::min(height, width);
    const double w = width;
    const double h = height;
    switch (kind) {
      case ShapeKind::kDisc: {
        const double r = (0.12 + 0.10 * u[0]) * m;
        const double cx = r + (w - 2 * r) * u[1];
        const double cy = r + (h - 2 * r) * u[2];
        return (px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r;
      }
      case ShapeKind::kRectangle: {
        const double rw = (0.25 + 0.20 * u[0]) * w;
        const double rh = (0.25 + 0.20 * u[1]) * h;
        const double x0 = (w - rw) * u[2];
        const double y0 = (h - rh) * u[3];
        return px >= x0 && px < x0 + rw && py >= y0 && py < y0 + rh;
      }
      case ShapeKind::kStripe: {
        const double theta = std::numbers::pi * u[0];
        const double offset = (-0.25 + 0.5 * u[1]) * m;
        const double thick = (0.10 + 0.08 * u[2]) * m;
        const double d = (px - w / 2) * std::cos(theta) +
                         (py - h / 2) * std::sin(theta) - offset;
        return std::abs(d) <= thick / 2;
      }
      case ShapeKind::kTriangle: {
        const double s = (0.15 + 0.10 * u[0]) * m;
        const double cx = s + (w - 2 * s) * u[1];
        const double cy = s + (h - 2 * s) * u[2];
        // Upward isoceles triangle: apex (cx, cy - s), base at cy + s.
        if (py < cy - s || py > cy + s) return false;
        const double half = s * (py - (cy - s)) / (2 * s);
        return std::abs(px - cx) <= half;
      }
      case ShapeKind::kRing: {
        const double r = (0.15 + 0.07 * u[0]) * m;
        const double cx = r + (w - 2 * r) * u[1];
        const double cy = r + (h - 2 * r) * u[2];
        const double d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy);
        return d2 <= r * r && d2 >= 0.3 * r * r;
      }
      case ShapeKind::kCross: {
        const double len = (0.15 + 0.10 * u[0]) * m;
        const double t = 0.3 * len;
        const double cx = len + (w - 2 * len) * u[1];
        const double cy = len + (h - 2 * len) * u[2];
        const double dx = std::abs(px - cx);
        const double dy = std::abs(py - cy);
        return (dx <= len && dy <= t) || (dy <= len && dx <= t);
      }
      case ShapeKind::kEllipse: {
        const double a = (0.15 + 0.10 * u[0]) * m;
        const double b = 0.5 * a;
        const double cx = a + (w - 2 * a) * u[1];
        const double cy = a + (h - 2 * a) * u[2];
        const double phi = std::numbers::pi * u[3];
        const double ex = (px - cx) * std::cos(phi) + (py - cy) * std::sin(phi);
        const double ey = -(px - cx) * std::sin(phi) + (py - cy) * std::cos(phi);
        return (ex * ex) / (a * a) + (ey * ey) / (b * b) <= 1.0;
      }
    }
    return false;
  }
};

Rgb rotate_hue(const Rgb& v, double degrees) {
  if (degrees == 0.0) return v;
  const double a = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double k = (1.0 - c) / 3.0;
  const double r = std::sqrt(1.0 / 3.0) * s;
  const double m0 = c + k, m1 = k - r, m2 = k + r;
  return {static_cast<float>(m0 * v[0] + m1 * v[1] + m2 * v[2]),
          static_cast<float>(m2 * v[0] + m0 * v[1] + m1 * v[2]),
          static_cast<float>(m1 * v[0] + m2 * v[1] + m0 * v[2])};
}

struct NormalizedSpec {
  std::array<double, 5> v;
};

NormalizedSpec normalize(const DomainSpec& s) {
  return {{s.brightness_shift / 0.5, s.hue_rotation / 180.0,
           std::log(s.contrast_scale), s.noise_sigma / 0.1,
           std::log(s.texture_frequency)}};
}

// Euclidean projection of y onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> y) {
  std::vector<double> sorted = y;
  std::sort(sorted.rbegin(), sorted.rend());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0) theta = t;
  }
  for (double& v : y) v = std::max(v - theta, 0.0);
  return y;
}

Split generate_split(const BenchmarkConfig& cfg, const DomainSpec& spec,
                     std::string name, int domain_id) {
  Split split;
  split.name = std::move(name);
  split.domain_id = domain_id;
  split.samples.reserve(static_cast<std::size_t>(cfg.samples_per_split));
  for (int i = 0; i < cfg.samples_per_split; ++i) {
    RngStream stream(cfg.seed, static_cast<std::uint64_t>(i),
                     StreamPurpose::kSceneGeneration,
                     static_cast<std::uint64_t>(domain_id));
    split.samples.push_back(generate_scene(spec, cfg.num_classes, cfg.height,
                                           cfg.width, stream, domain_id));
  }
  return split;
}

}  // namespace

void DomainSpec::validate(const std::string& where) const {
  auto fail = [&](const std::string& key, const std::string& rule) {
    throw ConfigError(where + "." + key + ": must satisfy " + rule);
  };
  if (!(brightness_shift >= -0.5 && brightness_shift <= 0.5)) {
    fail("brightness_shift", "-0.5 <= brightness_shift <= 0.5");
  }
  if (!std::isfinite(hue_rotation)) fail("hue_rotation", "finite value");
  if (!(contrast_scale > 0.0) || !std::isfinite(contrast_scale)) {
    fail("contrast_scale", "contrast_scale > 0");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    fail("noise_sigma", "noise_sigma >= 0");
  }
  if (!(texture_frequency > 0.0) || !std::isfinite(texture_frequency)) {
    fail("texture_frequency", "texture_frequency > 0");
  }
}

SceneSample generate_scene(const DomainSpec& spec, int num_classes, int height,
                           int width, RngStream stream, int domain_id) {
  spec.validate("domain");
  if (num_classes < 2) {
    throw ConfigError("classes: must satisfy C >= 2, got " +
                      std::to_string(num_classes));
  }
  if (num_classes > kPaletteSize) {
    throw ConfigError("classes: C=" + std::to_string(num_classes) +
                      " exceeds palette size " + std::to_string(kPaletteSize));
  }
  if (height < 8 || width < 8) {
    throw ConfigError("image size must be at least 8x8");
  }

  std::vector<Rgb> colors(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    for (int k = 0; k < 3; ++k) {
      const double jitter = stream.uniform_real(-kColorJitter, kColorJitter);
      colors[c][k] = static_cast<float>(
          std::clamp(kBaseColors[c][k] + jitter, 0.0, 1.0));
    }
  }

  std::vector<Shape> shapes;
  for (int c = num_classes - 1; c >= 1; --c) {
    Shape s{shape_for_class(c), {}, height, width, c};
    for (double& u : s.u) u = stream.next_unit();
    shapes.push_back(s);
  }
  const double phase_x = 2 * std::numbers::pi * stream.next_unit();
  const double phase_y = 2 * std::numbers::pi * stream.next_unit();

  std::vector<std::uint16_t> labels(static_cast<std::size_t>(height) * width, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      auto& l = labels[static_cast<std::size_t>(y) * width + x];
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (shapes[i].contains(px, py)) {
          l = static_cast<std::uint16_t>(shapes[i].cls);
        }
      }
    }
  }

  std::vector<float> pixels(static_cast<std::size_t>(height) * width * 3);
  const double two_pi = 2 * std::numbers::pi;
  for (int y = 0; y < height; ++y) {
    const double ty = std::sin(two_pi * spec.texture_frequency * y / height + phase_y);
    for (int x = 0; x < width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      Rgb v = colors[labels[p]];
      for (float& ch : v) ch = static_cast<float>(ch + spec.brightness_shift);
      v = rotate_hue(v, spec.hue_rotation);
      const double tx =
          std::sin(two_pi * spec.texture_frequency * x / width + phase_x);
      const double texture = 1.0 + kTextureAmplitude * tx * ty;
      for (int k = 0; k < 3; ++k) {
        double ch = (v[k] - 0.5) * spec.contrast_scale + 0.5;
        ch *= texture;
        pixels[3 * p + k] = static_cast<float>(ch);
      }
    }
  }
  if (spec.noise_sigma > 0.0) {
    for (float& v : pixels) {
      v = static_cast<float>(v + spec.noise_sigma * stream.normal());
    }
  }
  for (float& v : pixels) v = std::clamp(v, 0.0f, 1.0f);

  return SceneSample{ImageTensor(height, width, std::move(pixels)),
                     LabelMap(height, width, num_classes, std::move(labels)),
                     domain_id};
}

BenchmarkConfig BenchmarkConfig::defaults() {
  BenchmarkConfig cfg;
  DomainSpec dark;
  dark.brightness_shift = -0.25;
  DomainSpec hue;
  hue.hue_rotation = 40.0;
  DomainSpec noisy;
  noisy.noise_sigma = 0.08;
  cfg.targets = {dark, hue, noisy};
  cfg.open.hue_rotation = 20.0;
  cfg.open.noise_sigma = 0.05;
  return cfg;
}

double distance_to_hull(const DomainSpec& point,
                        const std::vector<DomainSpec>& hull) {
  if (hull.empty()) throw InvalidArgument("convex hull of no points");
  const auto q = normalize(point).v;
  std::vector<std::array<double, 5>> pts;
  for (const auto& s : hull) pts.push_back(normalize(s).v);
  const std::size_t n = pts.size();

  // Projected gradient on the simplex weights; the objective is a convex
  // quadratic, so a step of 1/L converges to the global minimum.
  double lipschitz = 0.0;
  for (const auto& p : pts) {
    for (double v : p) lipschitz += v * v;
  }
  const double step = 1.0 / std::max(lipschitz, 1e-12);
  std::vector<double> lambda(n, 1.0 / static_cast<double>(n));
  auto residual = [&](const std::vector<double>& l) {
    std::array<double, 5> r{};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 5; ++d) r[d] += l[i] * pts[i][d];
    }
    for (std::size_t d = 0; d < 5; ++d) r[d] -= q[d];
    return r;
  };
  for (int iter = 0; iter < 20000; ++iter) {
    const auto r = residual(lambda);
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      double g = 0.0;
      for (std::size_t d = 0; d < 5; ++d) g += pts[i][d] * r[d];
      next[i] = lambda[i] - step * g;
    }
    next = project_to_simplex(std::move(next));
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - lambda[i]);
    lambda = std::move(next);
    if (change < 1e-15) break;
  }
  const auto r = residual(lambda);
  double d2 = 0.0;
  for (double v : r) d2 += v * v;
  return std::sqrt(d2);
}

std::vector<std::string> BenchmarkConfig::validate() const {
  if (height < 8 || width < 8) {
    throw ConfigError("benchmark.height/width: must be >= 8");
  }
  if (num_classes < 2 || num_classes > kPaletteSize) {
    throw ConfigError("benchmark.classes: must satisfy 2 <= C <= " +
                      std::to_string(kPaletteSize));
  }
  if (samples_per_split < 1) {
    throw ConfigError("benchmark.samples_per_split: must be >= 1");
  }
  if (targets.empty()) {
    throw ConfigError("benchmark.target: at least one seen subdomain (N >= 1) required");
  }
  source.validate("benchmark.source");
  open.validate("benchmark.open");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i].validate("benchmark.target." + std::to_string(i + 1));
  }
  if (distance_to_hull(open, targets) < 1e-6) {
    throw ConfigError(
        "benchmark.open: must lie outside the convex hull of the seen "
        "subdomain parameters");
  }
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t j = i + 1; j < targets.size(); ++j) {
      if (targets[i] == targets[j]) {
        warnings.push_back("benchmark.target." + std::to_string(i + 1) +
                           " and benchmark.target." + std::to_string(j + 1) +
                           " are identical");
      }
    }
  }
  return warnings;
}

CompoundBenchmark::CompoundBenchmark(BenchmarkConfig config, Split source,
                                     std::vector<Split> targets, Split open,
                                     std::vector<std::string> warnings)
    : config_(std::move(config)), source_(std::move(source)),
      targets_(std::move(targets)), open_(std::move(open)),
      warnings_(std::move(warnings)) {
  for (const auto& split : targets_) {
    for (const auto& s : split.samples) target_images_.push_back(&s.image);
  }
}

CompoundBenchmark make_compound_benchmark(const BenchmarkConfig& cfg) {
  auto warnings = cfg.validate();
  Split source = generate_split(cfg, cfg.source, "source", 0);
  std::vector<Split> targets;
  for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
    targets.push_back(generate_split(cfg, cfg.targets[i],
                                     "target_" + std::to_string(i + 1),
                                     static_cast<int>(i + 1)));
  }
  Split open = generate_split(cfg, cfg.open, "open",
                              static_cast<int>(cfg.targets.size() + 1));
  return CompoundBenchmark(cfg, std::move(source), std::move(targets),
                           std::move(open), std::move(warnings));
}

}  // namespace scmix
