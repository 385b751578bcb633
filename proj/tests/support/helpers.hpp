#pragma once

#include <cstdint>
#include <vector>

#include "scmix/mixing.hpp"
#include "scmix/rng.hpp"
#include "scmix/tensor.hpp"

namespace scmix::testing {

inline ImageTensor random_image(int h, int w, RngStream& s) {
  std::vector<float> v(static_cast<std::size_t>(h) * w * 3);
  for (auto& x : v) x = static_cast<float>(s.next_unit());
  return ImageTensor(h, w, std::move(v));
}

inline LabelMap random_labels(int h, int w, int c, RngStream& s) {
  std::vector<std::uint16_t> v(static_cast<std::size_t>(h) * w);
  for (auto& x : v) x = static_cast<std::uint16_t>(s.uniform_int(0, c - 1));
  return LabelMap(h, w, c, std::move(v));
}

// Confidence strictly below 1 so weight 1 identifies source pixels.
inline std::vector<TargetTriple> random_targets(int n, int h, int w, int c,
                                                RngStream& s) {
  std::vector<TargetTriple> out;
  for (int i = 0; i < n; ++i) {
    ImageTensor img = random_image(h, w, s);
    OneHotLabel y = one_hot_encode(random_labels(h, w, c, s), c);
    out.push_back(TargetTriple{std::move(img), std::move(y),
                               static_cast<float>(0.05 + 0.9 * s.next_unit())});
  }
  return out;
}

inline LabeledImage random_source(int h, int w, int c, RngStream& s) {
  ImageTensor img = random_image(h, w, s);
  return LabeledImage(std::move(img), random_labels(h, w, c, s));
}

inline RngStream test_stream(std::uint64_t seed, std::uint64_t lane = 0) {
  return RngStream(seed, 0, StreamPurpose::kDataSampling, lane);
}

}  // namespace scmix::testing
