#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scmix/errors.hpp"

namespace scmix {

inline constexpr std::uint16_t kIgnoreLabel = 255;

// Row-major H x W x C storage shared by every grid type. Grids are immutable
// after construction; producers fill a vector and hand it to a validating
// constructor.
template <class T>
class Grid {
 public:
  using value_type = T;

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  std::size_t size() const { return data_.size(); }
  std::span<const T> values() const { return data_; }

  std::size_t index(int y, int x, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }
  const T& operator()(int y, int x, int c = 0) const {
    return data_[index(y, x, c)];
  }

  // All channels of one pixel.
  std::span<const T> pixel(int y, int x) const {
    return std::span<const T>(data_).subspan(index(y, x, 0),
                                             static_cast<std::size_t>(channels_));
  }

  bool same_extent(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 protected:
  Grid() = default;
  Grid(int height, int width, int channels, std::vector<T> data)
      : height_(height), width_(width), channels_(channels),
        data_(std::move(data)) {
    if (height < 1 || width < 1 || channels < 1) {
      throw InvalidArgument("grid dimensions must be positive, got " +
                            std::to_string(height) + "x" + std::to_string(width) +
                            "x" + std::to_string(channels));
    }
    if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
      throw ShapeMismatch("grid payload has " + std::to_string(data_.size()) +
                          " values, expected " +
                          std::to_string(pixel_count() * channels));
    }
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

// RGB image with values in [0, 1].
class ImageTensor : public Grid<float> {
 public:
  static constexpr int kChannels = 3;
  ImageTensor() = default;
  ImageTensor(int height, int width);  // all zeros
  ImageTensor(int height, int width, std::vector<float> values);
};

// Per-pixel loss weights in [0, 1].
class WeightMap : public Grid<float> {
 public:
  WeightMap() = default;
  WeightMap(int height, int width, float fill);
  WeightMap(int height, int width, std::vector<float> values);
};

// Class indices in [0, num_classes) or kIgnoreLabel.
class LabelMap : public Grid<std::uint16_t> {
 public:
  LabelMap() = default;
  LabelMap(int height, int width, int num_classes,
           std::vector<std::uint16_t> labels);
  int num_classes() const { return num_classes_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int num_classes_ = 0;
};

// H x W x C indicator values; each pixel sums to 1, or 0 for ignored pixels.
class OneHotLabel : public Grid<std::uint8_t> {
 public:
  OneHotLabel() = default;
  OneHotLabel(int height, int width, int num_classes,
              std::vector<std::uint8_t> values);
  int num_classes() const { return channels(); }
  // Class index at the pixel, or kIgnoreLabel when the row is all zero.
  std::uint16_t class_at(int y, int x) const;
  LabelMap to_label_map() const;
};

// H x W x C per-pixel class probabilities; rows sum to 1 within 1e-6.
class ProbMap : public Grid<double> {
 public:
  ProbMap() = default;
  ProbMap(int height, int width, int num_classes, std::vector<double> values);
  int num_classes() const { return channels(); }
  double max_prob(int y, int x) const;
};

// Throws ShapeMismatch naming `what` when the spatial extents differ.
template <class A, class B>
void require_same_extent(const A& a, const B& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeMismatch(std::string(what) + ": extent " +
                        std::to_string(a.height()) + "x" +
                        std::to_string(a.width()) + " vs " +
                        std::to_string(b.height()) + "x" +
                        std::to_string(b.width()));
  }
}

OneHotLabel one_hot_encode(const LabelMap& labels, int num_classes);

// Exact byte comparison of the payloads, used where float equality would
// conflate -0.0 and 0.0.
template <class T>
bool bitwise_equal(const Grid<T>& a, const Grid<T>& b) {
  if (a.height() != b.height() || a.width() != b.width() ||
      a.channels() != b.channels()) {
    return false;
  }
  auto va = a.values();
  auto vb = b.values();
  return std::equal(
      reinterpret_cast<const std::byte*>(va.data()),
      reinterpret_cast<const std::byte*>(va.data() + va.size()),
      reinterpret_cast<const std::byte*>(vb.data()));
}

}  // namespace scmix
