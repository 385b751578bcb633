#include "scmix/tensor.hpp"

#include <cmath>

namespace scmix {

namespace {

void check_unit_range(std::span<const float> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw InvalidArgument(std::string(what) + " value " + std::to_string(v) +
                            " at flat index " + std::to_string(i) +
                            " outside [0,1]");
    }
  }
}

}  // namespace

ImageTensor::ImageTensor(int height, int width)
    : Grid(height, width, kChannels,
           std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) *
                                  static_cast<std::size_t>(std::max(width, 0)) *
                                  kChannels,
                              0.0f)) {}

ImageTensor::ImageTensor(int height, int width, std::vector<float> values)
    : Grid(height, width, kChannels, std::move(values)) {
  check_unit_range(data_, "image");
}

WeightMap::WeightMap(int height, int width, float fill)
    : Grid(height, width, 1,
           std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) *
                                  static_cast<std::size_t>(std::max(width, 0)),
                              fill)) {
  check_unit_range(data_, "weight");
}

WeightMap::WeightMap(int height, int width, std::vector<float> values)
    : Grid(height, width, 1, std::move(values)) {
  check_unit_range(data_, "weight");
}

LabelMap::LabelMap(int height, int width, int num_classes,
                   std::vector<std::uint16_t> labels)
    : Grid(height, width, 1, std::move(labels)), num_classes_(num_classes) {
  if (num_classes < 1 || num_classes >= kIgnoreLabel) {
    throw InvalidArgument("label map class count " +
                          std::to_string(num_classes) + " out of range");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] != kIgnoreLabel && data_[i] >= num_classes) {
      throw InvalidLabel("label " + std::to_string(data_[i]) + " at pixel " +
                             std::to_string(i) + " is not below class count " +
                             std::to_string(num_classes),
                         static_cast<long>(i));
    }
  }
}

OneHotLabel::OneHotLabel(int height, int width, int num_classes,
                         std::vector<std::uint8_t> values)
    : Grid(height, width, num_classes, std::move(values)) {
  const auto c = static_cast<std::size_t>(num_classes);
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    int sum = 0;
    for (std::size_t k = 0; k < c; ++k) {
      const std::uint8_t v = data_[p * c + k];
      if (v > 1) {
        throw InvalidArgument("one-hot entry not in {0,1} at pixel " +
                              std::to_string(p));
      }
      sum += v;
    }
    if (sum > 1) {
      throw InvalidArgument("one-hot pixel " + std::to_string(p) +
                            " has more than one active class");
    }
  }
}

std::uint16_t OneHotLabel::class_at(int y, int x) const {
  const auto row = pixel(y, x);
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] != 0) return static_cast<std::uint16_t>(k);
  }
  return kIgnoreLabel;
}

LabelMap OneHotLabel::to_label_map() const {
  std::vector<std::uint16_t> labels(pixel_count());
  for (int y = 0; y < height(); ++y) {
    for (int x = 0; x < width(); ++x) {
      labels[index(y, x) / static_cast<std::size_t>(channels())] = class_at(y, x);
    }
  }
  return LabelMap(height(), width(), num_classes(), std::move(labels));
}

ProbMap::ProbMap(int height, int width, int num_classes,
                 std::vector<double> values)
    : Grid(height, width, num_classes, std::move(values)) {
  const auto c = static_cast<std::size_t>(num_classes);
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double v = data_[p * c + k];
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidArgument("probability at pixel " + std::to_string(p) +
                              " is negative or non-finite");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InvalidArgument("probabilities at pixel " + std::to_string(p) +
                            " sum to " + std::to_string(sum));
    }
  }
}

double ProbMap::max_prob(int y, int x) const {
  const auto row = pixel(y, x);
  return *std::max_element(row.begin(), row.end());
}

OneHotLabel one_hot_encode(const LabelMap& labels, int num_classes) {
  if (num_classes < 1) {
    throw InvalidArgument("class count must be positive");
  }
  const auto c = static_cast<std::size_t>(num_classes);
  std::vector<std::uint8_t> out(labels.pixel_count() * c, 0);
  const auto src = labels.values();
  for (std::size_t p = 0; p < src.size(); ++p) {
    const std::uint16_t v = src[p];
    if (v == kIgnoreLabel) continue;
    if (v >= num_classes) {
      throw InvalidLabel("label " + std::to_string(v) + " at pixel " +
                             std::to_string(p) + " is not below C=" +
                             std::to_string(num_classes),
                         static_cast<long>(p));
    }
    out[p * c + v] = 1;
  }
  return OneHotLabel(labels.height(), labels.width(), num_classes,
                     std::move(out));
}

}  // namespace scmix
