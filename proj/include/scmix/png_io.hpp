#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "scmix/tensor.hpp"

namespace scmix {

// 8-bit conversion rule: stored = round(v * 255), loaded = stored / 255.
std::uint8_t to_u8(float v);

void write_png_rgb(const std::filesystem::path& path, const ImageTensor& image);
ImageTensor read_png_rgb(const std::filesystem::path& path);

// Raw 8-bit RGB buffer (H*W*3), used for visualization panels.
void write_png_rgb8(const std::filesystem::path& path, int height, int width,
                    const std::vector<std::uint8_t>& rgb);

// Paletted PNG: pixel index is the class id, kIgnoreLabel stays 255.
void write_png_labels(const std::filesystem::path& path, const LabelMap& labels);
// Accepts paletted or 8-bit grayscale files.
LabelMap read_png_labels(const std::filesystem::path& path, int num_classes);

// Display color for a class id (index 255 is black).
std::array<std::uint8_t, 3> label_color(std::uint16_t label);

}  // namespace scmix
