#include "scmix/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

namespace scmix {

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 16> kPalette = {{
    {128, 64, 128}, {244, 35, 232}, {70, 70, 70},   {102, 102, 156},
    {190, 153, 153}, {153, 153, 153}, {250, 170, 30}, {220, 220, 0},
    {107, 142, 35}, {152, 251, 152}, {70, 130, 180}, {220, 20, 60},
    {255, 0, 0},    {0, 0, 142},    {0, 60, 100},   {0, 80, 100},
}};

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

std::uint8_t to_u8(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::array<std::uint8_t, 3> label_color(std::uint16_t label) {
  if (label == kIgnoreLabel) return {0, 0, 0};
  return kPalette[label % kPalette.size()];
}

void write_png_rgb8(const std::filesystem::path& path, int height, int width,
                    const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(height) * width * 3) {
    throw ShapeMismatch("rgb buffer size does not match " +
                        std::to_string(height) + "x" + std::to_string(width));
  }
  ensure_parent(path);
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, rgb.data(), 0, nullptr)) {
    throw Error("png write failed for " + path.string() + ": " + img.message);
  }
}

void write_png_rgb(const std::filesystem::path& path, const ImageTensor& image) {
  std::vector<std::uint8_t> rgb(image.size());
  const auto v = image.values();
  for (std::size_t i = 0; i < v.size(); ++i) rgb[i] = to_u8(v[i]);
  write_png_rgb8(path, image.height(), image.width(), rgb);
}

ImageTensor read_png_rgb(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw FormatError("cannot read png " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw FormatError("png decode failed for " + path.string() + ": " + img.message);
  }
  std::vector<float> values(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) values[i] = static_cast<float>(buf[i]) / 255.0f;
  return ImageTensor(static_cast<int>(img.height), static_cast<int>(img.width),
                     std::move(values));
}

void write_png_labels(const std::filesystem::path& path, const LabelMap& labels) {
  ensure_parent(path);
  std::vector<std::uint8_t> colormap(256 * 3, 0);
  for (int i = 0; i < 256; ++i) {
    const auto c = label_color(static_cast<std::uint16_t>(i));
    colormap[3 * i] = c[0];
    colormap[3 * i + 1] = c[1];
    colormap[3 * i + 2] = c[2];
  }
  std::vector<std::uint8_t> idx(labels.pixel_count());
  const auto v = labels.values();
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = static_cast<std::uint8_t>(v[i]);

  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(labels.width());
  img.height = static_cast<png_uint_32>(labels.height());
  img.format = PNG_FORMAT_RGB_COLORMAP;
  img.colormap_entries = 256;
  if (!png_image_write_to_file(&img, path.c_str(), 0, idx.data(), 0,
                               colormap.data())) {
    throw Error("png write failed for " + path.string() + ": " + img.message);
  }
}

LabelMap read_png_labels(const std::filesystem::path& path, int num_classes) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw FormatError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng allocation failed");
  }
  // Lives on the heap so nothing written after setjmp is clobbered by longjmp.
  struct ReadState {
    std::vector<std::uint8_t> data;
    int height = 0;
    int width = 0;
    std::string failure;
  };
  const auto state = std::make_unique<ReadState>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png decode failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (bit_depth < 8) png_set_packing(png);
  if (bit_depth == 16) state->failure = "16-bit label images are not supported";
  if (color_type != PNG_COLOR_TYPE_PALETTE && color_type != PNG_COLOR_TYPE_GRAY) {
    state->failure = "label png must be paletted or grayscale";
  }
  if (state->failure.empty()) {
    png_read_update_info(png, info);
    state->width = static_cast<int>(png_get_image_width(png, info));
    state->height = static_cast<int>(png_get_image_height(png, info));
    state->data.resize(static_cast<std::size_t>(state->width) * state->height);
    std::vector<png_bytep> rows(static_cast<std::size_t>(state->height));
    for (int y = 0; y < state->height; ++y) {
      rows[y] = state->data.data() + static_cast<std::size_t>(y) * state->width;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!state->failure.empty()) throw FormatError(state->failure + ": " + path.string());
  std::vector<std::uint16_t> labels(state->data.begin(), state->data.end());
  return LabelMap(state->height, state->width, num_classes, std::move(labels));
}

}  // namespace scmix
