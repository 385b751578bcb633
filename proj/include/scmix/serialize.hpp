#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "scmix/tensor.hpp"

namespace scmix {

// On-disk layout: "SCMT", u8 kind, u32 H, u32 W, u32 C, then the
// little-endian payload. Images, weights: f32. Labels, one-hot, masks: u16.
// Probabilities and model parameters: f64.
enum class TensorKind : std::uint8_t {
  kImage = 1,
  kLabels = 2,
  kWeights = 3,
  kOneHot = 4,
  kProbs = 5,
  kGridMask = 6,
  kClassMask = 7,
  kProvenance = 8,
  kModel = 16,
};

inline constexpr std::size_t kTensorHeaderSize = 4 + 1 + 4 * 3;

enum class ScalarType { kF32, kU16, kF64 };
ScalarType scalar_type_of(TensorKind kind);
std::size_t scalar_size(ScalarType type);

// Undecoded tensor with the payload already converted from little-endian.
struct RawTensor {
  TensorKind kind{};
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> f32;
  std::vector<std::uint16_t> u16;
  std::vector<double> f64;
};

std::vector<std::byte> encode_raw(const RawTensor& raw);
// Throws FormatError on bad magic, unknown kind, or a truncated/oversized
// payload.
RawTensor decode_raw(std::span<const std::byte> bytes);

std::vector<std::byte> serialize_tensor(const ImageTensor& t);
std::vector<std::byte> serialize_tensor(const LabelMap& t);
std::vector<std::byte> serialize_tensor(const WeightMap& t);
std::vector<std::byte> serialize_tensor(const OneHotLabel& t);
std::vector<std::byte> serialize_tensor(const ProbMap& t);

using AnyTensor =
    std::variant<ImageTensor, LabelMap, WeightMap, OneHotLabel, ProbMap>;

AnyTensor deserialize_tensor(std::span<const std::byte> bytes);

// Typed decode; throws FormatError when the stored kind differs.
template <class T>
T deserialize_as(std::span<const std::byte> bytes) {
  AnyTensor any = deserialize_tensor(bytes);
  if (auto* p = std::get_if<T>(&any)) return std::move(*p);
  throw FormatError("serialized tensor has a different kind than requested");
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes);

}  // namespace scmix
