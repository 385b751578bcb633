#include "scmix/serialize.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <string>

namespace scmix {

namespace {

constexpr std::byte kMagic[4] = {std::byte{'S'}, std::byte{'C'}, std::byte{'M'},
                                 std::byte{'T'}};

template <class U>
void put_le(std::vector<std::byte>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
}

template <class U>
U get_le(const std::byte* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(std::to_integer<U>(p[i])) << (8 * i);
  }
  return v;
}

bool known_kind(std::uint8_t k) {
  switch (static_cast<TensorKind>(k)) {
    case TensorKind::kImage:
    case TensorKind::kLabels:
    case TensorKind::kWeights:
    case TensorKind::kOneHot:
    case TensorKind::kProbs:
    case TensorKind::kGridMask:
    case TensorKind::kClassMask:
    case TensorKind::kProvenance:
    case TensorKind::kModel:
      return true;
  }
  return false;
}

RawTensor header_for(TensorKind kind, int h, int w, int c) {
  RawTensor raw;
  raw.kind = kind;
  raw.height = static_cast<std::uint32_t>(h);
  raw.width = static_cast<std::uint32_t>(w);
  raw.channels = static_cast<std::uint32_t>(c);
  return raw;
}

}  // namespace

ScalarType scalar_type_of(TensorKind kind) {
  switch (kind) {
    case TensorKind::kImage:
    case TensorKind::kWeights:
      return ScalarType::kF32;
    case TensorKind::kProbs:
    case TensorKind::kModel:
      return ScalarType::kF64;
    default:
      return ScalarType::kU16;
  }
}

std::size_t scalar_size(ScalarType type) {
  switch (type) {
    case ScalarType::kF32: return 4;
    case ScalarType::kU16: return 2;
    case ScalarType::kF64: return 8;
  }
  return 0;
}

namespace {

// Label maps store the class count in the channel field but hold one value
// per pixel.
std::uint32_t payload_channels(const RawTensor& raw) {
  return raw.kind == TensorKind::kLabels ? 1u : raw.channels;
}

}  // namespace

std::vector<std::byte> encode_raw(const RawTensor& raw) {
  const std::size_t n = static_cast<std::size_t>(raw.height) * raw.width *
                        payload_channels(raw);
  const ScalarType type = scalar_type_of(raw.kind);
  std::vector<std::byte> out;
  out.reserve(kTensorHeaderSize + n * scalar_size(type));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::byte>(raw.kind));
  put_le<std::uint32_t>(out, raw.height);
  put_le<std::uint32_t>(out, raw.width);
  put_le<std::uint32_t>(out, raw.channels);
  switch (type) {
    case ScalarType::kF32:
      if (raw.f32.size() != n) throw ShapeMismatch("f32 payload size mismatch");
      for (float v : raw.f32) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
      break;
    case ScalarType::kU16:
      if (raw.u16.size() != n) throw ShapeMismatch("u16 payload size mismatch");
      for (std::uint16_t v : raw.u16) put_le<std::uint16_t>(out, v);
      break;
    case ScalarType::kF64:
      if (raw.f64.size() != n) throw ShapeMismatch("f64 payload size mismatch");
      for (double v : raw.f64) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
      break;
  }
  return out;
}

RawTensor decode_raw(std::span<const std::byte> bytes) {
  if (bytes.size() < kTensorHeaderSize) {
    throw FormatError("tensor stream truncated: header needs " +
                      std::to_string(kTensorHeaderSize) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FormatError("tensor stream has bad magic (expected \"SCMT\")");
  }
  const auto kind_byte = std::to_integer<std::uint8_t>(bytes[4]);
  if (!known_kind(kind_byte)) {
    throw FormatError("unknown tensor kind tag " + std::to_string(kind_byte));
  }
  RawTensor raw;
  raw.kind = static_cast<TensorKind>(kind_byte);
  raw.height = get_le<std::uint32_t>(bytes.data() + 5);
  raw.width = get_le<std::uint32_t>(bytes.data() + 9);
  raw.channels = get_le<std::uint32_t>(bytes.data() + 13);
  if (raw.height == 0 || raw.width == 0 || raw.channels == 0) {
    throw FormatError("tensor header has a zero dimension");
  }
  const ScalarType type = scalar_type_of(raw.kind);
  const std::size_t elem = scalar_size(type);
  const auto n = static_cast<unsigned __int128>(raw.height) * raw.width *
                 payload_channels(raw);
  const std::size_t payload = bytes.size() - kTensorHeaderSize;
  if (n * elem != payload) {
    throw FormatError("tensor payload is " + std::to_string(payload) +
                      " bytes, header implies " +
                      std::to_string(static_cast<unsigned long long>(n * elem)));
  }
  const std::byte* p = bytes.data() + kTensorHeaderSize;
  const auto count = static_cast<std::size_t>(n);
  switch (type) {
    case ScalarType::kF32:
      raw.f32.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        raw.f32[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
      }
      break;
    case ScalarType::kU16:
      raw.u16.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        raw.u16[i] = get_le<std::uint16_t>(p + 2 * i);
      }
      break;
    case ScalarType::kF64:
      raw.f64.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        raw.f64[i] = std::bit_cast<double>(get_le<std::uint64_t>(p + 8 * i));
      }
      break;
  }
  return raw;
}

std::vector<std::byte> serialize_tensor(const ImageTensor& t) {
  RawTensor raw = header_for(TensorKind::kImage, t.height(), t.width(), t.channels());
  raw.f32.assign(t.values().begin(), t.values().end());
  return encode_raw(raw);
}

std::vector<std::byte> serialize_tensor(const LabelMap& t) {
  RawTensor raw = header_for(TensorKind::kLabels, t.height(), t.width(), t.num_classes());
  raw.u16.assign(t.values().begin(), t.values().end());
  return encode_raw(raw);
}

std::vector<std::byte> serialize_tensor(const WeightMap& t) {
  RawTensor raw = header_for(TensorKind::kWeights, t.height(), t.width(), 1);
  raw.f32.assign(t.values().begin(), t.values().end());
  return encode_raw(raw);
}

std::vector<std::byte> serialize_tensor(const OneHotLabel& t) {
  RawTensor raw = header_for(TensorKind::kOneHot, t.height(), t.width(), t.num_classes());
  raw.u16.assign(t.values().begin(), t.values().end());
  return encode_raw(raw);
}

std::vector<std::byte> serialize_tensor(const ProbMap& t) {
  RawTensor raw = header_for(TensorKind::kProbs, t.height(), t.width(), t.num_classes());
  raw.f64.assign(t.values().begin(), t.values().end());
  return encode_raw(raw);
}

AnyTensor deserialize_tensor(std::span<const std::byte> bytes) {
  RawTensor raw = decode_raw(bytes);
  const int h = static_cast<int>(raw.height);
  const int w = static_cast<int>(raw.width);
  const int c = static_cast<int>(raw.channels);
  try {
    switch (raw.kind) {
      case TensorKind::kImage:
        if (c != ImageTensor::kChannels) {
          throw FormatError("image tensor must have 3 channels");
        }
        return ImageTensor(h, w, std::move(raw.f32));
      case TensorKind::kLabels:
        return LabelMap(h, w, c, std::move(raw.u16));
      case TensorKind::kWeights:
        if (c != 1) throw FormatError("weight map must have 1 channel");
        return WeightMap(h, w, std::move(raw.f32));
      case TensorKind::kOneHot: {
        std::vector<std::uint8_t> v(raw.u16.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (raw.u16[i] > 1) throw FormatError("one-hot entry exceeds 1");
          v[i] = static_cast<std::uint8_t>(raw.u16[i]);
        }
        return OneHotLabel(h, w, c, std::move(v));
      }
      case TensorKind::kProbs:
        return ProbMap(h, w, c, std::move(raw.f64));
      default:
        throw FormatError("tensor kind " +
                          std::to_string(static_cast<int>(raw.kind)) +
                          " is not a core grid type");
    }
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("invalid tensor contents: ") + e.what());
  }
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  std::vector<std::byte> out(buf.size());
  std::transform(buf.begin(), buf.end(), out.begin(),
                 [](char ch) { return static_cast<std::byte>(ch); });
  return out;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

}  // namespace scmix
