#include "scmix/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "scmix/errors.hpp"

namespace scmix {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t iteration,
                         StreamPurpose purpose, std::uint64_t lane) {
  std::uint64_t h = splitmix64_mix(seed + kGoldenGamma);
  h = splitmix64_mix(h ^ (iteration + 0x632BE59BD9B4E019ULL));
  h = splitmix64_mix(h ^ (static_cast<std::uint64_t>(purpose) +
                          0xD1B54A32D192ED03ULL));
  h = splitmix64_mix(h ^ (lane + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const char* purpose_name(StreamPurpose purpose) {
  switch (purpose) {
    case StreamPurpose::kGridDims: return "grid-dims";
    case StreamPurpose::kGridValues: return "grid-values";
    case StreamPurpose::kClassSubset: return "class-subset";
    case StreamPurpose::kJitter: return "jitter";
    case StreamPurpose::kBlur: return "blur";
    case StreamPurpose::kDataSampling: return "data-sampling";
    case StreamPurpose::kSceneGeneration: return "scene-generation";
    case StreamPurpose::kCutMix: return "cutmix";
    case StreamPurpose::kDiscrepancy: return "discrepancy";
  }
  return "unknown";
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t iteration,
                     StreamPurpose purpose, std::uint64_t lane)
    : seed_(seed), iteration_(iteration), purpose_(purpose), lane_(lane),
      key_(stream_key(seed, iteration, purpose, lane)) {}

RngStream RngStream::derive(StreamPurpose purpose) const {
  return RngStream(seed_, iteration_, purpose, lane_);
}

RngStream RngStream::derive(StreamPurpose purpose, std::uint64_t lane) const {
  return RngStream(seed_, iteration_, purpose, lane);
}

RngStream RngStream::at_iteration(std::uint64_t iteration) const {
  return RngStream(seed_, iteration, purpose_, lane_);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t n = counter_++;
  return splitmix64_mix(splitmix64_mix(key_ + (n + 1) * kGoldenGamma) ^ key_);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) {
    throw InvalidArgument("uniform_int: lo " + std::to_string(lo) +
                          " exceeds hi " + std::to_string(hi));
  }
  if (lo == hi) return lo;
  const std::uint64_t range =
      static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (range == 0) {  // full 64-bit span
    return static_cast<std::int64_t>(next_u64());
  }
  std::uint64_t x = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<unsigned __int128>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return lo + static_cast<std::int64_t>(m >> 64);
}

double RngStream::uniform_real(double lo, double hi) {
  if (!(lo <= hi)) {
    throw InvalidArgument("uniform_real: lo exceeds hi");
  }
  return lo + (hi - lo) * next_unit();
}

double RngStream::normal() {
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace scmix
