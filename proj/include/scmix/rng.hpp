#pragma once

#include <cstdint>

namespace scmix {

// Purpose tags keep consumers apart: adding draws for one purpose never
// shifts the sequence seen by another.
enum class StreamPurpose : std::uint32_t {
  kGridDims = 1,
  kGridValues = 2,
  kClassSubset = 3,
  kJitter = 4,
  kBlur = 5,
  kDataSampling = 6,
  kSceneGeneration = 7,
  kCutMix = 8,
  kDiscrepancy = 9,
};

const char* purpose_name(StreamPurpose purpose);

// Counter-based generator. Draw n of a stream is a pure function of
// (seed, iteration, purpose, lane, n): the key is a hash of the stream id and
// each output is a double SplitMix64 finalization of key + n * golden-gamma.
// Value type; copy it per worker rather than sharing.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t iteration, StreamPurpose purpose,
            std::uint64_t lane = 0);

  // Fresh stream (counter 0) sharing seed, iteration and, unless given,
  // lane.
  RngStream derive(StreamPurpose purpose) const;
  RngStream derive(StreamPurpose purpose, std::uint64_t lane) const;
  RngStream at_iteration(std::uint64_t iteration) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t iteration() const { return iteration_; }
  StreamPurpose purpose() const { return purpose_; }
  std::uint64_t lane() const { return lane_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double next_unit();
  // Uniform integer in the closed range [lo, hi]; unbiased (Lemire).
  // Throws InvalidArgument when lo > hi. A degenerate range consumes no draw.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double uniform_real(double lo, double hi);
  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal();

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t iteration_;
  StreamPurpose purpose_;
  std::uint64_t lane_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace scmix
