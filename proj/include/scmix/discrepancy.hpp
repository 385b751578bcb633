#pragma once

#include <span>
#include <string>
#include <vector>

#include "scmix/rng.hpp"
#include "scmix/tensor.hpp"
#include "scmix/trainer.hpp"

namespace scmix {

// Mean and standard deviation over pixels of each PixelFeatures channel.
inline constexpr int kDescriptorDim = 2 * kFeatureDim;

std::vector<double> image_descriptor(const ImageTensor& image);

struct DomainSampleSet {
  std::string tag;
  std::vector<std::vector<double>> samples;

  std::size_t dimension() const { return samples.empty() ? 0 : samples[0].size(); }
  void validate() const;  // nonempty, uniform dimensionality
};

DomainSampleSet describe_images(std::span<const ImageTensor* const> images,
                                std::string tag);

// Balanced mixture: every set is truncated to the smallest set's size, then
// the sets are concatenated in order.
DomainSampleSet join_subdomains(std::span<const DomainSampleSet> sets);

struct ProxyDistanceOptions {
  int repeats = 5;
  double train_fraction = 0.7;
  int epochs = 400;
  double learning_rate = 0.5;
  double l2 = 1e-2;
  std::size_t min_samples = 40;
};

// Proxy H-delta-H distance: a linear logistic domain classifier is fit on a
// stratified 70/30 split; with balanced test error e averaged over the
// resampled splits, returns clamp(2 (1 - 2 e), 0, 2). The two sets are put
// in a canonical order first, so the estimate does not depend on argument
// order.
double proxy_hdh_distance(const DomainSampleSet& a, const DomainSampleSet& b,
                          RngStream stream, const ProxyDistanceOptions& options = {});

struct BoundTerm {
  int first = 0;  // i, 1-based
  int last = 0;   // j, 1-based, >= i
  double estimate = 0.0;
};

struct BoundReport {
  std::vector<BoundTerm> terms;  // (i, j) in lexicographic order
  double conventional_sum = 0.0; // diagonal terms only
  double full_sum = 0.0;         // every i <= j
};

// Distance between the source and the joint subdomain J_ij for every
// 1 <= i <= j <= N. Term n uses lane n of the discrepancy stream.
BoundReport ocda_bound_terms(const DomainSampleSet& source,
                             std::span<const DomainSampleSet> subdomains,
                             const RngStream& stream,
                             const ProxyDistanceOptions& options = {});

}  // namespace scmix
