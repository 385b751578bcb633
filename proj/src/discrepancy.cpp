#include "scmix/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scmix {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void shuffle(std::vector<std::size_t>& idx, RngStream& stream) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        stream.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

struct Split2 {
  std::vector<const std::vector<double>*> train;
  std::vector<int> train_label;
  std::vector<const std::vector<double>*> test;
  std::vector<int> test_label;
};

// Balanced test error of a logistic classifier fit on the split.
double fit_and_score(const Split2& s, std::size_t dim,
                     const ProxyDistanceOptions& options) {
  std::vector<double> mean(dim, 0.0);
  std::vector<double> scale(dim, 0.0);
  for (const auto* x : s.train) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += (*x)[d];
  }
  for (double& m : mean) m /= static_cast<double>(s.train.size());
  for (const auto* x : s.train) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = (*x)[d] - mean[d];
      scale[d] += c * c;
    }
  }
  for (double& v : scale) {
    v = std::sqrt(v / static_cast<double>(s.train.size()));
    v = v > 1e-12 ? 1.0 / v : 0.0;
  }
  auto standardized = [&](const std::vector<double>& x) {
    std::vector<double> z(dim);
    for (std::size_t d = 0; d < dim; ++d) z[d] = (x[d] - mean[d]) * scale[d];
    return z;
  };
  std::vector<std::vector<double>> train_z;
  for (const auto* x : s.train) train_z.push_back(standardized(*x));

  // Class-balanced logistic loss so unequal set sizes do not bias the fit.
  double count[2] = {0, 0};
  for (int l : s.train_label) count[l] += 1;
  std::vector<double> w(dim, 0.0);
  double bias = 0.0;
  std::vector<double> grad(dim);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < train_z.size(); ++i) {
      const auto& z = train_z[i];
      double logit = bias;
      for (std::size_t d = 0; d < dim; ++d) logit += w[d] * z[d];
      const int y = s.train_label[i];
      const double r = (sigmoid(logit) - y) / (2.0 * count[y]);
      for (std::size_t d = 0; d < dim; ++d) grad[d] += r * z[d];
      grad_b += r;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      w[d] -= options.learning_rate * (grad[d] + options.l2 * w[d]);
    }
    bias -= options.learning_rate * grad_b;
  }

  double wrong[2] = {0, 0};
  double total[2] = {0, 0};
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    const auto z = standardized(*s.test[i]);
    double logit = bias;
    for (std::size_t d = 0; d < dim; ++d) logit += w[d] * z[d];
    const int predicted = logit > 0 ? 1 : 0;
    const int y = s.test_label[i];
    total[y] += 1;
    if (predicted != y) wrong[y] += 1;
  }
  return 0.5 * (wrong[0] / total[0] + wrong[1] / total[1]);
}

}  // namespace

std::vector<double> image_descriptor(const ImageTensor& image) {
  const PixelFeatures features(image);
  std::vector<double> sum(kFeatureDim, 0.0);
  std::vector<double> sum2(kFeatureDim, 0.0);
  for (std::size_t p = 0; p < features.pixel_count(); ++p) {
    const auto row = features.row(p);
    for (int d = 0; d < kFeatureDim; ++d) {
      sum[d] += row[d];
      sum2[d] += static_cast<double>(row[d]) * row[d];
    }
  }
  const auto n = static_cast<double>(features.pixel_count());
  std::vector<double> out(kDescriptorDim);
  for (int d = 0; d < kFeatureDim; ++d) {
    const double mean = sum[d] / n;
    out[d] = mean;
    out[kFeatureDim + d] = std::sqrt(std::max(sum2[d] / n - mean * mean, 0.0));
  }
  return out;
}

void DomainSampleSet::validate() const {
  if (samples.empty()) {
    throw InvalidArgument("domain sample set '" + tag + "' is empty");
  }
  for (const auto& s : samples) {
    if (s.size() != samples[0].size() || s.empty()) {
      throw ShapeMismatch("domain sample set '" + tag +
                          "' has inconsistent dimensionality");
    }
  }
}

DomainSampleSet describe_images(std::span<const ImageTensor* const> images,
                                std::string tag) {
  DomainSampleSet set{std::move(tag), {}};
  for (const ImageTensor* img : images) set.samples.push_back(image_descriptor(*img));
  set.validate();
  return set;
}

DomainSampleSet join_subdomains(std::span<const DomainSampleSet> sets) {
  if (sets.empty()) throw InvalidArgument("join of zero subdomains");
  std::size_t smallest = sets[0].samples.size();
  for (const auto& s : sets) {
    s.validate();
    if (s.dimension() != sets[0].dimension()) {
      throw ShapeMismatch("joined subdomains differ in dimensionality");
    }
    smallest = std::min(smallest, s.samples.size());
  }
  if (sets.size() == 1) return sets[0];
  DomainSampleSet out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    out.tag += (i ? "+" : "") + sets[i].tag;
    out.samples.insert(out.samples.end(), sets[i].samples.begin(),
                       sets[i].samples.begin() + static_cast<std::ptrdiff_t>(smallest));
  }
  return out;
}

double proxy_hdh_distance(const DomainSampleSet& a_in, const DomainSampleSet& b_in,
                          RngStream stream, const ProxyDistanceOptions& options) {
  a_in.validate();
  b_in.validate();
  if (a_in.dimension() != b_in.dimension()) {
    throw ShapeMismatch("domain sets differ in dimensionality");
  }
  if (a_in.samples.size() < options.min_samples ||
      b_in.samples.size() < options.min_samples) {
    throw InvalidArgument("proxy distance needs at least " +
                          std::to_string(options.min_samples) +
                          " samples per set, got " + std::to_string(a_in.samples.size()) +
                          " and " + std::to_string(b_in.samples.size()));
  }
  if (options.repeats < 1) throw InvalidArgument("proxy distance needs repeats >= 1");
  const bool swap = b_in.samples < a_in.samples;
  const DomainSampleSet& a = swap ? b_in : a_in;
  const DomainSampleSet& b = swap ? a_in : b_in;
  const std::size_t dim = a.dimension();

  double error_sum = 0.0;
  for (int r = 0; r < options.repeats; ++r) {
    Split2 split;
    int label = 0;
    for (const DomainSampleSet* set : {&a, &b}) {
      std::vector<std::size_t> idx(set->samples.size());
      std::iota(idx.begin(), idx.end(), 0);
      shuffle(idx, stream);
      const auto n_train = static_cast<std::size_t>(
          std::lround(options.train_fraction * static_cast<double>(idx.size())));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto* x = &set->samples[idx[i]];
        if (i < n_train) {
          split.train.push_back(x);
          split.train_label.push_back(label);
        } else {
          split.test.push_back(x);
          split.test_label.push_back(label);
        }
      }
      ++label;
    }
    error_sum += fit_and_score(split, dim, options);
  }
  const double error = error_sum / options.repeats;
  return std::clamp(2.0 * (1.0 - 2.0 * error), 0.0, 2.0);
}

BoundReport ocda_bound_terms(const DomainSampleSet& source,
                             std::span<const DomainSampleSet> subdomains,
                             const RngStream& stream,
                             const ProxyDistanceOptions& options) {
  if (subdomains.empty()) throw InvalidArgument("bound needs N >= 1 subdomains");
  BoundReport report;
  const int n = static_cast<int>(subdomains.size());
  std::uint64_t lane = 0;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      const DomainSampleSet joint = join_subdomains(subdomains.subspan(
          static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - i + 1)));
      const double d = proxy_hdh_distance(
          source, joint, stream.derive(StreamPurpose::kDiscrepancy, lane++), options);
      report.terms.push_back(BoundTerm{i, j, d});
      report.full_sum += d;
      if (i == j) report.conventional_sum += d;
    }
  }
  return report;
}

}  // namespace scmix
