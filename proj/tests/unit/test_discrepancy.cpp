#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "scmix/discrepancy.hpp"

using namespace scmix;
using namespace scmix::testing;

namespace {

DomainSampleSet gaussian_set(std::size_t n, std::size_t dim, double center, double spread,
                             RngStream& s, const std::string& tag) {
  DomainSampleSet out{tag, {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = center + spread * s.normal();
    out.samples.push_back(std::move(v));
  }
  return out;
}

DomainSampleSet numbered_set(std::size_t n, double offset, const std::string& tag) {
  DomainSampleSet out{tag, {}};
  for (std::size_t i = 0; i < n; ++i) out.samples.push_back({offset + static_cast<double>(i)});
  return out;
}

RngStream disc_stream(std::uint64_t seed) {
  return RngStream(seed, 0, StreamPurpose::kDiscrepancy);
}

}  // namespace

TEST_CASE("image descriptor dimension") {
  RngStream s = test_stream(1);
  const auto d = image_descriptor(random_image(8, 8, s));
  CHECK(d.size() == static_cast<std::size_t>(kDescriptorDim));
  const ImageTensor flat(8, 8, std::vector<float>(192, 0.25f));
  const auto f = image_descriptor(flat);
  for (int k = kFeatureDim; k < kFeatureDim + 9; ++k) CHECK(std::abs(f[static_cast<std::size_t>(k)]) < 1e-3);
}

TEST_CASE("join_subdomains balances and concatenates") {
  const DomainSampleSet a = numbered_set(100, 0.0, "a");
  const DomainSampleSet b = numbered_set(60, 1000.0, "b");
  SUBCASE("single set is unchanged") {
    const std::vector<DomainSampleSet> one = {a};
    CHECK(join_subdomains(one).samples == a.samples);
  }
  SUBCASE("sizes 100 and 60 give 120") {
    const std::vector<DomainSampleSet> ab = {a, b};
    const DomainSampleSet j = join_subdomains(ab);
    CHECK(j.samples.size() == 120);
    const auto from_a = std::count_if(j.samples.begin(), j.samples.end(),
                                      [](const auto& v) { return v[0] < 1000.0; });
    CHECK(from_a == 60);
  }
  SUBCASE("order invariant as multisets") {
    const std::vector<DomainSampleSet> ab = {a, b};
    const std::vector<DomainSampleSet> ba = {b, a};
    auto x = join_subdomains(ab).samples;
    auto y = join_subdomains(ba).samples;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    CHECK(x == y);
  }
  SUBCASE("dimension mismatch") {
    DomainSampleSet c{"c", {{1.0, 2.0}}};
    const std::vector<DomainSampleSet> ac = {a, c};
    CHECK_THROWS(join_subdomains(ac));
    const std::vector<DomainSampleSet> none;
    CHECK_THROWS(join_subdomains(none));
  }
}

TEST_CASE("proxy distance on same-distribution sets is small") {
  RngStream s = test_stream(2);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto a = gaussian_set(150, 6, 0.0, 1.0, s, "a");
    const auto b = gaussian_set(150, 6, 0.0, 1.0, s, "b");
    const double d = proxy_hdh_distance(a, b, disc_stream(r));
    CHECK(d >= 0.0);
    CHECK(d <= 0.3);
  }
}

TEST_CASE("proxy distance on separable sets is large") {
  RngStream s = test_stream(3);
  const auto a = gaussian_set(120, 4, -3.0, 0.3, s, "a");
  const auto b = gaussian_set(120, 4, 3.0, 0.3, s, "b");
  const double d = proxy_hdh_distance(a, b, disc_stream(1));
  CHECK(d >= 1.6);
  CHECK(d <= 2.0);
}

TEST_CASE("proxy distance is symmetric") {
  RngStream s = test_stream(4);
  const auto a = gaussian_set(100, 5, 0.0, 1.0, s, "a");
  const auto b = gaussian_set(100, 5, 0.6, 1.0, s, "b");
  const double ab = proxy_hdh_distance(a, b, disc_stream(5));
  const double ba = proxy_hdh_distance(b, a, disc_stream(5));
  CHECK(std::abs(ab - ba) <= 0.1);
  CHECK(proxy_hdh_distance(a, b, disc_stream(5)) == ab);
}

TEST_CASE("proxy distance needs enough samples") {
  RngStream s = test_stream(5);
  const auto a = gaussian_set(20, 3, 0.0, 1.0, s, "a");
  const auto b = gaussian_set(100, 3, 0.0, 1.0, s, "b");
  CHECK_THROWS(proxy_hdh_distance(a, b, disc_stream(1)));
}

TEST_CASE("ocda bound terms") {
  RngStream s = test_stream(6);
  const auto source = gaussian_set(80, 4, 0.0, 1.0, s, "source");
  std::vector<DomainSampleSet> subs;
  for (int i = 0; i < 3; ++i) subs.push_back(gaussian_set(80, 4, 0.5 * (i + 1), 1.0, s, "t"));
  SUBCASE("two subdomains give three terms") {
    const BoundReport r = ocda_bound_terms(source, std::span(subs).first(2), disc_stream(1));
    REQUIRE(r.terms.size() == 3);
    CHECK(r.terms[0].first == 1);
    CHECK(r.terms[0].last == 1);
    CHECK(r.terms[1].first == 1);
    CHECK(r.terms[1].last == 2);
    CHECK(r.terms[2].first == 2);
    CHECK(r.terms[2].last == 2);
  }
  SUBCASE("three subdomains give six terms") {
    const BoundReport r = ocda_bound_terms(source, subs, disc_stream(2));
    REQUIRE(r.terms.size() == 6);
    double diag = 0.0;
    double all = 0.0;
    for (const auto& t : r.terms) {
      CHECK(t.estimate >= 0.0);
      CHECK(t.estimate <= 2.0);
      all += t.estimate;
      if (t.first == t.last) diag += t.estimate;
    }
    CHECK(r.conventional_sum == doctest::Approx(diag));
    CHECK(r.full_sum == doctest::Approx(all));
    CHECK(r.full_sum >= r.conventional_sum);
  }
  SUBCASE("no subdomains") {
    const std::vector<DomainSampleSet> none;
    CHECK_THROWS(ocda_bound_terms(source, none, disc_stream(1)));
  }
}
