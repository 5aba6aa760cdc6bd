#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gpinv/summaries.hpp"
#include "test_util.hpp"

using namespace gpinv;

namespace {

std::vector<double> normal_samples(std::uint64_t seed, long n, double mu = 0.0,
                                   double sd = 1.0) {
    RngStream rng(seed);
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& x : v) x = mu + sd * rng.std_normal();
    return v;
}

double mass_inside(const std::vector<double>& samples, const HpdRegion& region) {
    long inside = 0;
    for (double x : samples) {
        if (region.contains(x)) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(samples.size());
}

}  // namespace

TEST_SUITE_BEGIN("summaries");

TEST_CASE("marginal_summary on a constant chain") {
    Vec v = Vec::Constant(500, 3.25);
    MarginalSummary s = marginal_summary(v);
    CHECK(s.mean == 3.25);
    CHECK(s.variance == 0.0);
    CHECK(s.ci_low == 3.25);
    CHECK(s.ci_high == 3.25);
}

TEST_CASE("marginal_summary recovers standard-normal moments at CLT accuracy") {
    const long n = 1000000;
    RngStream rng(29);
    Vec v(n);
    for (long i = 0; i < n; ++i) v[i] = rng.std_normal();
    MarginalSummary s = marginal_summary(v);
    CHECK(std::abs(s.mean) < 0.004);
    CHECK(std::abs(s.variance - 1.0) < 0.01);
    CHECK(s.ci_low == doctest::Approx(-1.96).epsilon(0.01));
    CHECK(s.ci_high == doctest::Approx(1.96).epsilon(0.01));
}

TEST_CASE("summaries are invariant under sample permutation") {
    auto v = normal_samples(31, 20000, 1.0, 0.5);
    Vec ev = Eigen::Map<Vec>(v.data(), static_cast<long>(v.size()));
    MarginalSummary s1 = marginal_summary(ev);
    HpdRegion r1 = hpd_region(v, 0.9);
    const double m1 = posterior_mode(v);

    std::vector<double> shuffled = v;
    RngStream rng(32);
    for (size_t i = shuffled.size() - 1; i > 0; --i) {
        std::swap(shuffled[i], shuffled[static_cast<size_t>(rng.uniform() * (i + 1))]);
    }
    Vec es = Eigen::Map<Vec>(shuffled.data(), static_cast<long>(shuffled.size()));
    MarginalSummary s2 = marginal_summary(es);
    CHECK(s1.mean == doctest::Approx(s2.mean).epsilon(1e-12));
    CHECK(s1.variance == doctest::Approx(s2.variance).epsilon(1e-12));
    CHECK(s1.ci_low == s2.ci_low);
    HpdRegion r2 = hpd_region(shuffled, 0.9);
    REQUIRE(r1.intervals.size() == r2.intervals.size());
    for (size_t i = 0; i < r1.intervals.size(); ++i) {
        CHECK(r1.intervals[i].first == r2.intervals[i].first);
        CHECK(r1.intervals[i].second == r2.intervals[i].second);
    }
    CHECK(m1 == posterior_mode(shuffled));
}

TEST_CASE("hpd_region on a standard normal") {
    auto v = normal_samples(37, 100000);
    HpdRegion region = hpd_region(v, 0.95);
    REQUIRE(region.intervals.size() == 1);
    CHECK(region.intervals[0].first == doctest::Approx(-1.96).epsilon(0.05));
    CHECK(std::abs(region.intervals[0].first + 1.96) < 0.08);
    CHECK(std::abs(region.intervals[0].second - 1.96) < 0.08);
    CHECK(region.mass >= 0.95);
    // threshold construction keeps the region near-minimal
    const double max_bin_mass = 0.05;
    CHECK(region.mass < 0.95 + 2.0 * max_bin_mass);
    CHECK(mass_inside(v, region) >= 0.95);

    // the histogram mode sits inside the 95% region
    CHECK(region.contains(posterior_mode(v)));
}

TEST_CASE("hpd_region splits a symmetric two-component mixture") {
    RngStream rng(41);
    std::vector<double> v(100000);
    for (auto& x : v) {
        const double centre = rng.uniform() < 0.5 ? -5.0 : 5.0;
        x = centre + 0.5 * rng.std_normal();
    }
    HpdRegion region = hpd_region(v, 0.95);
    REQUIRE(region.intervals.size() == 2);
    CHECK(region.intervals[0].second < region.intervals[1].first);  // disjoint, sorted

    long left = 0, right = 0;
    for (double x : v) {
        if (x >= region.intervals[0].first && x <= region.intervals[0].second) ++left;
        if (x >= region.intervals[1].first && x <= region.intervals[1].second) ++right;
    }
    CHECK(left / 100000.0 == doctest::Approx(0.475).epsilon(0.05));
    CHECK(right / 100000.0 == doctest::Approx(0.475).epsilon(0.05));

    // mode lands on one component; ties resolve toward the lower value
    const double mode = posterior_mode(v);
    CHECK(std::abs(std::abs(mode) - 5.0) < 0.3);
    CHECK(region.contains(mode));
}

TEST_CASE("hpd_region of uniform samples has width ~ level") {
    RngStream rng(43);
    std::vector<double> v(100000);
    for (auto& x : v) x = rng.uniform();
    HpdRegion region = hpd_region(v, 0.95, 0.0, 1.0);
    CHECK(region.total_width() == doctest::Approx(0.95).epsilon(0.05));
    CHECK(region.mass >= 0.95);
}

TEST_CASE("hpd_region input validation") {
    std::vector<double> few(50, 1.0);
    CHECK_THROWS_AS(hpd_region(few, 0.95), TooFewSamples);
    auto v = normal_samples(47, 500);
    CHECK_THROWS_AS(hpd_region(v, 1.5), ConfigError);
}

TEST_CASE("posterior_mode") {
    auto tight = normal_samples(53, 100000, 2.2, 0.01);
    CHECK(posterior_mode(tight) == doctest::Approx(2.2).epsilon(0.002));

    std::vector<double> constant(250, 7.5);
    CHECK(posterior_mode(constant) == 7.5);

    // exact two-bin tie: the lower midpoint wins
    std::vector<double> tie;
    for (int i = 0; i < 100; ++i) tie.push_back(0.1 + 1e-6 * i);
    for (int i = 0; i < 100; ++i) tie.push_back(0.9 + 1e-6 * i);
    const double mode = posterior_mode(tie, 0.0, 1.0);
    CHECK(mode < 0.5);
}

TEST_CASE("bar_frequency unit transform") {
    CHECK(std::abs(bar_frequency(2.04) - 56.1) < 1e-12);
    CHECK(std::abs(bar_frequency(2.30) - 63.25) < 1e-12);
    // inverse consistency
    for (double x : {10.0, 56.1, 63.25, 200.0}) {
        CHECK(bar_frequency(8.0 / 220.0 * x) == doctest::Approx(x).epsilon(1e-14));
    }
    CHECK_THROWS_AS(bar_frequency(0.0), NonPositiveRadius);
    CHECK_THROWS_AS(bar_frequency(-1.0), NonPositiveRadius);

    // strict monotonicity and interval-structure preservation
    CHECK(bar_frequency(1.1) > bar_frequency(1.0));
    HpdRegion region;
    region.level = 0.95;
    region.intervals = {{1.70, 2.26}, {2.27, 2.28}};
    HpdRegion mapped = bar_frequency(region);
    REQUIRE(mapped.intervals.size() == 2);
    CHECK(mapped.intervals[0].first < mapped.intervals[0].second);
    CHECK(mapped.intervals[0].second < mapped.intervals[1].first);
    CHECK(mapped.intervals[0].first == doctest::Approx(46.75));
    CHECK(mapped.intervals[1].second == doctest::Approx(62.7));
}

TEST_CASE("empirical_quantile interpolates order statistics") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(empirical_quantile(v, 0.0) == 1.0);
    CHECK(empirical_quantile(v, 1.0) == 4.0);
    CHECK(empirical_quantile(v, 0.5) == doctest::Approx(2.5));
}

TEST_SUITE_END();
