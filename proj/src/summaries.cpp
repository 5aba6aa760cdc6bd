#include "gpinv/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpinv {

MarginalSummary marginal_summary(const Vec& samples) {
    const long n = samples.size();
    if (n < 2) throw EmptyChain("marginal_summary: need at least 2 samples");
    MarginalSummary out;
    out.mean = samples.mean();
    out.variance = (samples.array() - out.mean).square().sum() / static_cast<double>(n - 1);
    std::vector<double> v(samples.data(), samples.data() + n);
    std::sort(v.begin(), v.end());
    out.ci_low = empirical_quantile(v, 0.025);
    out.ci_high = empirical_quantile(v, 0.975);
    return out;
}

double empirical_quantile(std::vector<double> v, double p) {
    if (v.empty()) throw TooFewSamples("empirical_quantile: no samples");
    if (!std::is_sorted(v.begin(), v.end())) std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = static_cast<size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

bool HpdRegion::contains(double x) const {
    for (const auto& [lo, hi] : intervals) {
        if (x >= lo && x <= hi) return true;
    }
    return false;
}

double HpdRegion::total_width() const {
    double w = 0.0;
    for (const auto& [lo, hi] : intervals) w += hi - lo;
    return w;
}

Histogram build_histogram(const std::vector<double>& samples, double lo, double hi) {
    if (!(hi > lo)) throw ConfigError("histogram support must have positive width");
    const double width = hi - lo;
    const long n = static_cast<long>(samples.size());

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double iqr =
        empirical_quantile(sorted, 0.75) - empirical_quantile(sorted, 0.25);
    double h = 2.0 * iqr * std::pow(static_cast<double>(n), -1.0 / 3.0);
    h = std::clamp(h, width / 512.0, width / 32.0);

    Histogram hist;
    hist.lo = lo;
    hist.hi = hi;
    const int nbins = std::max(1, static_cast<int>(std::ceil(width / h)));
    hist.bin_width = width / nbins;
    hist.counts.assign(nbins, 0);
    for (double x : samples) {
        if (x < lo || x > hi) continue;
        int b = static_cast<int>((x - lo) / hist.bin_width);
        if (b >= nbins) b = nbins - 1;
        ++hist.counts[b];
        ++hist.total;
    }
    return hist;
}

namespace {

void check_hpd_inputs(const std::vector<double>& samples, double level) {
    if (samples.size() < 100) {
        throw TooFewSamples("hpd_region/posterior_mode: need >= 100 samples");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("hpd level must lie in (0,1)");
    }
}

}  // namespace

HpdRegion hpd_region(const std::vector<double>& samples, double level) {
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    double a = *lo, b = *hi;
    if (a == b) {  // degenerate chain: a single point interval
        a -= 0.5;
        b += 0.5;
    }
    return hpd_region(samples, level, a, b);
}

HpdRegion hpd_region(const std::vector<double>& samples, double level, double lo, double hi) {
    check_hpd_inputs(samples, level);
    Histogram hist = build_histogram(samples, lo, hi);
    const int nbins = static_cast<int>(hist.counts.size());

    std::vector<int> order(nbins);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (hist.counts[a] != hist.counts[b]) return hist.counts[a] > hist.counts[b];
        return a < b;
    });

    std::vector<bool> selected(nbins, false);
    long cum = 0;
    const long need = static_cast<long>(std::ceil(level * static_cast<double>(hist.total)));
    for (int idx : order) {
        if (cum >= need) break;
        selected[idx] = true;
        cum += hist.counts[idx];
    }

    HpdRegion region;
    region.level = level;
    region.mass = static_cast<double>(cum) / static_cast<double>(hist.total);
    int b = 0;
    while (b < nbins) {
        if (!selected[b]) {
            ++b;
            continue;
        }
        int start = b;
        while (b < nbins && selected[b]) ++b;
        region.intervals.emplace_back(hist.lo + start * hist.bin_width,
                                      hist.lo + b * hist.bin_width);
    }
    return region;
}

double posterior_mode(const std::vector<double>& samples) {
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    double a = *lo, b = *hi;
    if (a == b) return a;  // constant chain
    if (samples.size() < 100) {
        throw TooFewSamples("posterior_mode: need >= 100 samples");
    }
    return posterior_mode(samples, a, b);
}

double posterior_mode(const std::vector<double>& samples, double lo, double hi) {
    if (samples.size() < 100) {
        throw TooFewSamples("posterior_mode: need >= 100 samples");
    }
    Histogram hist = build_histogram(samples, lo, hi);
    int best = 0;
    for (int b = 1; b < static_cast<int>(hist.counts.size()); ++b) {
        if (hist.counts[b] > hist.counts[best]) best = b;  // ties keep the lower bin
    }
    return hist.lo + (best + 0.5) * hist.bin_width;
}

double bar_frequency(double r_hat) {
    if (!(r_hat > 0.0)) throw NonPositiveRadius("bar_frequency: radius must be positive");
    return 220.0 * r_hat / 8.0;
}

HpdRegion bar_frequency(const HpdRegion& region) {
    HpdRegion out = region;
    for (auto& [lo, hi] : out.intervals) {
        lo = bar_frequency(lo);
        hi = bar_frequency(hi);
    }
    return out;
}

}  // namespace gpinv
