#ifndef GPINV_SUMMARIES_HPP
#define GPINV_SUMMARIES_HPP

#include <utility>
#include <vector>

#include "gpinv/common.hpp"

// Posterior summarization from MCMC samples: marginal moments and central
// intervals, histogram-threshold HPD regions (possibly disjoint unions),
// histogram mode, and the bar-rotation-frequency unit transform.
//
// Binning rule shared by hpd_region and posterior_mode: Freedman-Diaconis
// width clamped to [support_width/512, support_width/32], where the support
// is the caller-declared range (prior box when known) or the sample range.

namespace gpinv {

struct MarginalSummary {
    double mean = 0.0;
    double variance = 0.0;   // unbiased
    double ci_low = 0.0;     // 2.5% empirical quantile
    double ci_high = 0.0;    // 97.5%
};

MarginalSummary marginal_summary(const Vec& samples);

// linear-interpolation empirical quantile on sorted order statistics
double empirical_quantile(std::vector<double> sorted_or_not, double p);

struct HpdRegion {
    double level = 0.0;
    std::vector<std::pair<double, double>> intervals;  // disjoint, sorted
    double mass = 0.0;  // empirical mass contained

    bool contains(double x) const;
    double total_width() const;
};

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    double bin_width = 0.0;
    std::vector<long> counts;
    long total = 0;
};

Histogram build_histogram(const std::vector<double>& samples, double lo, double hi);

// Histogram-threshold construction: the highest density cutoff whose
// super-level bins hold at least `level` of the mass (greedy by bin count,
// ties broken toward the lower bin). Requires >= 100 samples.
HpdRegion hpd_region(const std::vector<double>& samples, double level);
HpdRegion hpd_region(const std::vector<double>& samples, double level, double lo, double hi);

// Midpoint of the highest-count bin; ties broken toward the lower value.
double posterior_mode(const std::vector<double>& samples);
double posterior_mode(const std::vector<double>& samples, double lo, double hi);

// Omega_b = 220/(8/r_hat) = 27.5 * r_hat, in km s^-1 kpc^-1.
double bar_frequency(double r_hat);
HpdRegion bar_frequency(const HpdRegion& region);

}  // namespace gpinv

#endif
