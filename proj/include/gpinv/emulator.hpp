#ifndef GPINV_EMULATOR_HPP
#define GPINV_EMULATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "gpinv/posterior.hpp"
#include "gpinv/summaries.hpp"
#include "gpinv/tmcmc.hpp"

// GP prediction and model criticism: GLS coefficient estimate, conditional
// mean mu2(s) and scalar covariance factor a2(s,s') (full predictive
// covariance is a2 * Omega), model-fit comparison against the test vector,
// and leave-one-out cross-validation of the whole inversion pipeline.

namespace gpinv {

class EmulatorFit {
public:
    // Plug-in smoothness fit on (design, data); data rows follow the
    // l = m1*k + m2 vectorization. Throws when n <= m (no residual dof).
    EmulatorFit(Mat design, Mat data, Vec b_plugin, Vec coord_scales = Vec());

    const Mat& b_gls() const { return b_gls_; }
    // (n-m) * Omega_hat_GLS = D' M D
    const Mat& omega_gls_scaled() const { return omega_gls_scaled_; }
    const Mat& design() const { return design_; }
    const Vec& b_plugin() const { return b_; }
    int n() const { return static_cast<int>(design_.rows()); }
    int m() const { return static_cast<int>(h_.cols()); }

    // mu2(s) = Bhat' h(s) + (D - H Bhat)' A^-1 a_D(s)
    Vec predict_mean(const Vec& s) const;

    // a2(s1,s2) = a1(s1,s2) + u(s1)' (H'A^-1H)^-1 u(s2), where
    // a1(s1,s2) = a(s1,s2) - a_D(s1)' A^-1 a_D(s2) and
    // u(s) = h(s) - H'A^-1 a_D(s).
    double predict_cov_scalar(const Vec& s1, const Vec& s2) const;

private:
    Vec cross_kernel(const Vec& s) const;

    Mat design_;
    Mat design_scaled_;
    Vec b_;
    Vec coord_scales_;
    Mat h_;                // n x m
    Eigen::LLT<Mat> llt_a_;
    Mat a_inv_h_;          // A^-1 H
    Mat p_small_;          // H'A^-1H
    Eigen::LLT<Mat> llt_p_;
    Mat b_gls_;            // m x jk
    Mat a_inv_resid_;      // A^-1 (D - H Bhat)
    Mat omega_gls_scaled_;
};

EmulatorFit fit(const TrainingSet& training, const Vec& b_plugin, const Vec& coord_scales = Vec());

// Training data augmented with (s_tilde, v_test); the variant the model-fit
// comparison uses.
EmulatorFit fit_augmented(const TrainingSet& training, const Vec& test, const Vec& s_tilde,
                          const Vec& b_plugin, const Vec& coord_scales = Vec());

struct PointFit {
    std::string label;
    Vec s;
    Vec predicted;   // jk
    Vec rmse;        // per component, k
};

struct ModelFitReport {
    std::vector<PointFit> points;
    int j = 0;
    int k = 0;
};

ModelFitReport model_fit_report(const EmulatorFit& fit, const Vec& v_test,
                                const std::vector<Vec>& points, int j, int k,
                                const std::vector<std::string>& labels = {});

struct LooConfig {
    long burn_in = 5000;
    long iterations = 20000;
    long thin = 1;
    std::uint64_t seed = 0;
    double level = 0.95;
    Vec init_b;                     // defaults to ones
    double init_sigma_scale = 1e-3; // times the data variance scale
    Vec scales;                     // optional explicit proposal scales (d*)
    double move_prob = 0.5;
};

struct LooFold {
    int index = 0;
    bool ok = false;
    std::string error;
    std::vector<bool> covered;           // per coordinate of s
    std::vector<HpdRegion> regions;      // per coordinate
    double acceptance_rate = 0.0;
};

struct LooReport {
    std::vector<LooFold> folds;
    Vec coverage;  // per-coordinate fraction over successful folds
    int ok_folds = 0;
};

// For each design point: hold it out, treat its data row as test data, run
// the marginalized-posterior TMCMC pipeline, and score whether the held-out
// design vector lands in the per-coordinate HPD region. A failed fold is
// recorded, not fatal. Per-fold seeds derive from config.seed.
LooReport loo_cross_validate(const TrainingSet& training, const Bounds& bounds,
                             const LooConfig& config, const ErrorModel& error = {},
                             const Vec& coord_scales = Vec());

// Default proposal scales: 2% of the box width for s, 0.05 for b, and
// 0.01 * data_variance_scale for Sigma entries.
Vec default_proposal_scales(const Bounds& bounds, int k, double data_variance_scale);

}  // namespace gpinv

#endif
