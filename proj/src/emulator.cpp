#include "gpinv/emulator.hpp"

#include <cmath>
#include <limits>

namespace gpinv {

EmulatorFit::EmulatorFit(Mat design, Mat data, Vec b_plugin, Vec coord_scales)
    : design_(std::move(design)), b_(std::move(b_plugin)), coord_scales_(std::move(coord_scales)) {
    const int n = static_cast<int>(design_.rows());
    const int d = static_cast<int>(design_.cols());
    const int m = d + 1;
    if (data.rows() != n) throw DimensionMismatch("fit: design/data row mismatch");
    if (b_.size() != d || (b_.array() <= 0.0).any()) {
        throw ConfigError("fit: smoothness plug-in must be d positive reals");
    }
    if (n <= m) throw ConfigError("fit: need n > m for residual degrees of freedom");
    if (coord_scales_.size() == 0) coord_scales_ = Vec::Ones(d);
    if (coord_scales_.size() != d) throw DimensionMismatch("fit: coord_scales dimension");

    design_scaled_ = design_;
    for (int l = 0; l < d; ++l) design_scaled_.col(l) *= coord_scales_[l];

    h_.resize(n, m);
    h_.col(0).setOnes();
    h_.rightCols(d) = design_;

    Mat a = kernel_matrix(design_scaled_, b_);
    if (!jittered_llt(a, llt_a_)) {
        throw SingularKernel("fit: kernel matrix not PD after jitter escalation");
    }
    a_inv_h_ = llt_a_.solve(h_);
    p_small_ = h_.transpose() * a_inv_h_;
    llt_p_.compute(p_small_);
    if (llt_p_.info() != Eigen::Success) {
        throw RankDeficientBasis("fit: H'A^-1H singular");
    }
    b_gls_ = llt_p_.solve(h_.transpose() * llt_a_.solve(data));
    Mat resid = data - h_ * b_gls_;
    a_inv_resid_ = llt_a_.solve(resid);
    omega_gls_scaled_ = resid.transpose() * a_inv_resid_;
}

Vec EmulatorFit::cross_kernel(const Vec& s) const {
    return cross_kernel_vector(design_scaled_, s.cwiseProduct(coord_scales_), b_);
}

Vec EmulatorFit::predict_mean(const Vec& s) const {
    if (s.size() != design_.cols()) throw DimensionMismatch("predict_mean: dimension");
    Vec a_d = cross_kernel(s);
    return b_gls_.transpose() * basis_vector(s) + a_inv_resid_.transpose() * a_d;
}

double EmulatorFit::predict_cov_scalar(const Vec& s1, const Vec& s2) const {
    if (s1.size() != design_.cols() || s2.size() != design_.cols()) {
        throw DimensionMismatch("predict_cov_scalar: dimension");
    }
    Vec a1_vec = cross_kernel(s1);
    Vec a2_vec = cross_kernel(s2);
    const double a_direct =
        kernel_value(s1.cwiseProduct(coord_scales_), s2.cwiseProduct(coord_scales_), b_);
    const double a1 = a_direct - a1_vec.dot(llt_a_.solve(a2_vec));
    Vec u1 = basis_vector(s1) - a_inv_h_.transpose() * a1_vec;
    Vec u2 = basis_vector(s2) - a_inv_h_.transpose() * a2_vec;
    return a1 + u1.dot(llt_p_.solve(u2));
}

EmulatorFit fit(const TrainingSet& training, const Vec& b_plugin, const Vec& coord_scales) {
    return EmulatorFit(training.design, training.data, b_plugin, coord_scales);
}

EmulatorFit fit_augmented(const TrainingSet& training, const Vec& test, const Vec& s_tilde,
                          const Vec& b_plugin, const Vec& coord_scales) {
    const int n = training.dims.n;
    Mat design(n + 1, training.dims.d);
    design.topRows(n) = training.design;
    design.row(n) = s_tilde.transpose();
    Mat data(n + 1, training.dims.jk());
    data.topRows(n) = training.data;
    data.row(n) = test.transpose();
    return EmulatorFit(std::move(design), std::move(data), b_plugin, coord_scales);
}

ModelFitReport model_fit_report(const EmulatorFit& fit, const Vec& v_test,
                                const std::vector<Vec>& points, int j, int k,
                                const std::vector<std::string>& labels) {
    if (points.empty()) throw ConfigError("model_fit_report: no evaluation points");
    if (v_test.size() != static_cast<long>(j) * k || fit.b_gls().cols() != v_test.size()) {
        throw DimensionMismatch("model_fit_report: test length != fitted jk");
    }
    ModelFitReport report;
    report.j = j;
    report.k = k;
    report.points.reserve(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        PointFit pf;
        pf.label = i < labels.size() ? labels[i] : "point" + std::to_string(i);
        pf.s = points[i];
        pf.predicted = fit.predict_mean(points[i]);
        pf.rmse.resize(k);
        for (int t = 0; t < k; ++t) {
            double ss = 0.0;
            for (int m1 = 0; m1 < j; ++m1) {
                const double diff = pf.predicted[m1 * k + t] - v_test[m1 * k + t];
                ss += diff * diff;
            }
            pf.rmse[t] = std::sqrt(ss / j);
        }
        report.points.push_back(std::move(pf));
    }
    return report;
}

Vec default_proposal_scales(const Bounds& bounds, int k, double data_variance_scale) {
    const int d = bounds.dim();
    Vec c(PosteriorState::packed_size(d, k));
    for (int l = 0; l < d; ++l) c[l] = 0.02 * bounds.width(l);
    for (int l = 0; l < d; ++l) c[d + l] = 0.05;
    c.tail(k * (k + 1) / 2).setConstant(0.01 * data_variance_scale);
    return c;
}

LooReport loo_cross_validate(const TrainingSet& training, const Bounds& bounds,
                             const LooConfig& config, const ErrorModel& error,
                             const Vec& coord_scales) {
    const Dims& dm = training.dims;
    if (dm.n < dm.m() + 2) {
        throw ConfigError("loo_cross_validate: need n >= m+2");
    }
    LooReport report;
    report.folds.resize(dm.n);
    report.coverage = Vec::Zero(dm.d);

    for (int i = 0; i < dm.n; ++i) {
        LooFold& fold = report.folds[i];
        fold.index = i;
        try {
            TrainingSet reduced;
            reduced.dims = dm;
            reduced.dims.n = dm.n - 1;
            reduced.design.resize(dm.n - 1, dm.d);
            reduced.data.resize(dm.n - 1, dm.jk());
            reduced.design.topRows(i) = training.design.topRows(i);
            reduced.data.topRows(i) = training.data.topRows(i);
            reduced.design.bottomRows(dm.n - 1 - i) = training.design.bottomRows(dm.n - 1 - i);
            reduced.data.bottomRows(dm.n - 1 - i) = training.data.bottomRows(dm.n - 1 - i);
            Vec held_out_s = training.design.row(i).transpose();
            Vec held_out_v = training.data.row(i).transpose();

            InverseProblem problem(std::move(reduced), held_out_v, bounds, error, coord_scales);

            TmcmcConfig mc;
            mc.burn_in = config.burn_in;
            mc.iterations = config.iterations;
            mc.thin = config.thin;
            mc.seed = mix_seed(config.seed, static_cast<std::uint64_t>(i));

            PosteriorState init;
            init.b = config.init_b.size() == dm.d ? config.init_b : Vec::Ones(dm.d);
            init.sigma = config.init_sigma_scale * problem.data_variance_scale() *
                         Mat::Identity(dm.k, dm.k);
            init.s = 0.5 * (bounds.lower + bounds.upper);

            // nudge the start until the density is positive (the box centre
            // can coincide with a design point)
            RngStream init_rng(mix_seed(mc.seed, 0x1009));
            int tries = 0;
            while (log_posterior(problem, init) ==
                       -std::numeric_limits<double>::infinity() &&
                   tries < 200) {
                for (int l = 0; l < dm.d; ++l) {
                    init.s[l] = bounds.lower[l] + init_rng.uniform() * bounds.width(l);
                }
                ++tries;
            }

            mc.init = init.pack();
            mc.scales = config.scales.size() == mc.init.size()
                            ? config.scales
                            : default_proposal_scales(bounds, dm.k,
                                                      problem.data_variance_scale());
            mc.move_probs = Vec::Constant(mc.init.size(), config.move_prob);

            LogTarget target = make_log_target(problem);
            Chain chain = run_chain(target, mc);
            fold.acceptance_rate = diagnostics(chain).acceptance_rate;

            fold.covered.resize(dm.d);
            fold.regions.resize(dm.d);
            for (int l = 0; l < dm.d; ++l) {
                std::vector<double> coord(chain.samples.col(l).data(),
                                          chain.samples.col(l).data() + chain.size());
                fold.regions[l] =
                    hpd_region(coord, config.level, bounds.lower[l], bounds.upper[l]);
                fold.covered[l] = fold.regions[l].contains(held_out_s[l]);
            }
            fold.ok = true;
        } catch (const std::exception& e) {
            fold.ok = false;
            fold.error = e.what();
        }
    }

    for (const auto& fold : report.folds) {
        if (!fold.ok) continue;
        ++report.ok_folds;
        for (int l = 0; l < dm.d; ++l) {
            if (fold.covered[l]) report.coverage[l] += 1.0;
        }
    }
    if (report.ok_folds > 0) report.coverage /= static_cast<double>(report.ok_folds);
    return report;
}

}  // namespace gpinv
