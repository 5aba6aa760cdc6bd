#include "gpinv/posterior.hpp"

#include <cmath>
#include <limits>

namespace gpinv {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void ErrorModel::validate(int j, int k) const {
    switch (kind) {
        case Kind::none:
            break;
        case Kind::scalar:
            if (!(phi >= 0.0) || !std::isfinite(phi)) {
                throw ConfigError("scalar measurement error requires phi >= 0");
            }
            break;
        case Kind::kron: {
            if (sigma1.rows() != j || sigma1.cols() != j || sigma2.rows() != k ||
                sigma2.cols() != k) {
                throw DimensionMismatch("kron error factors must be j x j and k x k");
            }
            Eigen::LLT<Mat> l1(sigma1), l2(sigma2);
            if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) {
                throw ConfigError("kron error factors must be positive definite");
            }
            break;
        }
    }
}

Vec PosteriorState::pack() const {
    const int d = static_cast<int>(s.size());
    const int k = static_cast<int>(sigma.rows());
    Vec phi(packed_size(d, k));
    phi.head(d) = s;
    phi.segment(d, d) = b;
    int idx = 2 * d;
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c <= r; ++c) {
            phi[idx++] = sigma(r, c);
        }
    }
    return phi;
}

PosteriorState PosteriorState::unpack(const Vec& phi, int d, int k) {
    if (phi.size() != packed_size(d, k)) {
        throw DimensionMismatch("packed state has wrong length");
    }
    PosteriorState st;
    st.s = phi.head(d);
    st.b = phi.segment(d, d);
    st.sigma.resize(k, k);
    int idx = 2 * d;
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c <= r; ++c) {
            st.sigma(r, c) = phi[idx];
            st.sigma(c, r) = phi[idx];
            ++idx;
        }
    }
    return st;
}

std::vector<std::string> PosteriorState::packed_names(int d, int k) {
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("s" + std::to_string(i + 1));
    for (int i = 0; i < d; ++i) names.push_back("b" + std::to_string(i + 1));
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c <= r; ++c) {
            names.push_back("sigma_" + std::to_string(r + 1) + "_" + std::to_string(c + 1));
        }
    }
    return names;
}

InverseProblem::InverseProblem(TrainingSet training, Vec test, Bounds bounds, ErrorModel error,
                               Vec coord_scales)
    : training_(std::move(training)),
      test_(std::move(test)),
      bounds_(std::move(bounds)),
      error_(std::move(error)),
      coord_scales_(std::move(coord_scales)) {
    training_.validate();
    bounds_.validate();
    const Dims& dm = training_.dims;
    if (bounds_.dim() != dm.d) {
        throw DimensionMismatch("bounds dimension != d");
    }
    if (test_.size() != dm.jk()) {
        throw DimensionMismatch("test vector length != jk");
    }
    if (!test_.allFinite()) {
        throw ConfigError("test vector must be finite");
    }
    error_.validate(dm.j, dm.k);
    if (coord_scales_.size() == 0) {
        coord_scales_ = Vec::Ones(dm.d);
    }
    if (coord_scales_.size() != dm.d || (coord_scales_.array() <= 0.0).any()) {
        throw ConfigError("coord_scales must be d positive reals");
    }
    // degrees-of-freedom guard for a generically nonsingular Chat
    const int resid = dm.n + 1 - dm.m();
    if (resid < 1) {
        throw ConfigError("need n+1-m >= 1");
    }
    if (resid * dm.k < dm.j) {
        throw ConfigError("need (n+1-m)k >= j for a nonsingular Chat");
    }

    design_scaled_ = training_.design;
    for (int l = 0; l < dm.d; ++l) {
        design_scaled_.col(l) *= coord_scales_[l];
    }
    sq_diff_.reserve(dm.d);
    for (int l = 0; l < dm.d; ++l) {
        Mat sq(dm.n, dm.n);
        for (int i = 0; i < dm.n; ++i) {
            sq(i, i) = 0.0;
            for (int r = i + 1; r < dm.n; ++r) {
                const double diff = design_scaled_(i, l) - design_scaled_(r, l);
                sq(i, r) = diff * diff;
                sq(r, i) = sq(i, r);
            }
        }
        sq_diff_.push_back(std::move(sq));
    }
    h_design_.resize(dm.n, dm.m());
    h_design_.col(0).setOnes();
    h_design_.rightCols(dm.d) = training_.design;

    d_aug_.resize(dm.n + 1, dm.jk());
    d_aug_.topRows(dm.n) = training_.data;
    d_aug_.row(dm.n) = test_.transpose();

    const double mean = training_.data.mean();
    data_variance_ = (training_.data.array() - mean).square().mean();
}

Mat InverseProblem::assemble_a_aug(const Vec& s_new, const Vec& b) const {
    const Dims& dm = training_.dims;
    const int n = dm.n;
    Mat a(n + 1, n + 1);
    auto block = a.topLeftCorner(n, n);
    block.noalias() = b[0] * sq_diff_[0];
    for (int l = 1; l < dm.d; ++l) {
        block.noalias() += b[l] * sq_diff_[l];
    }
    block = (-block.array()).exp();

    Vec s_scaled = s_new.cwiseProduct(coord_scales_);
    Vec q = Vec::Zero(n);
    for (int l = 0; l < dm.d; ++l) {
        q += b[l] * (design_scaled_.col(l).array() - s_scaled[l]).square().matrix();
    }
    a.col(n).head(n) = (-q.array()).exp();
    a.row(n).head(n) = a.col(n).head(n).transpose();
    a(n, n) = 1.0;
    return a;
}

Mat InverseProblem::h_aug(const Vec& s_new) const {
    const Dims& dm = training_.dims;
    Mat h(dm.n + 1, dm.m());
    h.topRows(dm.n) = h_design_;
    h(dm.n, 0) = 1.0;
    h.row(dm.n).tail(dm.d) = s_new.transpose();
    return h;
}

bool InverseProblem::coincides_with_design(const Vec& s_new) const {
    const Dims& dm = training_.dims;
    for (int i = 0; i < dm.n; ++i) {
        bool close = true;
        for (int l = 0; l < dm.d; ++l) {
            if (std::abs(s_new[l] - training_.design(i, l)) > 1e-12 * bounds_.width(l)) {
                close = false;
                break;
            }
        }
        if (close) return true;
    }
    return false;
}

Augmented build_augmented(const InverseProblem& problem, const Vec& s_new, const Vec& b) {
    if (s_new.size() != problem.dims().d || b.size() != problem.dims().d) {
        throw DimensionMismatch("build_augmented: state dimension mismatch");
    }
    if (problem.coincides_with_design(s_new)) {
        throw DuplicateDesignPoint("s_new coincides with a design vector");
    }
    Augmented out;
    out.h_aug = problem.h_aug(s_new);
    out.a_aug = problem.assemble_a_aug(s_new, b);
    out.d_aug = problem.d_aug();
    return out;
}

Mat gls_projection(const Mat& h, const Mat& a) {
    const int p = static_cast<int>(a.rows());
    if (h.rows() != p || a.cols() != p) {
        throw DimensionMismatch("gls_projection: dimension mismatch");
    }
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) {
        throw SingularCovariance("gls_projection: A not positive definite");
    }
    Mat a_inv_h = llt.solve(h);
    Mat p_small = h.transpose() * a_inv_h;
    Eigen::LLT<Mat> llt_p(p_small);
    if (llt_p.info() != Eigen::Success) {
        throw RankDeficientBasis("gls_projection: H'A^-1H singular");
    }
    Mat m = llt.solve(Mat::Identity(p, p));
    m.noalias() -= a_inv_h * llt_p.solve(a_inv_h.transpose());
    return 0.5 * (m + m.transpose());
}

namespace {

// W[r,r'] = sum_{t,u} psi_inv(t,u) G(r*k+t, r'*k+u)
Mat contract_by_sigma_inv(const Mat& g, const Mat& sigma_inv, int j, int k) {
    Mat w = Mat::Zero(j, j);
    for (int t = 0; t < k; ++t) {
        for (int u = 0; u < k; ++u) {
            const double psi = sigma_inv(t, u);
            if (psi == 0.0) continue;
            for (int rp = 0; rp < j; ++rp) {
                for (int r = 0; r < j; ++r) {
                    w(r, rp) += psi * g(r * k + t, rp * k + u);
                }
            }
        }
    }
    return w;
}

}  // namespace

Mat chat_gls_aug(const Mat& d, const Mat& m_proj, const Mat& sigma, const Dims& dims) {
    Eigen::LLT<Mat> llt_sigma(sigma);
    if (llt_sigma.info() != Eigen::Success) {
        throw SingularCovariance("chat_gls_aug: Sigma not positive definite");
    }
    Mat sigma_inv = llt_sigma.solve(Mat::Identity(dims.k, dims.k));
    Mat g = d.transpose() * m_proj * d;
    return contract_by_sigma_inv(g, sigma_inv, dims.j, dims.k);
}

Mat apply_measurement_error(const Mat& omega, const ErrorModel& error) {
    switch (error.kind) {
        case ErrorModel::Kind::none:
            return omega;
        case ErrorModel::Kind::scalar: {
            if (error.phi == 0.0) return omega;
            Mat out = omega;
            out.diagonal().array() += error.phi;
            return out;
        }
        case ErrorModel::Kind::kron: {
            Mat varsigma = kron_covariance(error.sigma1, error.sigma2);
            if (varsigma.rows() != omega.rows()) {
                throw DimensionMismatch("measurement error size != covariance size");
            }
            return omega + varsigma;
        }
    }
    return omega;
}

Mat effective_sigma(const Mat& sigma, const ErrorModel& error) {
    switch (error.kind) {
        case ErrorModel::Kind::none:
            return sigma;
        case ErrorModel::Kind::scalar: {
            if (error.phi == 0.0) return sigma;
            Mat out = sigma;
            out.diagonal().array() += error.phi;
            return out;
        }
        case ErrorModel::Kind::kron:
            throw ConfigError(
                "kron measurement error is unsupported in the marginalized posterior; "
                "use the scalar form or the matrix-normal likelihood path");
    }
    return sigma;
}

namespace {

struct EvalResult {
    bool ok = false;
    LogPosteriorTerms terms{};
    const char* reason = "";
};

EvalResult evaluate(const InverseProblem& problem, const PosteriorState& state) {
    EvalResult res;
    const Dims& dm = problem.dims();
    const int n = dm.n;
    const int m = dm.m();
    const int jk = dm.jk();
    const int resid = n + 1 - m;

    if (!problem.bounds().contains(state.s)) {
        res.reason = "s_new out of bounds";
        return res;
    }
    if ((state.b.array() <= 0.0).any() || !state.b.allFinite()) {
        res.reason = "smoothness parameters must be positive";
        return res;
    }
    if (problem.coincides_with_design(state.s)) {
        res.reason = "s_new coincides with a design vector";
        return res;
    }

    Mat sigma_eff = effective_sigma(state.sigma, problem.error());
    Eigen::LLT<Mat> llt_sigma(sigma_eff);
    if (llt_sigma.info() != Eigen::Success) {
        res.reason = "Sigma not positive definite";
        return res;
    }
    Mat sigma_inv = llt_sigma.solve(Mat::Identity(dm.k, dm.k));

    Mat a_aug = problem.assemble_a_aug(state.s, state.b);
    Eigen::LLT<Mat> llt_a;
    if (!jittered_llt(a_aug, llt_a)) {
        res.reason = "A_aug not positive definite after jitter escalation";
        return res;
    }

    Mat y = problem.h_aug(state.s);
    llt_a.matrixL().solveInPlace(y);  // (n+1) x m
    Mat x = problem.d_aug();
    llt_a.matrixL().solveInPlace(x);  // (n+1) x jk

    Mat p_small = y.transpose() * y;  // H'A^-1H
    Eigen::LLT<Mat> llt_p(p_small);
    if (llt_p.info() != Eigen::Success) {
        res.reason = "H'A^-1H rank deficient";
        return res;
    }

    Mat g(jk, jk);
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    g = Mat(g.selfadjointView<Eigen::Lower>());
    Mat c1 = x.transpose() * y;  // jk x m
    g.noalias() -= c1 * llt_p.solve(c1.transpose());

    Mat w = contract_by_sigma_inv(g, sigma_inv, dm.j, dm.k);
    w = 0.5 * (w + w.transpose());
    Eigen::LLT<Mat> llt_w(w);
    if (llt_w.info() != Eigen::Success) {
        res.reason = "Chat not positive definite";
        return res;
    }

    res.terms.log_det_a_aug = log_det_from_llt(llt_a);
    res.terms.log_det_hah = log_det_from_llt(llt_p);
    res.terms.log_det_sigma = log_det_from_llt(llt_sigma);
    res.terms.log_det_chat = log_det_from_llt(llt_w);
    res.terms.value = -0.5 * jk * res.terms.log_det_a_aug - 0.5 * jk * res.terms.log_det_hah -
                      0.5 * (dm.j * resid + dm.k + 1) * res.terms.log_det_sigma -
                      0.5 * (resid * dm.k) * res.terms.log_det_chat;
    res.ok = true;
    return res;
}

}  // namespace

double log_posterior(const InverseProblem& problem, const PosteriorState& state) {
    if (state.s.size() != problem.dims().d || state.b.size() != problem.dims().d ||
        state.sigma.rows() != problem.dims().k || state.sigma.cols() != problem.dims().k) {
        throw DimensionMismatch("log_posterior: state dimension mismatch");
    }
    EvalResult res = evaluate(problem, state);
    return res.ok ? res.terms.value : kNegInf;
}

LogPosteriorTerms log_posterior_terms(const InverseProblem& problem, const PosteriorState& state) {
    EvalResult res = evaluate(problem, state);
    if (!res.ok) {
        throw SingularCovariance(std::string("log_posterior_terms: ") + res.reason);
    }
    return res.terms;
}

LogTarget make_log_target(const InverseProblem& problem) {
    const int d = problem.dims().d;
    const int k = problem.dims().k;
    return [&problem, d, k](const Vec& phi) {
        return log_posterior(problem, PosteriorState::unpack(phi, d, k));
    };
}

LogTarget make_conditional_target(const InverseProblem& problem, const Vec& b, const Mat& sigma) {
    PosteriorState st;
    st.b = b;
    st.sigma = sigma;
    return [&problem, st](const Vec& s) mutable {
        st.s = s;
        return log_posterior(problem, st);
    };
}

}  // namespace gpinv
