#include "gpinv/core_model.hpp"

#include <cmath>
#include <sstream>

namespace gpinv {

bool Bounds::contains(const Vec& s) const {
    if (s.size() != lower.size()) {
        throw DimensionMismatch("bounds dimension mismatch");
    }
    for (int i = 0; i < s.size(); ++i) {
        if (!(s[i] >= lower[i] && s[i] <= upper[i])) return false;
    }
    return true;
}

void Bounds::validate() const {
    if (lower.size() != upper.size() || lower.size() == 0) {
        throw ConfigError("bounds must have matching nonzero dimensions");
    }
    for (int i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) {
            throw ConfigError("bounds require lower < upper in every coordinate");
        }
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
            throw ConfigError("bounds must be finite");
        }
    }
}

void TrainingSet::validate() const {
    if (dims.n < 1 || dims.j < 1 || dims.k < 1 || dims.d < 1) {
        throw ConfigError("dims must all be >= 1");
    }
    if (design.rows() != dims.n || design.cols() != dims.d) {
        throw DimensionMismatch("design matrix must be n x d");
    }
    if (data.rows() != dims.n || data.cols() != dims.jk()) {
        throw DimensionMismatch("training data matrix must be n x jk");
    }
    if (dims.n < dims.m() + 1) {
        throw ConfigError("need n >= m+1 = d+2 training points");
    }
    if (!design.allFinite() || !data.allFinite()) {
        throw ConfigError("training inputs must be finite");
    }
    for (int i = 0; i < dims.n; ++i) {
        for (int r = i + 1; r < dims.n; ++r) {
            if ((design.row(i) - design.row(r)).cwiseAbs().maxCoeff() == 0.0) {
                std::ostringstream os;
                os << "design vectors " << i << " and " << r << " coincide";
                throw DuplicateDesignPoint(os.str());
            }
        }
    }
}

Vec vectorize(const Mat& obs) {
    const int j = static_cast<int>(obs.rows());
    const int k = static_cast<int>(obs.cols());
    Vec out(j * k);
    for (int m1 = 0; m1 < j; ++m1) {
        for (int m2 = 0; m2 < k; ++m2) {
            out[m1 * k + m2] = obs(m1, m2);
        }
    }
    return out;
}

Mat devectorize(const Vec& v, int j, int k) {
    if (v.size() != static_cast<long>(j) * k) {
        throw DimensionMismatch("devectorize: vector length != j*k");
    }
    Mat obs(j, k);
    for (int m1 = 0; m1 < j; ++m1) {
        for (int m2 = 0; m2 < k; ++m2) {
            obs(m1, m2) = v[m1 * k + m2];
        }
    }
    return obs;
}

Vec basis_vector(const Vec& s) {
    Vec h(s.size() + 1);
    h[0] = 1.0;
    h.tail(s.size()) = s;
    return h;
}

double kernel_value(const Vec& s, const Vec& t, const Vec& b) {
    if (s.size() != t.size() || s.size() != b.size()) {
        throw DimensionMismatch("kernel_value: dimension mismatch");
    }
    double q = 0.0;
    for (int l = 0; l < s.size(); ++l) {
        const double diff = s[l] - t[l];
        q += b[l] * diff * diff;
    }
    return std::exp(-q);
}

Mat kernel_matrix(const Mat& points, const Vec& b) {
    const int p = static_cast<int>(points.rows());
    if (points.cols() != b.size()) {
        throw DimensionMismatch("kernel_matrix: dimension mismatch");
    }
    Mat a(p, p);
    for (int i = 0; i < p; ++i) {
        a(i, i) = 1.0;
        for (int r = i + 1; r < p; ++r) {
            double q = 0.0;
            for (int l = 0; l < points.cols(); ++l) {
                const double diff = points(i, l) - points(r, l);
                q += b[l] * diff * diff;
            }
            const double v = std::exp(-q);
            a(i, r) = v;
            a(r, i) = v;
        }
    }
    return a;
}

Vec cross_kernel_vector(const Mat& points, const Vec& s, const Vec& b) {
    const int p = static_cast<int>(points.rows());
    if (points.cols() != s.size() || s.size() != b.size()) {
        throw DimensionMismatch("cross_kernel_vector: dimension mismatch");
    }
    Vec out(p);
    for (int i = 0; i < p; ++i) {
        double q = 0.0;
        for (int l = 0; l < s.size(); ++l) {
            const double diff = points(i, l) - s[l];
            q += b[l] * diff * diff;
        }
        out[i] = std::exp(-q);
    }
    return out;
}

Mat kron_covariance(const Mat& row_cov, const Mat& comp_cov) {
    const int j = static_cast<int>(row_cov.rows());
    const int k = static_cast<int>(comp_cov.rows());
    if (row_cov.cols() != j || comp_cov.cols() != k) {
        throw DimensionMismatch("kron_covariance: factors must be square");
    }
    Mat out(j * k, j * k);
    for (int m1 = 0; m1 < j; ++m1) {
        for (int m1p = 0; m1p < j; ++m1p) {
            out.block(m1 * k, m1p * k, k, k) = row_cov(m1, m1p) * comp_cov;
        }
    }
    return out;
}

bool jittered_llt(const Mat& a, Eigen::LLT<Mat>& llt) {
    llt.compute(a);
    if (llt.info() == Eigen::Success) return true;
    const double scale = a.diagonal().mean();
    double lambda = 1e-10 * scale;
    const double lambda_max = 1e-6 * scale;
    Mat work = a;
    while (lambda <= lambda_max) {
        work.diagonal() = a.diagonal().array() + lambda;
        llt.compute(work);
        if (llt.info() == Eigen::Success) return true;
        lambda *= 10.0;
    }
    return false;
}

Eigen::LLT<Mat> kernel_cholesky(const Mat& a) {
    Eigen::LLT<Mat> llt;
    if (!jittered_llt(a, llt)) {
        throw SingularKernel("kernel matrix not positive definite after jitter escalation");
    }
    return llt;
}

double log_det_from_llt(const Eigen::LLT<Mat>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double matrix_normal_logpdf(const Mat& x, const Mat& mean, const Mat& a, const Mat& omega) {
    const int p = static_cast<int>(x.rows());
    const int q = static_cast<int>(x.cols());
    if (mean.rows() != p || mean.cols() != q || a.rows() != p || a.cols() != p ||
        omega.rows() != q || omega.cols() != q) {
        throw DimensionMismatch("matrix_normal_logpdf: dimension mismatch");
    }
    Eigen::LLT<Mat> llt_a(a);
    if (llt_a.info() != Eigen::Success) {
        throw SingularCovariance("matrix_normal_logpdf: row covariance not PD");
    }
    Eigen::LLT<Mat> llt_o(omega);
    if (llt_o.info() != Eigen::Success) {
        throw SingularCovariance("matrix_normal_logpdf: column covariance not PD");
    }
    Mat r = x - mean;
    llt_a.matrixL().solveInPlace(r);                       // La^-1 (X-M)
    Mat rt = r.transpose();
    llt_o.matrixL().solveInPlace(rt);                      // Lo^-1 (X-M)^T La^-T
    const double trace_term = rt.squaredNorm();
    constexpr double log2pi = 1.8378770664093454836;
    return -0.5 * p * q * log2pi - 0.5 * q * log_det_from_llt(llt_a) -
           0.5 * p * log_det_from_llt(llt_o) - 0.5 * trace_term;
}

}  // namespace gpinv
