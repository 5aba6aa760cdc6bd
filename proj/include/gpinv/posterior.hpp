#ifndef GPINV_POSTERIOR_HPP
#define GPINV_POSTERIOR_HPP

#include <functional>
#include <string>
#include <vector>

#include "gpinv/core_model.hpp"

// Closed-form marginalized log-posterior of (s_new, Q, Sigma) given training
// and test data, after integrating the mean coefficients B and the j x j
// observation covariance C out of the matrix-normal likelihood. Up to one
// additive constant per problem (fixed to 0 here; only differences are
// meaningful), the value is
//
//   -(jk/2) log|A_aug| - (jk/2) log|H'A^-1 H| - ((j(n+1-m)+k+1)/2) log|Sigma|
//   - ((n+1-m)k/2) log|(n+1-m)k Chat|
//
// with m = d+1 and (n+1-m)k Chat = sum_{t,u} (Sigma^-1)_{tu} M*_{tu}, the
// Sigma^-1 contraction of D_aug' M_aug D_aug partitioned by component index.

namespace gpinv {

struct ErrorModel {
    enum class Kind { none, scalar, kron };
    Kind kind = Kind::none;
    double phi = 0.0;  // scalar variant, >= 0
    Mat sigma1;        // kron variant, j x j PD
    Mat sigma2;        // kron variant, k x k PD

    void validate(int j, int k) const;
};

// TMCMC state phi = (s_new, diag Q, lower triangle of Sigma row-major),
// length d* = 2d + k(k+1)/2.
struct PosteriorState {
    Vec s;      // d
    Vec b;      // d, diagonal of Q
    Mat sigma;  // k x k symmetric

    Vec pack() const;
    static PosteriorState unpack(const Vec& phi, int d, int k);
    static int packed_size(int d, int k) { return 2 * d + k * (k + 1) / 2; }
    static std::vector<std::string> packed_names(int d, int k);
};

class InverseProblem {
public:
    InverseProblem(TrainingSet training, Vec test, Bounds bounds,
                   ErrorModel error = {}, Vec coord_scales = Vec());

    const TrainingSet& training() const { return training_; }
    const Vec& test() const { return test_; }
    const Bounds& bounds() const { return bounds_; }
    const ErrorModel& error() const { return error_; }
    const Vec& coord_scales() const { return coord_scales_; }
    const Dims& dims() const { return training_.dims; }
    const Mat& d_aug() const { return d_aug_; }

    // scaled design displacements, built once; read-only afterwards
    const Mat& design_scaled() const { return design_scaled_; }
    const std::vector<Mat>& sq_diff() const { return sq_diff_; }

    // kernel matrix over (design, s_new) in scaled coordinates
    Mat assemble_a_aug(const Vec& s_new, const Vec& b) const;
    Mat h_aug(const Vec& s_new) const;

    bool coincides_with_design(const Vec& s_new) const;

    // empirical variance of all training data entries; the documented
    // "data variance scale" used for default proposal scales
    double data_variance_scale() const { return data_variance_; }

private:
    TrainingSet training_;
    Vec test_;
    Bounds bounds_;
    ErrorModel error_;
    Vec coord_scales_;
    Mat design_scaled_;
    std::vector<Mat> sq_diff_;
    Mat h_design_;  // n x m
    Mat d_aug_;     // (n+1) x jk
    double data_variance_ = 0.0;
};

struct Augmented {
    Mat h_aug;  // (n+1) x m
    Mat a_aug;  // (n+1) x (n+1)
    Mat d_aug;  // (n+1) x jk
};

// Throws DuplicateDesignPoint when s_new coincides with a design vector.
Augmented build_augmented(const InverseProblem& problem, const Vec& s_new, const Vec& b);

// M = A^-1 - A^-1 H (H'A^-1 H)^-1 H'A^-1; annihilates the mean basis.
Mat gls_projection(const Mat& h, const Mat& a);

// Returns (n+1-m)k * Chat_GLS directly: the Sigma^-1 contraction of
// G = D' M D partitioned into k x k-indexed j x j blocks.
Mat chat_gls_aug(const Mat& d, const Mat& m_proj, const Mat& sigma, const Dims& dims);

// -inf encodes prior support: s_new out of bounds, b_i <= 0, Sigma not PD,
// s_new coinciding with a design vector, or any Cholesky failure.
double log_posterior(const InverseProblem& problem, const PosteriorState& state);

struct LogPosteriorTerms {
    double log_det_a_aug;
    double log_det_hah;
    double log_det_sigma;
    double log_det_chat;
    double value;
};

// Diagnostic breakdown of the four determinant terms; throws instead of
// returning -inf (test and tooling use).
LogPosteriorTerms log_posterior_terms(const InverseProblem& problem, const PosteriorState& state);

// Effective jk x jk covariance with the measurement-error variance added.
Mat apply_measurement_error(const Mat& omega, const ErrorModel& error);

// Sigma + phi I substitution for the marginalized posterior. The kron
// variant has no published marginalized form and is rejected here.
Mat effective_sigma(const Mat& sigma, const ErrorModel& error);

// Packed-vector adapters for the sampler.
using LogTarget = std::function<double(const Vec&)>;

LogTarget make_log_target(const InverseProblem& problem);

// s-only target at fixed (Q, Sigma); used for conditional sampling and
// grid cross-checks.
LogTarget make_conditional_target(const InverseProblem& problem, const Vec& b, const Mat& sigma);

}  // namespace gpinv

#endif
