#ifndef GPINV_CORE_MODEL_HPP
#define GPINV_CORE_MODEL_HPP

#include <Eigen/Cholesky>

#include "gpinv/common.hpp"

// GP building blocks for matrix-variate emulation: linear mean basis,
// square-exponential kernel with diagonal smoothness matrix, Kronecker
// covariance assembly, the observation-major vectorization convention and
// the matrix-normal log-density.
//
// Vectorization convention used throughout: a j x k observation matrix maps
// to a jk vector with element index l = m1*k + m2 (0-based: row-major), so
// the component index is the fast one.

namespace gpinv {

struct Dims {
    int n = 0;  // training points
    int j = 0;  // measurements per observation matrix
    int k = 0;  // observable components
    int d = 0;  // parameter dimension
    int m() const { return d + 1; }
    int jk() const { return j * k; }
};

struct Bounds {
    Vec lower;
    Vec upper;

    int dim() const { return static_cast<int>(lower.size()); }
    double width(int i) const { return upper[i] - lower[i]; }
    bool contains(const Vec& s) const;
    void validate() const;
};

// Design vectors plus the n x jk matrix of vectorized observations.
struct TrainingSet {
    Mat design;  // n x d
    Mat data;    // n x jk
    Dims dims;

    // distinctness of design vectors, n >= m+1 and basic shape checks
    void validate() const;
};

Vec vectorize(const Mat& obs);
Mat devectorize(const Vec& v, int j, int k);

// h(s) = (1, s)^T
Vec basis_vector(const Vec& s);

// exp{-(s-t)^T Q (s-t)} with Q = diag(b)
double kernel_value(const Vec& s, const Vec& t, const Vec& b);

// Gram matrix over a point set (rows of `points`); symmetric, unit diagonal.
Mat kernel_matrix(const Mat& points, const Vec& b);

// (a(points_1, s), ..., a(points_p, s))^T
Vec cross_kernel_vector(const Mat& points, const Vec& s, const Vec& b);

// row_cov (j x j) Kronecker comp_cov (k x k) under the l = m1*k + m2 layout
Mat kron_covariance(const Mat& row_cov, const Mat& comp_cov);

// Cholesky with escalating diagonal jitter: lambda = 1e-10 * mean(diag),
// escalating x10 up to 1e-6 * mean(diag). Returns false if all attempts fail.
bool jittered_llt(const Mat& a, Eigen::LLT<Mat>& llt);

// jittered_llt that throws SingularKernel on failure
Eigen::LLT<Mat> kernel_cholesky(const Mat& a);

// log MN density of X ~ MN(M, A, Omega); Cholesky based, never forms the
// pq x pq Kronecker covariance. Throws SingularCovariance.
double matrix_normal_logpdf(const Mat& x, const Mat& mean, const Mat& a, const Mat& omega);

double log_det_from_llt(const Eigen::LLT<Mat>& llt);

}  // namespace gpinv

#endif
