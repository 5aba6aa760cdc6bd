#ifndef GPINV_ORACLE_HPP
#define GPINV_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "gpinv/posterior.hpp"

// Brute-force reference implementations used only by tests: the vec-identity
// multivariate-normal density, grid evaluation of a log target, quadrature
// marginalization of the j=1,k=1 toy posterior, and a synthetic ground-truth
// data generator. Deliberately dense and naive; these paths share no
// numerical code with the main modules.

namespace gpinv::oracle {

// Forms the pq x pq Kronecker covariance of the row-major flattening
// explicitly (pq <= 64) and evaluates the multivariate normal log-density
// through a dense eigendecomposition.
double mvn_logpdf_via_vec(const Mat& x, const Mat& mean, const Mat& a, const Mat& omega);

// Exponentiates shifted log-target values over grid states (rows) and
// normalizes to sum 1. Throws AllMinusInfinity when nothing is finite.
Vec grid_posterior(const LogTarget& target, const Mat& states);
Vec grid_posterior(const InverseProblem& problem, const std::vector<PosteriorState>& states);

// j = k = 1, d = 1 inverse problem small enough for quadrature.
struct TinyProblem {
    Vec design;  // n design scalars
    Vec data;    // n observations
    double test = 0.0;
};

// log of the B- and C-marginalized posterior at (s_new, b, sigma), computed
// by tensor Gauss-Legendre quadrature over the two mean coefficients and a
// log-substituted quadrature over the scalar C. Matches log_posterior up to
// one state-independent constant. Throws QuadratureNonConvergence.
double quadrature_marginal_check(const TinyProblem& problem, double s_new, double b,
                                 double sigma);

// Gauss-Legendre on [lo, hi] of exp(log_f) in the log domain; returns the
// log of the integral. Building block of the quadrature oracle, exposed for
// the analytic inverse-gamma cross-check.
double log_integral_gl(const std::function<double(double)>& log_f, double lo, double hi,
                       int nodes);

enum class MapFamily {
    linear,        // affine in s: exercises exact GLS recovery
    sinusoid_sum,  // per-component sums of two sinusoids with distinct phases
    cosine_even,   // even in every coordinate: symmetric-posterior fixture
    periodic       // period box_width/2 in s1: multimodal fixture
};

enum class DesignRule { grid, latin_hypercube };

struct SyntheticSpec {
    Vec s_true;
    MapFamily family = MapFamily::sinusoid_sum;
    double noise_sd = 0.0;
    Dims dims;
    DesignRule design_rule = DesignRule::grid;
    Bounds box;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    TrainingSet training;
    Vec test;
    Vec s_true;
};

Vec synth_map(const SyntheticSpec& spec, const Vec& s);
SyntheticData synth_generate(const SyntheticSpec& spec);

// The standard fixture: d=2, n=25 grid on [0,1]^2, j=4, k=2, noise-free
// sums of sinusoids, s_true = (0.31, 0.67).
SyntheticSpec default_fixture_spec();

// Multimodality fixture: a period-1/2 map on [0,1] sampled on the
// commensurate 16-point grid {i/16}, with the noise replicated one period
// ahead. Data generated at s and s+1/2 coincide exactly, so the posterior
// carries near-equal modes half a box apart. d = k = 1, j <= 8.
SyntheticData periodic_bimodal_fixture(int j, double noise_sd, double s_true,
                                       std::uint64_t seed);

}  // namespace gpinv::oracle

#endif
