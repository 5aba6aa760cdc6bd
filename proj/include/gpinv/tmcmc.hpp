#ifndef GPINV_TMCMC_HPP
#define GPINV_TMCMC_HPP

#include <cstdint>
#include <vector>

#include "gpinv/posterior.hpp"

// Transformation-based MCMC: the whole state is block-updated by additive
// transformations of a single scalar draw eps ~ N(0,1) truncated to
// positives. Coordinate j moves to phi_j + c_j*eps with probability pi_j
// (forward) and to phi_j - c_j*eps otherwise (backward).
//
// RNG stream contract (bit-reproducibility and the Metropolis regression
// test depend on it): every iteration consumes exactly dim+2 uniforms from
// one RngStream, in this order:
//   1 uniform for eps (inverse-CDF |normal|), dim uniforms for the move
//   signs (u < pi_j is forward), 1 uniform for the accept decision. The
//   accept uniform is drawn even when the proposal is certainly rejected.

namespace gpinv {

struct TmcmcConfig {
    Vec scales;         // c_j > 0
    Vec move_probs;     // pi_j in (0,1)
    long burn_in = 0;
    long iterations = 1;
    long thin = 1;
    std::uint64_t seed = 0;
    Vec init;

    void validate() const;
    int dim() const { return static_cast<int>(init.size()); }
};

struct Chain {
    Mat samples;   // stored states, one row each
    Vec log_post;  // matched log-posterior values
    long accept_count = 0;
    long proposal_count = 0;

    long size() const { return samples.rows(); }
};

struct Proposal {
    Vec state;
    std::vector<int> forward;  // 1 = forward move, 0 = backward
    double eps = 0.0;
};

// phi'_j = phi_j + (forward_j ? +1 : -1) * c_j * eps
Vec apply_move(const Vec& state, const Vec& scales, const std::vector<int>& forward, double eps);

Proposal propose(const Vec& state, const Vec& scales, const Vec& move_probs, RngStream& rng);

// log of the move-probability ratio plus the target difference; accept when
// log u is below this. With all pi_j = 1/2 this is plain Metropolis.
double acceptance_log_ratio(double target_old, double target_new,
                            const std::vector<int>& forward, const Vec& move_probs);

// Deterministic given config.seed. Throws InvalidInit when the initial
// state has -inf target.
Chain run_chain(const LogTarget& target, const TmcmcConfig& config);

struct ChainDiagnostics {
    double acceptance_rate = 0.0;
    Vec mean;
    Vec variance;
    Vec lag1_autocorr;  // 1 by convention for a constant coordinate
    Vec map_state;
    double max_log_post = 0.0;
};

ChainDiagnostics diagnostics(const Chain& chain);

}  // namespace gpinv

#endif
