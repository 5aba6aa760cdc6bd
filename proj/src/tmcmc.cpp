#include "gpinv/tmcmc.hpp"

#include <cmath>
#include <limits>

namespace gpinv {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void TmcmcConfig::validate() const {
    const int n = dim();
    if (n < 1) throw ConfigError("tmcmc init state is empty");
    if (scales.size() != n || (scales.array() <= 0.0).any()) {
        throw ConfigError("tmcmc scales must be positive and match the state dimension");
    }
    if (move_probs.size() != n || (move_probs.array() <= 0.0).any() ||
        (move_probs.array() >= 1.0).any()) {
        throw ConfigError("tmcmc move probabilities must lie in (0,1)");
    }
    if (iterations < 1) throw ConfigError("tmcmc iterations must be >= 1");
    if (burn_in < 0) throw ConfigError("tmcmc burn_in must be >= 0");
    if (thin < 1) throw ConfigError("tmcmc thin must be >= 1");
}

Vec apply_move(const Vec& state, const Vec& scales, const std::vector<int>& forward,
               double eps) {
    if (scales.size() != state.size() || forward.size() != static_cast<size_t>(state.size())) {
        throw DimensionMismatch("apply_move: dimension mismatch");
    }
    Vec out = state;
    for (int j = 0; j < state.size(); ++j) {
        out[j] += (forward[static_cast<size_t>(j)] ? 1.0 : -1.0) * scales[j] * eps;
    }
    return out;
}

Proposal propose(const Vec& state, const Vec& scales, const Vec& move_probs, RngStream& rng) {
    const int n = static_cast<int>(state.size());
    Proposal prop;
    prop.eps = rng.half_normal();
    prop.forward.resize(n);
    for (int j = 0; j < n; ++j) {
        prop.forward[j] = rng.uniform() < move_probs[j] ? 1 : 0;
    }
    prop.state = apply_move(state, scales, prop.forward, prop.eps);
    return prop;
}

double acceptance_log_ratio(double target_old, double target_new,
                            const std::vector<int>& forward, const Vec& move_probs) {
    if (target_new == kNegInf) return kNegInf;
    double move_ratio = 0.0;
    for (size_t j = 0; j < forward.size(); ++j) {
        const double pi = move_probs[static_cast<int>(j)];
        move_ratio += forward[j] ? std::log1p(-pi) - std::log(pi) : std::log(pi) - std::log1p(-pi);
    }
    return move_ratio + target_new - target_old;
}

Chain run_chain(const LogTarget& target, const TmcmcConfig& config) {
    config.validate();
    const int n = config.dim();
    RngStream rng(config.seed);

    Vec state = config.init;
    double lp = target(state);
    if (lp == kNegInf || std::isnan(lp)) {
        throw InvalidInit("initial state has zero posterior density");
    }

    const long stored = config.iterations / config.thin;
    Chain chain;
    chain.samples.resize(stored, n);
    chain.log_post.resize(stored);
    long out = 0;

    const long total = config.burn_in + config.iterations;
    for (long t = 1; t <= total; ++t) {
        Proposal prop = propose(state, config.scales, config.move_probs, rng);
        const double lp_new = target(prop.state);
        const double ratio = acceptance_log_ratio(lp, lp_new, prop.forward, config.move_probs);
        const double u = rng.uniform();
        ++chain.proposal_count;
        if (std::log(u) < ratio) {
            state = prop.state;
            lp = lp_new;
            ++chain.accept_count;
        }
        const long post = t - config.burn_in;
        if (post >= 1 && post % config.thin == 0) {
            chain.samples.row(out) = state.transpose();
            chain.log_post[out] = lp;
            ++out;
        }
    }
    return chain;
}

ChainDiagnostics diagnostics(const Chain& chain) {
    const long n = chain.size();
    if (n == 0) throw EmptyChain("diagnostics: empty chain");
    const int dim = static_cast<int>(chain.samples.cols());

    ChainDiagnostics diag;
    diag.acceptance_rate =
        chain.proposal_count > 0
            ? static_cast<double>(chain.accept_count) / static_cast<double>(chain.proposal_count)
            : 0.0;
    diag.mean = chain.samples.colwise().mean();
    diag.variance.resize(dim);
    diag.lag1_autocorr.resize(dim);
    for (int c = 0; c < dim; ++c) {
        const auto col = chain.samples.col(c).array() - diag.mean[c];
        const double ss = col.square().sum();
        diag.variance[c] = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
        if (ss == 0.0 || n < 2) {
            diag.lag1_autocorr[c] = 1.0;
        } else {
            const double num = (col.head(n - 1) * col.tail(n - 1)).sum();
            diag.lag1_autocorr[c] = num / ss;
        }
    }
    Eigen::Index best;
    diag.max_log_post = chain.log_post.maxCoeff(&best);
    diag.map_state = chain.samples.row(best).transpose();
    return diag;
}

}  // namespace gpinv
