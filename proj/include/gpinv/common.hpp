#ifndef GPINV_COMMON_HPP
#define GPINV_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gpinv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Base error carrying a machine-parsable category; the CLI maps categories
// to exit codes (config/parse/dimension -> 2, numerical -> 3, invalid-init -> 4).
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& msg)
        : std::runtime_error(msg), category_(std::move(category)) {}
    const std::string& category() const { return category_; }

private:
    std::string category_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse", m) {}
};
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& m) : Error("dimension", m) {}
};
struct SingularKernel : Error {
    explicit SingularKernel(const std::string& m) : Error("numerical", m) {}
};
struct SingularCovariance : Error {
    explicit SingularCovariance(const std::string& m) : Error("numerical", m) {}
};
struct RankDeficientBasis : Error {
    explicit RankDeficientBasis(const std::string& m) : Error("numerical", m) {}
};
struct DuplicateDesignPoint : Error {
    explicit DuplicateDesignPoint(const std::string& m) : Error("numerical", m) {}
};
struct QuadratureNonConvergence : Error {
    explicit QuadratureNonConvergence(const std::string& m) : Error("numerical", m) {}
};
struct AllMinusInfinity : Error {
    explicit AllMinusInfinity(const std::string& m) : Error("numerical", m) {}
};
struct EmptyChain : Error {
    explicit EmptyChain(const std::string& m) : Error("config", m) {}
};
struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& m) : Error("config", m) {}
};
struct NonPositiveRadius : Error {
    explicit NonPositiveRadius(const std::string& m) : Error("config", m) {}
};
struct InvalidInit : Error {
    explicit InvalidInit(const std::string& m) : Error("invalid-init", m) {}
};

// Inverse standard-normal CDF (Acklam's rational approximation polished with
// one Halley step), accurate to ~1e-15. Kept in-house so that sampling is
// reproducible bit-for-bit for a fixed seed.
double normal_quantile(double p);

double normal_cdf(double x);

// Uniform/normal stream over mt19937_64 with a fixed 53-bit conversion.
// Draw order is part of the public sampler contract (see tmcmc.hpp).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    // uniform on [0,1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // one uniform per draw (the u == 0 retry fires with probability 2^-53)
    double std_normal() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return normal_quantile(u);
    }

    // standard normal truncated to positives, realized as |N(0,1)|
    double half_normal() { return std::abs(std_normal()); }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

// splitmix64; used to derive independent per-fold / per-run seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Shortest-exact and table-style floating point formatting.
std::string fmt_g17(double v);
std::string fmt_g7(double v);

// FNV-1a over a byte string; stable config fingerprint for manifests.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace gpinv

#endif
