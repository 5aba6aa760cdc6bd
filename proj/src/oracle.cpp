#include "gpinv/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace gpinv::oracle {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration.
void gauss_legendre(int n, Vec& nodes, Vec& weights) {
    nodes.resize(n);
    weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double p0, p1, dp;
        for (int iter = 0; iter < 100; ++iter) {
            p0 = 1.0;
            p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[n - 1 - i] = weights[i];
    }
}

double log_sum_exp(const std::vector<double>& log_terms) {
    double mx = kNegInf;
    for (double v : log_terms) mx = std::max(mx, v);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : log_terms) s += std::exp(v - mx);
    return mx + std::log(s);
}

}  // namespace

double mvn_logpdf_via_vec(const Mat& x, const Mat& mean, const Mat& a, const Mat& omega) {
    const int p = static_cast<int>(x.rows());
    const int q = static_cast<int>(x.cols());
    if (p * q > 64) throw ConfigError("mvn_logpdf_via_vec: dense path limited to pq <= 64");
    if (mean.rows() != p || mean.cols() != q || a.rows() != p || omega.rows() != q) {
        throw DimensionMismatch("mvn_logpdf_via_vec: dimension mismatch");
    }

    // row-major flattening; covariance of vec is A (x) Omega, assembled here
    // with plain loops rather than any library kron
    const int pq = p * q;
    Vec r(pq);
    for (int i = 0; i < p; ++i) {
        for (int c = 0; c < q; ++c) {
            r[i * q + c] = x(i, c) - mean(i, c);
        }
    }
    Mat cov(pq, pq);
    for (int i = 0; i < p; ++i) {
        for (int ip = 0; ip < p; ++ip) {
            for (int c = 0; c < q; ++c) {
                for (int cp = 0; cp < q; ++cp) {
                    cov(i * q + c, ip * q + cp) = a(i, ip) * omega(c, cp);
                }
            }
        }
    }

    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
        throw SingularCovariance("mvn_logpdf_via_vec: covariance not positive definite");
    }
    const Vec lam = eig.eigenvalues();
    const Vec z = eig.eigenvectors().transpose() * r;
    double logdet = 0.0;
    double quad = 0.0;
    for (int i = 0; i < pq; ++i) {
        logdet += std::log(lam[i]);
        quad += z[i] * z[i] / lam[i];
    }
    constexpr double log2pi = 1.8378770664093454836;
    return -0.5 * pq * log2pi - 0.5 * logdet - 0.5 * quad;
}

Vec grid_posterior(const LogTarget& target, const Mat& states) {
    const long n = states.rows();
    if (n < 1) throw ConfigError("grid_posterior: empty grid");
    Vec logp(n);
    for (long i = 0; i < n; ++i) {
        logp[i] = target(states.row(i).transpose());
    }
    const double mx = logp.maxCoeff();
    if (mx == kNegInf) {
        throw AllMinusInfinity("grid_posterior: no grid point has finite density");
    }
    Vec w = (logp.array() - mx).exp();
    return w / w.sum();
}

Vec grid_posterior(const InverseProblem& problem, const std::vector<PosteriorState>& states) {
    if (states.empty()) throw ConfigError("grid_posterior: empty grid");
    Vec logp(static_cast<long>(states.size()));
    for (size_t i = 0; i < states.size(); ++i) {
        logp[static_cast<long>(i)] = log_posterior(problem, states[i]);
    }
    const double mx = logp.maxCoeff();
    if (mx == kNegInf) {
        throw AllMinusInfinity("grid_posterior: no grid point has finite density");
    }
    Vec w = (logp.array() - mx).exp();
    return w / w.sum();
}

double log_integral_gl(const std::function<double(double)>& log_f, double lo, double hi,
                       int nodes) {
    Vec x, w;
    gauss_legendre(nodes, x, w);
    const double mid = 0.5 * (lo + hi);
    const double halfw = 0.5 * (hi - lo);
    std::vector<double> terms(nodes);
    for (int i = 0; i < nodes; ++i) {
        terms[i] = std::log(w[i] * halfw) + log_f(mid + halfw * x[i]);
    }
    return log_sum_exp(terms);
}

namespace {

struct TinyWork {
    double log_det_a;
    double q0;   // D' A^-1 D
    Vec bv;      // H' A^-1 D
    Mat p;       // H' A^-1 H
    Vec b_hat;   // GLS centre of the B integrand
    Mat p_inv;
    int n_aug;
};

TinyWork tiny_setup(const TinyProblem& problem, double s_new, double b) {
    const int n = static_cast<int>(problem.design.size());
    if (n < 3 || n > 8) throw ConfigError("quadrature oracle expects 3 <= n <= 8");
    const int na = n + 1;

    Vec pts(na);
    pts.head(n) = problem.design;
    pts[n] = s_new;
    Vec d(na);
    d.head(n) = problem.data;
    d[n] = problem.test;

    Mat a(na, na);
    for (int i = 0; i < na; ++i) {
        for (int r = 0; r < na; ++r) {
            const double diff = pts[i] - pts[r];
            a(i, r) = std::exp(-b * diff * diff);
        }
    }
    Mat h(na, 2);
    h.col(0).setOnes();
    h.col(1) = pts;

    Mat a_inv = a.inverse();  // naive dense path, tiny n
    TinyWork work;
    work.n_aug = na;
    work.log_det_a = std::log(a.determinant());
    work.q0 = d.dot(a_inv * d);
    work.bv = h.transpose() * a_inv * d;
    work.p = h.transpose() * a_inv * h;
    work.p_inv = work.p.inverse();
    work.b_hat = work.p_inv * work.bv;
    return work;
}

// log of integral over B in R^2 of exp(-Q(B)/(2*c*sigma)) on a +-10 sd box,
// tensor Gauss-Legendre
double log_b_integral(const TinyWork& work, double c_sigma, int nodes) {
    Vec x, w;
    gauss_legendre(nodes, x, w);
    const double sd0 = std::sqrt(std::abs(work.p_inv(0, 0)) * c_sigma);
    const double sd1 = std::sqrt(std::abs(work.p_inv(1, 1)) * c_sigma);
    const double half0 = 10.0 * sd0;
    const double half1 = 10.0 * sd1;

    const double q_min = work.q0 - work.bv.dot(work.b_hat);  // Q(b_hat)
    std::vector<double> terms;
    terms.reserve(static_cast<size_t>(nodes) * nodes);
    for (int i = 0; i < nodes; ++i) {
        const double b0 = work.b_hat[0] + half0 * x[i];
        for (int r = 0; r < nodes; ++r) {
            const double b1 = work.b_hat[1] + half1 * x[r];
            const double db0 = b0 - work.b_hat[0];
            const double db1 = b1 - work.b_hat[1];
            const double q = q_min + work.p(0, 0) * db0 * db0 +
                             2.0 * work.p(0, 1) * db0 * db1 + work.p(1, 1) * db1 * db1;
            terms.push_back(std::log(w[i] * w[r] * half0 * half1) - 0.5 * q / c_sigma);
        }
    }
    return log_sum_exp(terms);
}

double tiny_log_marginal(const TinyWork& work, double sigma, int b_nodes, int c_nodes) {
    const int na = work.n_aug;
    // c-marginal is inverse-gamma-like with shape alpha = na/2 - 1
    const double alpha = 0.5 * na - 1.0;
    const double q_min = work.q0 - work.bv.dot(work.b_hat);
    const double beta = 0.5 * q_min / sigma;
    const double t_star = std::log(std::max(beta / std::max(alpha, 0.5), 1e-300));
    const double spread = std::max(20.0 / std::sqrt(std::max(alpha, 0.25)), 10.0);

    auto log_f = [&](double t) {
        const double c = std::exp(t);
        // likelihood (c*sigma)^{-na/2}, priors c^-1 sigma^-1, jacobian c
        return -0.5 * work.log_det_a - 0.5 * na * (t + std::log(sigma)) - t - std::log(sigma) +
               log_b_integral(work, c * sigma, b_nodes) + t;
    };
    return log_integral_gl(log_f, t_star - spread, t_star + spread, c_nodes);
}

}  // namespace

double quadrature_marginal_check(const TinyProblem& problem, double s_new, double b,
                                 double sigma) {
    if (!(sigma > 0.0) || !(b > 0.0)) {
        throw ConfigError("quadrature oracle: b and sigma must be positive");
    }
    TinyWork work = tiny_setup(problem, s_new, b);
    const double v1 = tiny_log_marginal(work, sigma, 48, 160);
    const double v2 = tiny_log_marginal(work, sigma, 64, 240);
    if (!(std::abs(v1 - v2) < 1e-5 * (1.0 + std::abs(v2)))) {
        throw QuadratureNonConvergence("quadrature oracle did not converge");
    }
    return v2;
}

Vec synth_map(const SyntheticSpec& spec, const Vec& s) {
    const int jk = spec.dims.jk();
    const int d = spec.dims.d;
    Vec out(jk);
    switch (spec.family) {
        case MapFamily::linear:
            for (int l = 0; l < jk; ++l) {
                double v = 0.4 + 0.25 * l;
                for (int c = 0; c < d; ++c) {
                    v += (1.0 + 0.13 * l - 0.21 * c) * s[c];
                }
                out[l] = v;
            }
            break;
        case MapFamily::sinusoid_sum:
            // amplitudes and phase increments differ per coordinate so the
            // component set pins (s_1, ..., s_d) without aliasing
            for (int l = 0; l < jk; ++l) {
                double v = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double omega = 3.0 - 0.5 * c;
                    const double phase = (0.7 + 1.2 * c) * l + 0.3 + 0.8 * c;
                    const double amp = 1.0 + 0.1 * l + c * (0.3 - 0.07 * l);
                    v += amp * std::sin(omega * s[c] + phase);
                }
                out[l] = v;
            }
            break;
        case MapFamily::cosine_even:
            for (int l = 0; l < jk; ++l) {
                double v = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double omega = 2.6 - 0.4 * c + 0.3 * l;
                    v += (1.0 + 0.15 * l) * std::cos(omega * s[c]);
                }
                out[l] = v;
            }
            break;
        case MapFamily::periodic: {
            // period = half the box width in the first coordinate; the second
            // harmonic keeps the data matrix full rank for j up to 4
            const double u = (s[0] - spec.box.lower[0]) / spec.box.width(0);
            for (int l = 0; l < jk; ++l) {
                out[l] = (1.0 + 0.1 * l) * std::sin(4.0 * kPi * u + 0.6 * l) +
                         0.4 * std::sin(8.0 * kPi * u + 0.3 + 0.45 * l);
            }
            break;
        }
    }
    return out;
}

namespace {

Mat make_design(const SyntheticSpec& spec, RngStream& rng) {
    const int n = spec.dims.n;
    const int d = spec.dims.d;
    Mat design(n, d);
    if (spec.design_rule == DesignRule::grid) {
        int g = static_cast<int>(std::round(std::pow(static_cast<double>(n), 1.0 / d)));
        while (std::pow(static_cast<double>(g), d) < n) ++g;
        for (int i = 0; i < n; ++i) {
            int rem = i;
            for (int c = 0; c < d; ++c) {
                const int idx = rem % g;
                rem /= g;
                design(i, c) =
                    spec.box.lower[c] +
                    (g == 1 ? 0.5 : static_cast<double>(idx) / (g - 1)) * spec.box.width(c);
            }
        }
    } else {
        for (int c = 0; c < d; ++c) {
            std::vector<int> perm(n);
            for (int i = 0; i < n; ++i) perm[i] = i;
            for (int i = n - 1; i > 0; --i) {
                const int r = static_cast<int>(rng.uniform() * (i + 1));
                std::swap(perm[i], perm[r]);
            }
            for (int i = 0; i < n; ++i) {
                design(i, c) = spec.box.lower[c] +
                               (perm[i] + rng.uniform()) / n * spec.box.width(c);
            }
        }
    }
    return design;
}

}  // namespace

SyntheticData synth_generate(const SyntheticSpec& spec) {
    spec.box.validate();
    if (spec.box.dim() != spec.dims.d || spec.s_true.size() != spec.dims.d) {
        throw DimensionMismatch("synth_generate: box/s_true dimension mismatch");
    }
    if (spec.noise_sd < 0.0) throw ConfigError("synth_generate: noise_sd must be >= 0");
    RngStream rng(spec.seed);

    SyntheticData out;
    out.s_true = spec.s_true;
    out.training.dims = spec.dims;
    out.training.design = make_design(spec, rng);
    out.training.data.resize(spec.dims.n, spec.dims.jk());
    for (int i = 0; i < spec.dims.n; ++i) {
        Vec v = synth_map(spec, out.training.design.row(i).transpose());
        if (spec.noise_sd > 0.0) {
            for (int l = 0; l < spec.dims.jk(); ++l) v[l] += spec.noise_sd * rng.std_normal();
        }
        out.training.data.row(i) = v.transpose();
    }
    out.test = synth_map(spec, spec.s_true);
    if (spec.noise_sd > 0.0) {
        for (int l = 0; l < spec.dims.jk(); ++l) out.test[l] += spec.noise_sd * rng.std_normal();
    }
    out.training.validate();
    return out;
}

SyntheticData periodic_bimodal_fixture(int j, double noise_sd, double s_true,
                                       std::uint64_t seed) {
    if (j < 1 || j > 8) throw ConfigError("periodic_bimodal_fixture: need 1 <= j <= 8");
    const int n = 16;
    auto map = [&](double u) {
        Vec v(j);
        for (int l = 0; l < j; ++l) {
            v[l] = (1.0 + 0.1 * l) * std::sin(4.0 * kPi * u + 0.6 * l) +
                   0.4 * std::sin(8.0 * kPi * u + 0.3 + 0.45 * l);
        }
        return v;
    };

    RngStream rng(seed);
    SyntheticData out;
    out.s_true = Vec::Constant(1, s_true);
    out.training.dims = Dims{n, j, 1, 1};
    out.training.design.resize(n, 1);
    out.training.data.resize(n, j);
    for (int i = 0; i < n / 2; ++i) {
        const double u = static_cast<double>(i) / n;
        Vec v = map(u);
        for (int l = 0; l < j; ++l) v[l] += noise_sd * rng.std_normal();
        out.training.design(i, 0) = u;
        out.training.design(i + n / 2, 0) = u + 0.5;
        // the noise is replicated one period ahead, so the data rows are an
        // exactly periodic function of the design coordinate
        out.training.data.row(i) = v.transpose();
        out.training.data.row(i + n / 2) = v.transpose();
    }
    out.test = map(s_true);
    for (int l = 0; l < j; ++l) out.test[l] += noise_sd * rng.std_normal();
    out.training.validate();
    return out;
}

SyntheticSpec default_fixture_spec() {
    SyntheticSpec spec;
    spec.dims = Dims{25, 4, 2, 2};
    spec.s_true = Vec(2);
    spec.s_true << 0.31, 0.67;
    spec.family = MapFamily::sinusoid_sum;
    spec.noise_sd = 0.0;
    spec.design_rule = DesignRule::grid;
    spec.box.lower = Vec::Zero(2);
    spec.box.upper = Vec::Ones(2);
    spec.seed = 20240811;
    return spec;
}

}  // namespace gpinv::oracle
