#include <doctest.h>

#include <cmath>
#include <limits>

#include "gpinv/oracle.hpp"
#include "test_util.hpp"

using namespace gpinv;
using testutil::random_matrix;
using testutil::random_spd;
using testutil::random_vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

oracle::TinyProblem tiny_problem() {
    oracle::TinyProblem p;
    p.design.resize(6);
    p.design << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
    p.data.resize(6);
    for (int i = 0; i < 6; ++i) {
        p.data[i] = std::sin(3.0 * p.design[i] + 0.4) + 0.05 * std::cos(9.0 * p.design[i]);
    }
    p.test = std::sin(3.0 * 0.55 + 0.4);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("mvn_logpdf_via_vec reduces to the scalar normal") {
    Mat x(1, 1), mean(1, 1), one(1, 1);
    x << 1.3;
    mean << 0.8;
    one << 2.0;
    Mat omega(1, 1);
    omega << 0.5;
    const double expected = -0.5 * kLog2Pi - 0.5 * std::log(1.0) - 0.5 * (0.5 * 0.5) / 1.0;
    CHECK(oracle::mvn_logpdf_via_vec(x, mean, one, omega) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("identity covariances reduce to the Frobenius form") {
    RngStream rng(201);
    Mat x = random_matrix(rng, 3, 4);
    Mat mean = random_matrix(rng, 3, 4);
    const double expected = -0.5 * 12 * kLog2Pi - 0.5 * (x - mean).squaredNorm();
    CHECK(oracle::mvn_logpdf_via_vec(x, mean, Mat::Identity(3, 3), Mat::Identity(4, 4)) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(matrix_normal_logpdf(x, mean, Mat::Identity(3, 3), Mat::Identity(4, 4)) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("matrix_normal_logpdf agrees with the vec-identity oracle") {
    RngStream rng(211);
    for (int rep = 0; rep < 100; ++rep) {
        Mat x = random_matrix(rng, 3, 4);
        Mat mean = random_matrix(rng, 3, 4);
        Mat a = random_spd(rng, 3);
        Mat omega = random_spd(rng, 4);
        const double fast = matrix_normal_logpdf(x, mean, a, omega);
        const double slow = oracle::mvn_logpdf_via_vec(x, mean, a, omega);
        CHECK(std::abs(fast - slow) < 1e-10 * (1.0 + std::abs(slow)));
    }
    CHECK_THROWS_AS(oracle::mvn_logpdf_via_vec(Mat::Zero(9, 9), Mat::Zero(9, 9),
                                               Mat::Identity(9, 9), Mat::Identity(9, 9)),
                    ConfigError);
}

TEST_CASE("grid_posterior normalizes shifted weights") {
    auto target = [](const Vec& x) { return -0.5 * x.squaredNorm(); };
    Mat single(1, 2);
    single << 0.3, -0.2;
    Vec w1 = oracle::grid_posterior(target, single);
    CHECK(w1.size() == 1);
    CHECK(w1[0] == 1.0);

    RngStream rng(221);
    Mat grid = random_matrix(rng, 400, 2);
    Vec w = oracle::grid_posterior(target, grid);
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
    CHECK(w.minCoeff() >= 0.0);

    auto neg = [](const Vec&) { return -kInf; };
    CHECK_THROWS_AS(oracle::grid_posterior(neg, grid), AllMinusInfinity);
}

TEST_CASE("an even map over a symmetric design yields a symmetric posterior") {
    oracle::SyntheticSpec spec;
    spec.dims = Dims{7, 2, 1, 1};
    spec.family = oracle::MapFamily::cosine_even;
    spec.noise_sd = 0.0;
    spec.s_true = Vec::Constant(1, 0.4);
    spec.box.lower = Vec::Constant(1, -1.0);
    spec.box.upper = Vec::Constant(1, 1.0);
    spec.seed = 23;
    auto data = oracle::synth_generate(spec);
    // the 7-point grid on [-1,1] is symmetric under reflection
    InverseProblem problem(data.training, data.test, spec.box);

    Vec b = Vec::Constant(1, 1.3);
    Mat sigma = Mat::Constant(1, 1, 2e-3 * problem.data_variance_scale());
    LogTarget target = make_conditional_target(problem, b, sigma);

    const int half = 9;
    Mat states(2 * half, 1);
    for (int i = 0; i < half; ++i) {
        const double x = 0.083 + 0.09 * i;  // keep off the design points
        states(2 * i, 0) = x;
        states(2 * i + 1, 0) = -x;
    }
    Vec w = oracle::grid_posterior(target, states);
    for (int i = 0; i < half; ++i) {
        CHECK(w[2 * i] == doctest::Approx(w[2 * i + 1]).epsilon(1e-10));
    }
}

TEST_CASE("log_integral_gl matches the inverse-gamma normalizer") {
    // integrand c^-a exp(-b/c): integral over (0,inf) is Gamma(a-1) b^{-(a-1)}
    const double a = 4.5, b = 2.3;
    auto log_f = [&](double t) {  // c = e^t, jacobian e^t
        return -a * t - b * std::exp(-t) + t;
    };
    const double centre = std::log(b / a);
    const double got = oracle::log_integral_gl(log_f, centre - 30.0, centre + 30.0, 300);
    const double expected = std::lgamma(a - 1.0) - (a - 1.0) * std::log(b);
    CHECK(got == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("gaussian integrals converge with far fewer than 1e4 evaluations") {
    const double mu = 0.7, sd = 0.35;
    auto log_f = [&](double x) {
        const double z = (x - mu) / sd;
        return -0.5 * z * z;
    };
    const double got = oracle::log_integral_gl(log_f, mu - 10.0 * sd, mu + 10.0 * sd, 64);
    const double expected = 0.5 * std::log(2.0 * 3.14159265358979323846) + std::log(sd);
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("quadrature marginal check matches log_posterior differences") {
    oracle::TinyProblem tiny = tiny_problem();

    TrainingSet ts;
    ts.dims = Dims{6, 1, 1, 1};
    ts.design = tiny.design;
    ts.data = tiny.data;
    Bounds bounds{Vec::Zero(1), Vec::Ones(1)};
    InverseProblem problem(ts, Vec::Constant(1, tiny.test), bounds);

    struct StatePair {
        double s1, b1, sig1, s2, b2, sig2;
    };
    const StatePair pairs[] = {
        {0.55, 1.0, 0.05, 0.35, 1.0, 0.05},
        {0.55, 1.0, 0.05, 0.55, 2.5, 0.05},
        {0.55, 1.0, 0.05, 0.55, 1.0, 0.21},
        {0.13, 0.7, 0.11, 0.77, 1.9, 0.04},
        {0.91, 3.0, 0.02, 0.45, 0.5, 0.3},
    };
    for (const auto& p : pairs) {
        PosteriorState st1, st2;
        st1.s = Vec::Constant(1, p.s1);
        st1.b = Vec::Constant(1, p.b1);
        st1.sigma = Mat::Constant(1, 1, p.sig1);
        st2.s = Vec::Constant(1, p.s2);
        st2.b = Vec::Constant(1, p.b2);
        st2.sigma = Mat::Constant(1, 1, p.sig2);

        const double impl_diff = log_posterior(problem, st1) - log_posterior(problem, st2);
        const double oracle_diff = oracle::quadrature_marginal_check(tiny, p.s1, p.b1, p.sig1) -
                                   oracle::quadrature_marginal_check(tiny, p.s2, p.b2, p.sig2);
        CHECK(std::abs(impl_diff - oracle_diff) < 1e-3);
    }
}

TEST_CASE("synthetic generator determinism and fixtures") {
    oracle::SyntheticSpec spec = oracle::default_fixture_spec();
    auto d1 = oracle::synth_generate(spec);
    auto d2 = oracle::synth_generate(spec);
    CHECK((d1.training.design - d2.training.design).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d1.training.data - d2.training.data).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d1.test - d2.test).cwiseAbs().maxCoeff() == 0.0);

    CHECK(d1.training.dims.n == 25);
    CHECK(d1.training.dims.jk() == 8);
    CHECK(d1.test.size() == 8);
    // s_true deliberately off the 5x5 grid
    for (int i = 0; i < 25; ++i) {
        CHECK((d1.training.design.row(i).transpose() - d1.s_true).cwiseAbs().maxCoeff() >
              0.01);
    }

    // noise perturbs but does not relocate the signal
    spec.noise_sd = 0.1;
    auto noisy = oracle::synth_generate(spec);
    const double max_shift =
        (noisy.training.data - d1.training.data).cwiseAbs().maxCoeff();
    CHECK(max_shift > 0.0);
    CHECK(max_shift < 1.0);

    // latin hypercube keeps points inside the box and distinct
    spec.design_rule = oracle::DesignRule::latin_hypercube;
    auto lhs = oracle::synth_generate(spec);
    for (int i = 0; i < 25; ++i) {
        CHECK(spec.box.contains(lhs.training.design.row(i).transpose()));
    }
}

TEST_SUITE_END();
