#include <gambel/analysis.hpp>
#include <gambel/samplers.hpp>

#include "test_util.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gambel;
using testutil::ks_critical;
using testutil::ks_distance;

namespace {

// cdf of an unnormalised density on (lo, inf) by quadrature
template <class D>
auto numeric_cdf(D dens, double lo)
{
    const double total = quad::to_infinity(dens, lo, 1e-11);
    return [=](double x) { return x <= lo ? 0.0 : quad::tanh_sinh(dens, lo, x, 1e-11) / total; };
}

double mc_se(const std::vector<double>& v) { return std::sqrt(testutil::variance(v) / v.size()); }

RegressionData normal_mean(double y)
{
    RegressionData d;
    d.X = Eigen::MatrixXd::Ones(1, 1);
    d.y = Eigen::VectorXd::Constant(1, y);
    return d;
}

RegressionData no_data(Eigen::Index p)
{
    RegressionData d;
    d.X = Eigen::MatrixXd::Zero(0, p);
    d.y = Eigen::VectorXd::Zero(0);
    return d;
}

// posterior mean and its MC standard error from ESS
std::pair<double, double> mean_and_se(const ChainDraws& dr, std::size_t j)
{
    const auto ch = dr.theta_chains(j);
    std::vector<double> all;
    for (const auto& c : ch) all.insert(all.end(), c.begin(), c.end());
    const double ess = effective_sample_size(ch);
    return {testutil::mean(all), std::sqrt(testutil::variance(all) / ess)};
}

double unfolded_cdf(const GambelParams& p, double x)
{
    const double h = 0.5 * gambel_cdf(p, std::fabs(x));
    return x < 0 ? 0.5 - h : 0.5 + h;
}

} // namespace

// ---- variates ----

TEST(TruncatedGG, NoTruncationMatchesGG)
{
    Rng rng(1);
    const GGParams g(1.5, 2.5, 0.8);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = rand_truncated_gg(g.a, g.d, g.q, 0.0, rng);
    EXPECT_LT(ks_distance(xs, [&](double x) { return gg_pdf_cdf(g, x).cdf; }), ks_critical(xs.size()));
}

TEST(TruncatedGG, SupportAndMemorylessness)
{
    Rng rng(2);
    std::vector<double> xs(40000);
    for (auto& x : xs) {
        x = rand_truncated_gg(1.0, 1.0, 1.0, 2.0, rng);
        ASSERT_GE(x, 2.0);
        x -= 2.0;
    }
    EXPECT_NEAR(testutil::mean(xs), 1.0, 4 * mc_se(xs));
    EXPECT_LT(ks_distance(xs, [](double x) { return -std::expm1(-x); }), ks_critical(xs.size()));
}

TEST(TruncatedGamma, AllEnvelopeBranches)
{
    // (shape, lower): mode inside, lower beyond the mode, shape < 1 far and near zero, shape <= 0
    const std::vector<std::pair<double, double>> cases{{3.0, 1.0}, {2.5, 6.0}, {0.5, 2.0}, {0.5, 0.01},
                                                       {0.0, 1e-3}, {-0.5, 0.3}, {0.02, 1e-8}, {-1.5, 2.0}};
    Rng rng(3);
    for (auto [s, lo] : cases) {
        std::vector<double> xs(20000);
        for (auto& x : xs) {
            x = rand_truncated_gamma(s, 2.0, lo, rng);
            ASSERT_GT(x, lo);
        }
        const double x0 = 2.0 * lo;
        auto dens = [s](double x) { return std::exp((s - 1.0) * std::log(x) - x); };
        auto cdf = numeric_cdf(dens, x0);
        EXPECT_LT(ks_distance(xs, [&](double x) { return cdf(2.0 * x); }, 300), ks_critical(xs.size()))
            << "shape " << s << " lower " << lo;
    }
    EXPECT_THROW(rand_truncated_gamma(0.0, 1.0, 0.0, rng), domain_error);
    EXPECT_THROW(rand_truncated_gamma(1.0, 0.0, 1.0, rng), domain_error);
}

TEST(TruncatedExp, MeanAndCdf)
{
    Rng rng(4);
    const double rate = std::pow(phi(2.0), 2.0);
    EXPECT_NEAR(rate, 0.5, 1e-15);
    std::vector<double> xs(30000);
    for (auto& x : xs) {
        x = rand_truncated_exp(rate, 1.5, rng);
        ASSERT_GT(x, 1.5);
    }
    EXPECT_NEAR(testutil::mean(xs), 1.5 + 1.0 / rate, 4 * mc_se(xs));
    EXPECT_LT(ks_distance(xs, [&](double x) { return -std::expm1(-rate * (x - 1.5)); }), ks_critical(xs.size()));
}

TEST(GIG, GammaLimit)
{
    Rng rng(5);
    std::vector<double> xs(40000);
    for (auto& x : xs) x = rand_gig(1.5, 1e-12, 2.0, rng);
    EXPECT_NEAR(testutil::mean(xs), 2 * 1.5 / 2.0, 4 * mc_se(xs));
    for (auto& x : xs) x = rand_gig(1.5, 0.0, 2.0, rng);
    EXPECT_NEAR(testutil::mean(xs), 1.5, 4 * mc_se(xs));
}

TEST(GIG, MeanMatchesQuadrature)
{
    auto dens = [](double x) { return x > 0 ? std::pow(x, 0.7 - 1) * std::exp(-(2.0 / x + 3.0 * x) / 2) : 0.0; };
    const double oracle = quad::to_infinity([&](double x) { return x * dens(x); }, 0.0) / quad::to_infinity(dens, 0.0);
    Rng rng(6);
    std::vector<double> xs(50000);
    for (auto& x : xs) x = rand_gig(0.7, 2.0, 3.0, rng);
    EXPECT_NEAR(testutil::mean(xs), oracle, 3 * mc_se(xs));
}

TEST(GIG, InverseGammaLimit)
{
    Rng rng(7);
    std::vector<double> xs(40000);
    for (auto& x : xs) x = rand_gig(-0.5, 1.0, 1e-10, rng);
    // psi -> 0: inverse gamma with shape 1/2 and scale chi/2
    EXPECT_LT(ks_distance(xs, [](double x) { return boost::math::gamma_q(0.5, 0.5 / x); }), ks_critical(xs.size()));
    std::sort(xs.begin(), xs.end());
    const double median = 0.5 / boost::math::gamma_p_inv(0.5, 0.5);
    EXPECT_NEAR(xs[xs.size() / 2], median, 0.05 * median);
}

TEST(GIG, KsAcrossRegimes)
{
    // (order, chi, psi): moderate, negative order, order zero, tiny and huge omega
    const std::vector<std::array<double, 3>> cases{
        {0.7, 2, 3}, {-1.3, 0.5, 4}, {0.0, 1, 1}, {0.02, 1e-6, 2}, {3.0, 1e4, 1e4}, {-0.4, 50, 0.01}};
    Rng rng(8);
    for (const auto& c : cases) {
        std::vector<double> xs(20000);
        for (auto& x : xs) x = rand_gig(c[0], c[1], c[2], rng);
        const double mode_scale = std::sqrt(c[1] / c[2]);
        auto dens = [&](double x) {
            return x > 0 ? std::exp((c[0] - 1) * std::log(x / mode_scale) - 0.5 * (c[1] / x + c[2] * x)) : 0.0;
        };
        auto cdf = numeric_cdf(dens, 0.0);
        EXPECT_LT(ks_distance(xs, cdf, 300), ks_critical(xs.size())) << c[0] << ' ' << c[1] << ' ' << c[2];
    }
    EXPECT_THROW(rand_gig(-1.0, 0.0, 1.0, rng), domain_error);
    EXPECT_THROW(rand_gig(1.0, 1.0, -1.0, rng), domain_error);
}

TEST(TiltedStable, HalfStableKs)
{
    Rng rng(9);
    std::vector<double> xs(100000);
    for (auto& x : xs) {
        x = rand_tilted_stable(0.5, 0.0, rng);
        ASSERT_GT(x, 0.0);
    }
    // Laplace transform exp(-sqrt(s)): density t^{-3/2} e^{-1/(4t)} / (2 sqrt(pi))
    EXPECT_LT(ks_distance(xs, [](double t) { return std::erfc(0.5 / std::sqrt(t)); }), ks_critical(xs.size()));
}

TEST(TiltedStable, LaplaceTransform)
{
    Rng rng(10);
    for (double alpha : {0.3, 0.5, 0.7, 0.95}) {
        for (double tilt : {0.0, 0.5, 3.0, 40.0}) {
            std::vector<double> ts(40000);
            for (auto& t : ts) t = rand_tilted_stable(alpha, tilt, rng);
            for (double s : {0.5, 1.0, 2.0}) {
                std::vector<double> e(ts.size());
                for (std::size_t i = 0; i < ts.size(); ++i) e[i] = std::exp(-s * ts[i]);
                const double oracle = std::exp(std::pow(tilt, alpha) - std::pow(tilt + s, alpha));
                EXPECT_NEAR(testutil::mean(e), oracle, 3.5 * mc_se(e) + 1e-12)
                    << "alpha " << alpha << " tilt " << tilt << " s " << s;
            }
        }
    }
    EXPECT_THROW(rand_tilted_stable(1.0, 1.0, rng), domain_error);
    EXPECT_THROW(rand_tilted_stable(0.5, -1.0, rng), domain_error);
}

TEST(TruncatedNormal, MatchesInverseCdf)
{
    const boost::math::normal nd;
    // (mean, sd, lower, upper): centred, one tail, far outside, narrow
    const std::vector<std::array<double, 4>> cases{
        {0, 1, -1, 1}, {0, 1, 3, 4}, {5, 1, -0.5, 0.2}, {100, 1, -1, 1}, {0.3, 2, -0.01, 0.02}, {0, 1, -6, -2}};
    Rng rng(11);
    for (const auto& c : cases) {
        const double a = (c[2] - c[0]) / c[1], b = (c[3] - c[0]) / c[1];
        // tail-stable normalisation through the complementary cdf where needed
        auto Phi = [&](double z) { return z > 0 ? 1 - boost::math::cdf(boost::math::complement(nd, z)) : boost::math::cdf(nd, z); };
        auto cdf = [&](double x) {
            const double z = (x - c[0]) / c[1];
            if (a > 0) {
                const double qa = boost::math::cdf(boost::math::complement(nd, a));
                return (qa - boost::math::cdf(boost::math::complement(nd, z))) /
                       (qa - boost::math::cdf(boost::math::complement(nd, b)));
            }
            return (Phi(z) - Phi(a)) / (Phi(b) - Phi(a));
        };
        std::vector<double> xs(20000);
        for (auto& x : xs) {
            x = rand_truncated_normal(c[0], c[1], c[2], c[3], rng);
            ASSERT_GT(x, c[2]);
            ASSERT_LT(x, c[3]);
        }
        if (c[0] == 100) continue; // mass piles at the upper bound, nothing to compare against
        EXPECT_LT(ks_distance(xs, cdf), ks_critical(xs.size())) << c[0] << ' ' << c[2] << ' ' << c[3];
    }
}

TEST(BoxTruncatedNormal, UnconstrainedMean)
{
    Eigen::MatrixXd Q(2, 2);
    Q << 2.0, 0.8, 0.8, 1.0;
    const Eigen::Vector2d m(1.0, -2.0);
    const Eigen::VectorXd h = Q * m;
    const Eigen::VectorXd bound = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Rng rng(12);
    Eigen::VectorXd th = Eigen::Vector2d::Zero(), sum = Eigen::Vector2d::Zero();
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        th = rand_box_truncated_normal(Q, h, bound, th, 1, rng);
        sum += th;
    }
    EXPECT_NEAR(sum[0] / n, 1.0, 0.02);
    EXPECT_NEAR(sum[1] / n, -2.0, 0.02);
}

TEST(BoxTruncatedNormal, OneDimensionalAndFeasible)
{
    Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(1, 1, 4.0);
    const Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 4.0 * 1.2);
    const Eigen::VectorXd bound = Eigen::VectorXd::Constant(1, 1.0);
    Rng rng(13);
    Eigen::VectorXd th = Eigen::VectorXd::Zero(1);
    std::vector<double> xs(20000);
    for (auto& x : xs) {
        th = rand_box_truncated_normal(Q, h, bound, th, 1, rng);
        x = th[0];
        ASSERT_LT(std::fabs(x), 1.0);
    }
    const boost::math::normal nd(1.2, 0.5);
    const double lo = boost::math::cdf(nd, -1.0), hi = boost::math::cdf(nd, 1.0);
    EXPECT_LT(ks_distance(xs, [&](double x) { return (boost::math::cdf(nd, x) - lo) / (hi - lo); }), ks_critical(xs.size()));

    // correlated 3-d box: every sweep stays inside
    Eigen::MatrixXd Q3(3, 3);
    Q3 << 3, 1, 0.5, 1, 2, 0.3, 0.5, 0.3, 1;
    const Eigen::Vector3d h3(10, -10, 5), b3(0.5, 0.1, 2.0);
    Eigen::VectorXd t3 = Eigen::Vector3d::Zero();
    for (int i = 0; i < 2000; ++i) {
        t3 = rand_box_truncated_normal(Q3, h3, b3, t3, 2, rng);
        for (int j = 0; j < 3; ++j) ASSERT_LT(std::fabs(t3[j]), b3[j]);
    }
    const Eigen::VectorXd bad = Eigen::Vector3d(1.0, 1.0, 1.0);
    EXPECT_THROW(rand_box_truncated_normal(Q3, h3, b3, bad, 1, rng), infeasible_error);
}

// ---- hierarchy identities ----

TEST(Identities, UniformMixtureOfGammaIsExponentialPower)
{
    for (double q : {0.7, 1.0, 2.0}) {
        const double ph = phi(q), rate = std::pow(ph, q), shape = 1 + 1 / q;
        for (double gam : {0.5, 2.0}) {
            for (double th : {0.2, 1.0, 3.0}) {
                const double lo = std::pow(th / gam, q);
                auto f = [&](double u) {
                    return std::exp(shape * std::log(rate) + (shape - 1) * std::log(u) - rate * u - std::lgamma(shape)) /
                           (2 * gam * std::pow(u, 1 / q));
                };
                const double mix = quad::to_infinity(f, lo, 1e-13);
                // EP with scale gamma: kappa = 1 / (1 + gamma^q)
                const double ep = ep_pdf(EPParams(q, 1 / (1 + std::pow(gam, q))), th);
                EXPECT_NEAR(mix, ep, 1e-8 * ep) << q << ' ' << gam << ' ' << th;
            }
        }
    }
}

TEST(Identities, MarginalOfGamma)
{
    const double q = 1.5, a = 1.2, b = 0.8, xi = 2.0;
    Rng rng(14);
    std::vector<double> gs(30000);
    for (auto& g : gs) {
        const double lam = rng.gamma(a, xi);
        g = rand_truncated_gg(std::pow(lam, -1 / q), q * b, q, 0.0, rng);
    }
    // gamma^q / xi is beta-prime(b, a)
    auto cdf = [&](double g) {
        const double r = std::pow(g, q) / xi;
        return boost::math::ibeta(b, a, r / (1 + r));
    };
    EXPECT_LT(ks_distance(gs, cdf), ks_critical(gs.size()));
    // and the density formula integrates to that cdf
    auto dens = [&](double g) {
        return std::exp(std::log(q) + a * std::log(xi) + std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        (q * b - 1) * std::log(g) - (a + b) * std::log(xi + std::pow(g, q)));
    };
    EXPECT_NEAR(quad::tanh_sinh(dens, 0.0, 1.7), cdf(1.7), 1e-9);
}

// ---- Gibbs samplers ----

TEST(Gibbs, NormalMeansMatchQuadrature)
{
    McmcConfig c;
    c.n_iter = 22000;
    c.burn_in = 2000;
    c.n_chains = 2;
    c.sigma2_fixed = 1.0;
    c.seed = 101;
    struct Case {
        PriorSpec prior;
        double y;
    };
    const std::vector<Case> cases{{PriorSpec::horseshoe(), 2.0},
                                  {PriorSpec::horseshoe(), 10.0},
                                  {PriorSpec::gambel(GambelParams(1, 2, 2, 1)), 0.0},
                                  {PriorSpec::gambel(GambelParams(1, 2, 2, 1)), 2.0},
                                  {PriorSpec::gambel(GambelParams(1, 2, 2, 1)), 5.0},
                                  {PriorSpec::gambel(GambelParams(1, 2, 2, 1)), 10.0},
                                  {PriorSpec::gambel(GambelParams(0.7, 1, 1.5, 1)), 3.0},
                                  {PriorSpec::laplace(1.0), 3.0}};
    for (const auto& k : cases) {
        const double oracle = shrinkage_profile(k.prior, {k.y})[0];
        for (auto alg : {Algorithm::low_dim, Algorithm::high_dim}) {
            c.algorithm = alg;
            const auto dr = run_gibbs(normal_mean(k.y), k.prior, c);
            EXPECT_EQ(dr.algorithm, to_string(alg));
            const auto [m, se] = mean_and_se(dr, 0);
            EXPECT_NEAR(m, oracle, 3 * se) << k.prior.label << " y=" << k.y << ' ' << dr.algorithm;
        }
    }
}

TEST(Gibbs, StrongSignalRegression)
{
    Rng rng(15);
    RegressionData d;
    d.X = Eigen::MatrixXd::Constant(200, 1, 0.5);
    d.y.resize(200);
    for (int i = 0; i < 200; ++i) d.y[i] = 0.5 * 20.0 + rng.normal();
    McmcConfig c;
    c.n_iter = 12000;
    c.burn_in = 2000;
    c.n_chains = 2;
    c.sigma2_fixed = 1.0;
    const auto prior = PriorSpec::horseshoe();
    const auto dr = gibbs_low_dim(d, prior, c);
    // likelihood in theta is N(theta_ols, 1 / X'X)
    const double xtx = d.X.squaredNorm(), ols = d.X.col(0).dot(d.y) / xtx;
    const GambelKernel k(prior.gambel_params());
    auto w = [&](double t) { return std::exp(-0.5 * xtx * (t - ols) * (t - ols) + k.log_pdf(t)); };
    const double lo = ols - 2, hi = ols + 2;
    const double oracle =
        quad::tanh_sinh([&](double t) { return t * w(t); }, lo, hi) / quad::tanh_sinh(w, lo, hi);
    const auto [m, se] = mean_and_se(dr, 0);
    EXPECT_NEAR(m, oracle, 3 * se);
}

TEST(Gibbs, ShrinksNullSignal)
{
    int shrunk = 0;
    McmcConfig c;
    c.n_iter = 3000;
    c.burn_in = 500;
    c.n_chains = 1;
    for (int r = 0; r < 50; ++r) {
        Rng rng(derive_seed(16, r));
        RegressionData d;
        d.X.resize(30, 1);
        d.y.resize(30);
        for (int i = 0; i < 30; ++i) {
            d.X(i, 0) = rng.normal();
            d.y[i] = rng.normal();
        }
        c.seed = derive_seed(17, r);
        const double ols = d.X.col(0).dot(d.y) / d.X.squaredNorm();
        const double pm = gibbs_low_dim(d, PriorSpec::horseshoe(), c).posterior_mean()[0];
        shrunk += std::fabs(pm) < std::fabs(ols);
    }
    EXPECT_GE(shrunk, 48);
}

TEST(Gibbs, SigmaConditionalIsConjugate)
{
    // X = 0: theta never enters the residual, sigma2 | y ~ IG(a0 + n/2, b0 + y'y/2)
    RegressionData d;
    d.X = Eigen::MatrixXd::Zero(20, 2);
    d.y = Eigen::VectorXd::LinSpaced(20, -1.0, 2.0);
    McmcConfig c;
    c.n_iter = 40000;
    c.burn_in = 10;
    c.n_chains = 1;
    c.sigma2_shape = 3.0;
    c.sigma2_rate = 2.0;
    for (auto alg : {Algorithm::low_dim, Algorithm::high_dim}) {
        c.algorithm = alg;
        const auto dr = run_gibbs(d, PriorSpec::horseshoe(), c);
        const double sh = 3.0 + 10.0, rt = 2.0 + 0.5 * d.y.squaredNorm();
        const auto& s = dr.sigma2[0];
        EXPECT_NEAR(testutil::mean(s), rt / (sh - 1), 4 * mc_se(s));
        EXPECT_NEAR(testutil::variance(s), rt * rt / ((sh - 1) * (sh - 1) * (sh - 2)), 0.05 * rt * rt / ((sh - 1) * (sh - 1) * (sh - 2)));
    }
}

TEST(Gibbs, LowDimStatesAreFeasible)
{
    Rng rng(18);
    RegressionData d;
    d.X.resize(40, 3);
    d.y.resize(40);
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 3; ++j) d.X(i, j) = rng.normal();
        d.y[i] = 3 * d.X(i, 0) + rng.normal();
    }
    McmcConfig c;
    c.n_iter = 3000;
    c.burn_in = 100;
    c.n_chains = 2;
    c.keep_latents = true;
    for (const auto& pr : {PriorSpec::horseshoe(), PriorSpec::gambel(GambelParams(0.5, 3, 0.4, 1))}) {
        const double q = pr.gambel_params().q;
        const auto dr = gibbs_low_dim(d, pr, c);
        ASSERT_EQ(dr.u.size(), 2u);
        for (std::size_t k = 0; k < 2; ++k)
            for (Eigen::Index r = 0; r < dr.theta[k].rows(); ++r)
                for (Eigen::Index j = 0; j < 3; ++j)
                    ASSERT_LT(std::fabs(dr.theta[k](r, j)), dr.gamma[k](r, j) * std::pow(dr.u[k](r, j), 1 / q));
    }
}

TEST(Gibbs, PriorRecovery)
{
    McmcConfig c;
    c.n_iter = 101000;
    c.burn_in = 1000;
    c.thin = 10;
    c.n_chains = 1;
    c.seed = 19;
    const std::vector<std::pair<GambelParams, Algorithm>> cases{
        {GambelParams(1, 2, 2, 3), Algorithm::low_dim},  {GambelParams(1, 2, 2, 3), Algorithm::high_dim},
        {GambelParams(2, 0.8, 1.5, 1), Algorithm::low_dim}, {GambelParams(2, 0.8, 1.5, 1), Algorithm::high_dim},
        {GambelParams(0.7, 1.5, 2, 1), Algorithm::high_dim}};
    for (const auto& [p, alg] : cases) {
        c.algorithm = alg;
        const auto dr = run_gibbs(no_data(1), PriorSpec::gambel(p), c);
        const auto ch = dr.theta_chains(0)[0];
        ASSERT_EQ(ch.size(), 10000u);
        EXPECT_LT(ks_distance(ch, [&](double x) { return unfolded_cdf(p, x); }, 400), ks_critical(ch.size()))
            << p.q << ' ' << to_string(alg);
    }
}

TEST(Gibbs, HighDimWideDesign)
{
    Rng rng(20);
    RegressionData d;
    d.X.resize(4, 5);
    d.y.resize(4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 5; ++j) d.X(i, j) = rng.normal();
        d.y[i] = rng.normal();
    }
    McmcConfig c;
    c.n_iter = 3000;
    c.burn_in = 500;
    c.n_chains = 2;
    const auto dr = run_gibbs(d, PriorSpec::horseshoe(), c);
    EXPECT_EQ(dr.algorithm, "high_dim");
    for (const auto& m : dr.theta) EXPECT_TRUE(m.allFinite());
    EXPECT_THROW(gibbs_low_dim(d, PriorSpec::horseshoe(), c), rank_error);

    // no information: symmetric prior draws
    RegressionData z;
    z.X = Eigen::MatrixXd::Zero(4, 5);
    z.y = Eigen::VectorXd::Zero(4);
    c.n_iter = 20000;
    const auto dz = gibbs_high_dim(z, PriorSpec::gambel(GambelParams(2, 2, 1, 1)), c);
    for (std::size_t j = 0; j < 5; ++j) {
        const auto [m, se] = mean_and_se(dz, j);
        EXPECT_NEAR(m, 0.0, 3.5 * se);
    }
}

TEST(Gibbs, SamplersAgree)
{
    Rng rng(21);
    RegressionData d;
    d.X.resize(100, 3);
    d.y.resize(100);
    const Eigen::Vector3d truth(0.4, 0.0, -0.2);
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 3; ++j) d.X(i, j) = rng.normal();
        d.y[i] = d.X.row(i).dot(truth) + rng.normal();
    }
    McmcConfig c;
    c.n_iter = 22000;
    c.burn_in = 2000;
    c.n_chains = 2;
    const auto pr = PriorSpec::gambel(GambelParams(1, 2, 2, 1));
    c.algorithm = Algorithm::low_dim;
    const auto lo = run_gibbs(d, pr, c);
    c.algorithm = Algorithm::high_dim;
    const auto hi = run_gibbs(d, pr, c);
    for (std::size_t j = 0; j < 3; ++j) {
        const auto [m1, s1] = mean_and_se(lo, j);
        const auto [m2, s2] = mean_and_se(hi, j);
        EXPECT_NEAR(m1, m2, 3 * std::hypot(s1, s2)) << j;
    }
}

TEST(Gibbs, DeterministicAcrossThreads)
{
    Rng rng(22);
    RegressionData d;
    d.X.resize(30, 4);
    d.y.resize(30);
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < 4; ++j) d.X(i, j) = rng.normal();
        d.y[i] = rng.normal();
    }
    McmcConfig c;
    c.n_iter = 600;
    c.burn_in = 100;
    c.n_chains = 3;
    for (const auto& pr : {PriorSpec::horseshoe(), PriorSpec::laplace(1), PriorSpec::spike_slab(10, 2.85, 1)}) {
        c.threads = 1;
        const auto a = run_gibbs(d, pr, c);
        c.threads = 3;
        const auto b = run_gibbs(d, pr, c);
        ASSERT_EQ(a.theta.size(), b.theta.size());
        for (std::size_t k = 0; k < a.theta.size(); ++k) {
            EXPECT_TRUE(a.theta[k] == b.theta[k]) << pr.label;
            EXPECT_EQ(a.sigma2[k], b.sigma2[k]);
        }
        c.seed += 1;
        const auto e = run_gibbs(d, pr, c);
        EXPECT_FALSE(e.theta[0] == a.theta[0]);
        c.seed -= 1;
    }
}

TEST(Gibbs, ConfigAndDispatch)
{
    McmcConfig c;
    c.burn_in = c.n_iter;
    EXPECT_THROW(c.validate(), domain_error);
    c = McmcConfig{};
    c.thin = 0;
    EXPECT_THROW(c.validate(), domain_error);
    c = McmcConfig{};
    c.n_iter = 100;
    c.burn_in = 10;
    c.thin = 7;
    EXPECT_EQ(c.draws_per_chain(), 12u);
    c.n_chains = 1;
    const auto dr = run_gibbs(normal_mean(1.0), PriorSpec::horseshoe(), c);
    EXPECT_EQ(dr.theta[0].rows(), 12);
    EXPECT_EQ(dr.sigma2[0].size(), 12u);

    RegressionData tall;
    tall.X = Eigen::MatrixXd::Identity(3, 2);
    tall.y = Eigen::VectorXd::Ones(3);
    EXPECT_EQ(select_algorithm(tall, PriorSpec::horseshoe(), Algorithm::automatic), Algorithm::low_dim);
    RegressionData square;
    square.X = Eigen::MatrixXd::Identity(3, 3);
    square.y = Eigen::VectorXd::Ones(3);
    EXPECT_EQ(select_algorithm(square, PriorSpec::horseshoe(), Algorithm::automatic), Algorithm::high_dim);
    EXPECT_EQ(select_algorithm(square, PriorSpec::spike_slab(1, 1, 1), Algorithm::automatic), Algorithm::spike_slab);
    EXPECT_THROW(select_algorithm(square, PriorSpec::spike_slab(1, 1, 1), Algorithm::low_dim), domain_error);
    EXPECT_THROW(gibbs_high_dim(square, PriorSpec::gambel(GambelParams(3, 1, 1, 1)), c), domain_error);

    RegressionData collinear;
    collinear.X = Eigen::MatrixXd::Ones(5, 2);
    collinear.y = Eigen::VectorXd::Ones(5);
    EXPECT_THROW(gibbs_low_dim(collinear, PriorSpec::horseshoe(), c), rank_error);

    RegressionData bad;
    bad.X = Eigen::MatrixXd::Ones(5, 2);
    bad.y = Eigen::VectorXd::Ones(4);
    EXPECT_THROW(run_gibbs(bad, PriorSpec::horseshoe(), c), domain_error);
}

// ---- spike and slab ----

TEST(SpikeSlab, SlabOnlyIsRidge)
{
    Rng rng(23);
    RegressionData d;
    d.X.resize(50, 3);
    d.y.resize(50);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 3; ++j) d.X(i, j) = rng.normal();
        d.y[i] = 0.3 * d.X(i, 0) - 0.1 * d.X(i, 2) + rng.normal();
    }
    McmcConfig c;
    c.n_iter = 30000;
    c.burn_in = 1000;
    c.n_chains = 2;
    c.sigma2_fixed = 1.0;
    const double v = 2.0;
    const auto dr = spike_slab_gibbs(d, PriorSpec::spike_slab(v, 1e12, 1e-12), c);
    Eigen::MatrixXd A = d.X.transpose() * d.X;
    A.diagonal().array() += 1.0 / v;
    const Eigen::VectorXd ridge = A.ldlt().solve(d.X.transpose() * d.y);
    for (std::size_t j = 0; j < 3; ++j) {
        const auto [m, se] = mean_and_se(dr, j);
        EXPECT_NEAR(m, ridge[j], 3 * se) << j;
    }
}

TEST(SpikeSlab, NullDataLowersInclusion)
{
    const Eigen::Index p = 40;
    RegressionData d;
    d.X = Eigen::MatrixXd::Identity(p, p);
    d.y = Eigen::VectorXd::Zero(p);
    McmcConfig c;
    c.n_iter = 4000;
    c.burn_in = 500;
    c.n_chains = 1;
    c.sigma2_fixed = 1.0;
    const auto pr = PriorSpec::spike_slab(1000, 2.85, 1);
    const auto dr = spike_slab_gibbs(d, pr, c);
    const double prior_incl = 2.85 / 3.85;
    int lower = 0;
    for (Eigen::Index j = 0; j < p; ++j) lower += dr.inclusion[0].col(j).mean() < prior_incl;
    EXPECT_GE(lower, 0.95 * p);
}

TEST(SpikeSlab, PiConjugacy)
{
    // huge signals force every indicator on: pi | z ~ Beta(alpha + p, beta)
    const Eigen::Index p = 6;
    RegressionData d;
    d.X = Eigen::MatrixXd::Identity(p, p);
    d.y = Eigen::VectorXd::Constant(p, 200.0);
    McmcConfig c;
    c.n_iter = 40000;
    c.burn_in = 100;
    c.n_chains = 1;
    c.sigma2_fixed = 1.0;
    const auto dr = spike_slab_gibbs(d, PriorSpec::spike_slab(1000, 2.85, 1), c);
    EXPECT_EQ(dr.inclusion[0].minCoeff(), 1.0);
    const double a = 2.85 + p, b = 1.0;
    const auto& pis = dr.pi[0];
    EXPECT_NEAR(testutil::mean(pis), a / (a + b), 4 * mc_se(pis));
    EXPECT_NEAR(testutil::variance(pis), a * b / ((a + b) * (a + b) * (a + b + 1)), 0.05 * a * b / ((a + b) * (a + b) * (a + b + 1)));
}

// ---- diagnostics ----

TEST(Diagnostics, IidChains)
{
    Rng rng(24);
    std::vector<std::vector<double>> ch(4, std::vector<double>(5000));
    for (auto& c : ch)
        for (auto& x : c) x = rng.normal();
    const auto d = chain_diagnostics(ch);
    EXPECT_NEAR(d.ess, 20000.0, 2000.0);
    EXPECT_LT(d.rhat, 1.01);
}

TEST(Diagnostics, DuplicatedAndConstantChains)
{
    Rng rng(25);
    std::vector<double> c(1000);
    for (auto& x : c) x = rng.normal();
    EXPECT_NEAR(split_rhat({c, c}), 1.0, 2e-3);
    // identical chains: between-chain variance vanishes except for the split halves
    const std::vector<std::vector<double>> consts{std::vector<double>(100, 1.0), std::vector<double>(100, 2.0)};
    EXPECT_TRUE(std::isinf(split_rhat(consts)));
    EXPECT_THROW(chain_diagnostics(std::vector<std::vector<double>>{{1.0, 2.0, 3.0}}), insufficient_draws_error);
    EXPECT_THROW(split_rhat({{1, 2, 3, 4, 5}, {1, 2, 3, 4}}), insufficient_draws_error);
}

TEST(Diagnostics, AutocorrelatedChainHasSmallerEss)
{
    Rng rng(26);
    std::vector<std::vector<double>> ch(2, std::vector<double>(20000));
    for (auto& c : ch) {
        double x = 0;
        for (auto& v : c) v = x = 0.9 * x + rng.normal();
    }
    // AR(1) with rho = 0.9: ESS / N = (1 - rho) / (1 + rho)
    EXPECT_NEAR(effective_sample_size(ch) / 40000.0, 0.1 / 1.9, 0.01);
}
