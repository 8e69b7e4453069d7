#include "maxsharpe/classical.hpp"
#include "maxsharpe/error.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace maxsharpe;
namespace bm = boost::math;

namespace {

// Published monthly Sharpe ratios of the five industry portfolios.
const Eigen::VectorXd& table_sharpes() {
    static const Eigen::VectorXd z = (Eigen::VectorXd(5) << 0.193, 0.187, 0.172, 0.170, 0.140).finished();
    return z;
}
constexpr Index kTableN = 1104;

// c such that P(T > t_obs) = level for T ~ t(n - 1, sqrt(n) c).
double nct_bound_oracle(double sharpe, Index n, double level) {
    const double root_n = std::sqrt(double(n));
    const double t = root_n * sharpe;
    auto f = [&](double c) {
        return bm::cdf(bm::complement(bm::non_central_t_distribution<double>(double(n - 1), root_n * c), t)) - level;
    };
    bm::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto r = bm::tools::toms748_solve(f, sharpe - 0.5, sharpe + 0.5, tol, iters);
    return 0.5 * (r.first + r.second);
}

// Chi-bar-square test built from an eigendecomposition and Boost chi-square laws.
double chibar_pvalue_oracle(const Eigen::VectorXd& z, Index n, double rho, double zeta0) {
    const Index k = z.size();
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(k, k, rho);
    r.diagonal().setOnes();
    const Eigen::VectorXd xi = std::sqrt(double(n)) * (oracle::inverse_sqrt(r) * (z.array() - zeta0).matrix());
    const double stat = xi.cwiseMax(0.0).squaredNorm();
    double p = 0.0;
    for (Index i = 1; i <= k; ++i)
        p += bm::binomial_coefficient<double>(unsigned(k), unsigned(i)) * std::pow(0.5, double(k)) *
             bm::cdf(bm::complement(bm::chi_squared_distribution<double>(double(i)), stat));
    return stat > 0 ? p : 1.0;
}

Eigen::MatrixXd rank_one(double rho, Index k) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(k, k, rho);
    r.diagonal().setOnes();
    return r;
}

}  // namespace

TEST(ChiBarWeights, SumToOneAndBinomial) {
    for (Index k : {0, 1, 2, 5, 17, 100, 500, 1000}) {
        const ChiBarWeights w = chi_bar_weights(k);
        double total = 0.0;
        for (double x : w.weights) total += x;
        EXPECT_NEAR(total, 1.0, 1e-12) << k;
    }
    const ChiBarWeights w5 = chi_bar_weights(5);
    for (unsigned i = 0; i <= 5; ++i) EXPECT_NEAR(w5.weights[i], bm::binomial_coefficient<double>(5, i) / 32.0, 1e-15);
}

TEST(ChiBarWeights, CdfAndSurvivalAgree) {
    const ChiBarWeights w = chi_bar_weights(7);
    for (double x : {0.0, 0.3, 2.0, 9.0, 40.0}) EXPECT_NEAR(chi_bar_cdf(x, w) + chi_bar_sf(x, w), 1.0, 1e-14);
    EXPECT_NEAR(chi_bar_cdf(0.0, w), 1.0 / 128.0, 1e-15);
    // k = 1: half a point mass at zero and half a chi-square(1).
    const ChiBarWeights w1 = chi_bar_weights(1);
    EXPECT_NEAR(chi_bar_sf(2.7, w1), 0.5 * bm::cdf(bm::complement(bm::chi_squared_distribution<double>(1), 2.7)), 1e-15);
}

TEST(RhoEstimate, MedianAndMeanSelected) {
    Eigen::Matrix4d c;
    c << 1, .2, .5, .7,  //
        .2, 1, .3, .9,   //
        .5, .3, 1, .4,   //
        .7, .9, .4, 1;
    EXPECT_NEAR(estimate_rho(c, 0, RhoSource::median_pairwise).rho, 0.45, 1e-15);
    EXPECT_NEAR(estimate_rho(c, 3, RhoSource::mean_selected_vs_rest).rho, (0.7 + 0.9 + 0.4) / 3.0, 1e-15);
    const RhoEstimate clamped = clamp_rho(1.0, 4, RhoSource::median_pairwise);
    EXPECT_TRUE(clamped.clamped);
    EXPECT_LT(clamped.rho, 1.0);
    EXPECT_FALSE(clamp_rho(0.5, 4, RhoSource::supplied).clamped);
}

TEST(XiTransform, MatchesEigenInverseSqrt) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (Index k : {2, 3, 10, 40})
        for (double rho : {-0.3 / double(k), 0.0, 0.5, 0.95}) {
            Eigen::VectorXd z(k);
            for (Index i = 0; i < k; ++i) z[i] = g(rng);
            const Eigen::VectorXd ref = oracle::inverse_sqrt(rank_one(rho, k)) * z;
            EXPECT_LT((xi_transform(z, rho) - ref).cwiseAbs().maxCoeff(), 1e-10);
        }
}

// Whitening by the rank-one inverse square root keeps the ordering (argsort) of every vector.
TEST(XiTransform, PreservesArgsort) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 0.99);
    for (int rep = 0; rep < 10000; ++rep) {
        const Index k = 2 + rep % 12;
        Eigen::VectorXd z(k);
        for (Index i = 0; i < k; ++i) z[i] = g(rng);
        const Eigen::VectorXd xi = xi_transform(z, u(rng));
        for (Index i = 1; i < k; ++i) ASSERT_EQ(z[i] > z[0], xi[i] > xi[0]);
        ASSERT_EQ(std::max_element(z.data(), z.data() + k) - z.data(), std::max_element(xi.data(), xi.data() + k) - xi.data());
    }
}

TEST(Bonferroni, NaiveAgreesWithBoostOracle) {
    const double naive = invert_to_lower_bound(
        [](double c) { return bonferroni_naive(table_sharpes()[0], kTableN, 1, c, 0.05); }, 0.193, 0.03);
    const double bonf = invert_to_lower_bound(
        [](double c) { return bonferroni_naive(table_sharpes()[0], kTableN, 5, c, 0.05); }, 0.193, 0.03);
    EXPECT_NEAR(naive, nct_bound_oracle(0.193, kTableN, 0.05), 1e-6);
    EXPECT_NEAR(bonf, nct_bound_oracle(0.193, kTableN, 0.01), 1e-6);
    // Published values for the Healthcare portfolio, reproducible from the summary statistics.
    EXPECT_NEAR(naive, 0.143, 0.002);
    EXPECT_NEAR(bonf, 0.122, 0.002);
    const TestOutcome o = bonferroni_naive(0.1, 500, 20, 0.0, 0.05);
    EXPECT_NEAR(o.p_value,
                std::min(1.0, 20.0 * bm::cdf(bm::complement(bm::non_central_t_distribution<double>(499.0, 0.0),
                                                             std::sqrt(500.0) * 0.1))),
                1e-12);
}

TEST(Bonferroni, FixedRhoClosedFormBound) {
    const Eigen::VectorXd& z = table_sharpes();
    const double rho = 0.801;
    const double alpha = 0.05;
    const double q = bm::quantile(bm::normal_distribution<double>(), 1.0 - alpha / 5.0);
    const double a = 1.0 / std::sqrt(1.0 - rho);
    const double c = 1.0 / std::sqrt(1.0 - rho + 5.0 * rho);
    // z1 is linear in c0: solve z1(c0) = q.
    const double closed = (a * z.maxCoeff() + (c - a) * z.mean() - q / std::sqrt(double(kTableN))) / c;
    const double bound = invert_to_lower_bound(bonferroni_rho_fixed, z, kTableN, rho, alpha);
    EXPECT_NEAR(bound, closed, 1e-6);
    EXPECT_NEAR(bound, 0.125, 0.002);
    // rho = 0 is the plain normal Bonferroni bound.
    const double r0 = invert_to_lower_bound(bonferroni_rho_fixed, z, kTableN, 0.0, alpha);
    EXPECT_NEAR(r0, z.maxCoeff() - q / std::sqrt(double(kTableN)), 1e-6);
}

TEST(Bonferroni, SlepianUsesSmallestCorrelation) {
    Eigen::Matrix3d c;
    c << 1, .6, .4, .6, 1, .8, .4, .8, 1;
    const Eigen::Vector3d z(0.2, 0.15, 0.1);
    const TestOutcome s = bonferroni_slepian(z, 300, c, 0.05, 0.05);
    const TestOutcome f = bonferroni_rho_fixed(z, 300, 0.4, 0.05, 0.05);
    EXPECT_EQ(s.p_value, f.p_value);
    EXPECT_EQ(s.method, "bonferroni_slepian");
    c(0, 2) = c(2, 0) = -0.1;
    EXPECT_THROW(bonferroni_slepian(z, 300, c, 0.05, 0.05), DataError);
}

TEST(ChiBar, MatchesBruteForceOracle) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.05, 0.05);
    for (int rep = 0; rep < 40; ++rep) {
        const Index k = 1 + rep % 9;
        Eigen::VectorXd z(k);
        for (Index i = 0; i < k; ++i) z[i] = g(rng);
        const double rho = 0.1 * (rep % 9);
        const TestOutcome o = chi_bar_square_test(z, 250, rho, 0.02, 0.05);
        EXPECT_NEAR(o.p_value, chibar_pvalue_oracle(z, 250, rho, 0.02), 1e-10);
    }
}

TEST(ChiBar, TableBoundMatchesOracleInversion) {
    const Eigen::VectorXd& z = table_sharpes();
    const double bound = invert_to_lower_bound(chi_bar_square_test, z, kTableN, 0.801, 0.05);
    // Bisection on the oracle p-value.
    double lo = 0.0, hi = 0.193;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (chibar_pvalue_oracle(z, kTableN, 0.801, mid) <= 0.05 ? lo : hi) = mid;
    }
    EXPECT_NEAR(bound, 0.5 * (lo + hi), 1e-6);
}

TEST(Follman, OneSidedAndChiSquare) {
    const Eigen::Vector3d z(0.1, 0.05, 0.08);
    const TestOutcome below = follman_test(z, 200, 0.3, 0.2, 0.05);
    EXPECT_EQ(below.p_value, 1.0);
    const TestOutcome above = follman_test(z, 200, 0.3, 0.0, 0.05);
    const Eigen::VectorXd w = std::sqrt(200.0) * (oracle::inverse_sqrt(rank_one(0.3, 3)) * z);
    EXPECT_NEAR(above.statistic, w.squaredNorm(), 1e-10);
    EXPECT_NEAR(above.p_value, 0.5 * bm::cdf(bm::complement(bm::chi_squared_distribution<double>(3), w.squaredNorm())),
                1e-12);
}

TEST(Hansen, EffectiveCountAndFallbacks) {
    const Eigen::Vector4d z(0.3, 0.2, -0.5, -0.6);
    const Index n = 1000;
    const double rho = 0.2;
    const Eigen::VectorXd xi = xi_transform(z, rho);
    const double c = 1.0 / std::sqrt(1.0 + 3.0 * rho);
    const double cut = c * 0.1 - std::sqrt(2.0 * std::log(std::log(1000.0)) / 1000.0);
    Index expected = 0;
    for (Index i = 0; i < 4; ++i) expected += xi[i] > cut;
    EXPECT_EQ(hansen_effective_count(z, n, rho, 0.1), expected);
    EXPECT_LT(expected, 4);
    const TestOutcome chi = hansen_chi_bar_square(z, n, rho, 0.1, 0.05);
    EXPECT_NEAR(chi.p_value, chi_bar_square_with_dof(z, n, rho, 0.1, 0.05, expected).p_value, 1e-15);
    // Nothing above the cutoff: no evidence at all.
    EXPECT_EQ(hansen_effective_count(z, n, rho, 5.0), 0);
    EXPECT_EQ(hansen_spa(z, n, rho, 5.0, 0.05).p_value, 1.0);
    EXPECT_EQ(hansen_chi_bar_square(z, n, rho, 5.0, 0.05).p_value, 1.0);
    EXPECT_THROW(hansen_effective_count(z, 2, rho, 0.0), UsageError);
}

TEST(Inversion, RoundTrip) {
    const Eigen::VectorXd& z = table_sharpes();
    for (RhoFamilyTest test : {&bonferroni_rho_fixed, &chi_bar_square_test, &hansen_spa}) {
        for (double alpha : {0.01, 0.05, 0.2}) {
            const double bound = invert_to_lower_bound(test, z, kTableN, 0.801, alpha);
            // just below the bound the test rejects, just above it does not
            EXPECT_TRUE(test(z, kTableN, 0.801, bound - 1e-4, alpha).reject);
            EXPECT_FALSE(test(z, kTableN, 0.801, bound + 1e-4, alpha).reject);
            EXPECT_NEAR(test(z, kTableN, 0.801, bound, alpha).p_value, alpha, 1e-4);
        }
    }
}
