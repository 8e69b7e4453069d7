#include "maxsharpe/error.hpp"
#include "maxsharpe/montecarlo.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace maxsharpe;

namespace {

// sup |F_m(x) - x| evaluated at every sample point from both sides.
double ks_oracle(const std::vector<double>& p) {
    const double m = double(p.size());
    double d = 0.0;
    for (double x : p) {
        double le = 0, lt = 0;
        for (double y : p) {
            le += y <= x;
            lt += y < x;
        }
        d = std::max({d, std::abs(le / m - x), std::abs(lt / m - x)});
    }
    return d;
}

double binomial_cdf(int k, int n, double q) {
    double total = 0.0;
    for (int i = 0; i <= k; ++i)
        total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * std::log(q) +
                          (n - i) * std::log1p(-q));
    return total;
}

SimConfig small_config() {
    SimConfig c;
    c.k = 10;
    c.n = 120;
    c.rho = 0.5;
    c.replications = 120;
    c.methods = all_methods();
    c.retain_p_values = true;
    return c;
}

}  // namespace

TEST(Ks, MatchesDoubleLoop) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u;
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> p(1 + rep * 7);
        for (double& x : p) x = std::pow(u(rng), 1.0 + 0.05 * rep);
        EXPECT_NEAR(ks_statistic(p), ks_oracle(p), 1e-15);
    }
    EXPECT_NEAR(ks_statistic(std::vector<double>{0.5}), 0.5, 1e-15);
    EXPECT_THROW(ks_statistic(std::vector<double>{}), UsageError);
    EXPECT_THROW(ks_statistic(std::vector<double>{1.2}), UsageError);
}

TEST(Delta, BandIsBinomialQuantile) {
    std::vector<double> p(2000);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (double(i) + 0.5) / 2000.0;
    const DeltaPoint d = delta_at(p, 0.05);
    EXPECT_NEAR(d.delta, 0.0, 1e-15);
    EXPECT_TRUE(d.inside_band());
    // quantiles round outwards, so the band never undercovers
    const int hi = int(std::lround((d.band_hi + 0.05) * 2000));
    EXPECT_GE(binomial_cdf(hi, 2000, 0.05), 0.975);
    EXPECT_LT(binomial_cdf(hi - 1, 2000, 0.05), 0.975);
    const int lo = int(std::lround((d.band_lo + 0.05) * 2000));
    EXPECT_LE(binomial_cdf(lo, 2000, 0.05), 0.025);
    EXPECT_GT(binomial_cdf(lo + 1, 2000, 0.05), 0.025);
    std::vector<double> bad(2000, 0.01);
    EXPECT_FALSE(delta_at(bad, 0.05).inside_band());
}

TEST(Snr, Configurations) {
    EXPECT_EQ(SnrConfig::uniform_range(-0.1, 0.1).vector(3), Eigen::Vector3d(-0.1, 0.0, 0.1));
    EXPECT_EQ(SnrConfig::one_good(0.15).vector(3), Eigen::Vector3d(0.15, -0.15, -0.15));
    EXPECT_EQ(SnrConfig::half_good(0.15).vector(4), Eigen::Vector4d(0.15, 0.15, -0.15, -0.15));
    EXPECT_EQ(SnrConfig::all_equal(0.1).vector(2), Eigen::Vector2d(0.1, 0.1));
    EXPECT_TRUE(SnrConfig::zero().vector(5).isZero(0.0));
}

TEST(Sampler, ReproducesPopulationMoments) {
    for (double rho : {0.6, -0.2}) {
        SimConfig c;
        c.k = 4;
        c.n = 250000;
        c.rho = rho;
        c.snr = SnrConfig::uniform_range(-0.2, 0.3);
        const ReturnsPanel p = sample_returns(c, 3);
        const Eigen::MatrixXd& x = p.values();
        const Eigen::VectorXd zeta = c.snr.vector(4);
        const double se = 1.0 / std::sqrt(double(c.n));
        for (Index j = 0; j < 4; ++j) {
            EXPECT_NEAR(x.col(j).mean(), zeta[j], 3.0 * se);
            const double var = (x.col(j).array() - x.col(j).mean()).square().mean();
            EXPECT_NEAR(var, 1.0, 3.0 * std::sqrt(2.0) * se);
            for (Index l = 0; l < j; ++l) {
                const double cov = ((x.col(j).array() - x.col(j).mean()) * (x.col(l).array() - x.col(l).mean())).mean();
                EXPECT_NEAR(cov, rho, 3.0 * std::sqrt(1.0 + rho * rho) * se);
            }
        }
    }
}

TEST(Sampler, StudentTHasUnitVarianceAndHeavyTails) {
    SimConfig c;
    c.k = 3;
    c.n = 300000;
    c.rho = 0.4;
    c.law = ReturnsLaw::student_t(12.0);
    const Eigen::MatrixXd x = sample_returns(c, 1).values();
    for (Index j = 0; j < 3; ++j) {
        const Eigen::ArrayXd e = x.col(j).array() - x.col(j).mean();
        const double var = e.square().mean();
        EXPECT_NEAR(var, 1.0, 0.02);
        // 3 + 6/(df - 4); df > 8 keeps the sample kurtosis from being all noise
        EXPECT_NEAR(e.pow(4).mean() / (var * var), 3.75, 0.25);
    }
}

TEST(Sampler, StreamsAreKeyedByReplication) {
    SimConfig c = small_config();
    EXPECT_EQ(sample_returns(c, 7).values(), sample_returns(c, 7).values());
    EXPECT_NE(sample_returns(c, 7).values(), sample_returns(c, 8).values());
    c.seed += 1;
    EXPECT_NE(sample_returns(c, 7).values(), sample_returns(small_config(), 7).values());
}

TEST(Engine, BitIdenticalAcrossThreadCounts) {
    SimConfig c = small_config();
    c.covariance_mode = CovarianceMode::feasible_gaussian;
    c.threads = 1;
    const SimSummary one = run_null_calibration(c);
    for (unsigned t : {4u, 8u}) {
        c.threads = t;
        const SimSummary many = run_null_calibration(c);
        ASSERT_EQ(one.methods.size(), many.methods.size());
        for (std::size_t m = 0; m < one.methods.size(); ++m) {
            EXPECT_EQ(one.methods[m].p_values, many.methods[m].p_values);
            EXPECT_EQ(one.methods[m].ks_statistic, many.methods[m].ks_statistic);
            EXPECT_EQ(one.methods[m].rejections, many.methods[m].rejections);
        }
        EXPECT_EQ(one.bad_selection_count, many.bad_selection_count);
    }
}

TEST(Engine, SummaryBookkeeping) {
    SimConfig c = small_config();
    c.snr = SnrConfig::one_good(0.1);
    c.null_value = 0.0;
    const SimSummary s = run_power_study(c);
    EXPECT_EQ(s.replications, c.replications);
    EXPECT_EQ(s.replication_failures, 0);
    for (const MethodSummary& m : s.methods) {
        EXPECT_EQ(m.evaluated + m.failures, c.replications);
        EXPECT_EQ(Index(m.p_values.size()), m.evaluated);
        EXPECT_EQ(m.delta_curve.size(), c.tracked_q.size());
        Index binned = 0;
        for (const PowerBin& b : m.power_by_selected_snr) binned += b.count;
        EXPECT_EQ(binned, m.evaluated);
        EXPECT_EQ(Index(m.power_by_selected_snr.size()), c.snr_bins);
        Index rej = 0;
        for (double p : m.p_values) rej += p <= c.alpha;
        EXPECT_EQ(rej, m.rejections);
    }
    // one_good: the selected SNR is either +0.1 (last bin) or -0.1 (first bin)
    const auto& bins = s.at(Method::conditional).power_by_selected_snr;
    EXPECT_EQ(bins.front().count + bins.back().count, s.at(Method::conditional).evaluated);
    EXPECT_EQ(bins.front().count, s.bad_selection_count);
}

TEST(Engine, NullCalibrationRoughlyUniform) {
    SimConfig c;
    c.k = 20;
    c.n = 250;
    c.rho = 0.3;
    c.snr = SnrConfig::uniform_range(0.0, 0.1);
    c.replications = 400;
    c.covariance_mode = CovarianceMode::infeasible;
    const SimSummary s = run_null_calibration(c);
    const MethodSummary& m = s.at(Method::conditional);
    EXPECT_LT(m.ks_statistic, 1.63 / std::sqrt(400.0));
    EXPECT_GT(s.bad_selection_count, -1);
}

TEST(Engine, ConfigValidation) {
    SimConfig c = small_config();
    c.k = 1;
    EXPECT_THROW(run_null_calibration(c), UsageError);
    c = small_config();
    c.law = ReturnsLaw::student_t(4.0);
    EXPECT_THROW(run_null_calibration(c), UsageError);
    c = small_config();
    c.rho = -0.5;
    EXPECT_THROW(run_null_calibration(c), UsageError);
    c = small_config();
    EXPECT_THROW(run_power_study(c), UsageError);  // zero SNR is not a power configuration
    EXPECT_EQ(parse_method("chibar"), Method::chibar);
    EXPECT_THROW(parse_method("nope"), UsageError);
}

TEST(Engine, RhoSweepRows) {
    SimConfig c = small_config();
    c.replications = 40;
    c.methods = {Method::bonferroni, Method::conditional};
    const auto rows = run_rho_sweep(c, {0.0, 0.5});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].rho, 0.0);
    EXPECT_EQ(rows[3].method, Method::conditional);
    EXPECT_EQ(rows[3].evaluated, 40);
}
