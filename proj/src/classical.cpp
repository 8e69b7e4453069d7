#include "maxsharpe/classical.hpp"

#include "maxsharpe/distributions.hpp"
#include "maxsharpe/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace maxsharpe {

namespace {

constexpr double kRhoEps = 1e-6;

void check_test_inputs(const Eigen::VectorXd& sharpe, Index n, double alpha) {
    if (sharpe.size() < 1) throw UsageError("Sharpe vector is empty");
    if (!sharpe.allFinite()) throw DataError("Sharpe vector contains non-finite entries");
    if (n < 2) throw UsageError("sample size must be at least 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
}

double common_factor(double rho, Index k) {
    return 1.0 / std::sqrt(1.0 + static_cast<double>(k - 1) * rho);
}

double chisq_sf(double x, Index df) {
    if (x <= 0.0) return df == 0 ? 0.0 : 1.0;
    if (df == 0) return 0.0;
    return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

double chi_bar_statistic(const Eigen::VectorXd& xi, double shift, Index n) {
    return static_cast<double>(n) * (xi.array() - shift).cwiseMax(0.0).square().sum();
}

TestOutcome make_outcome(const char* method, double statistic, double p_value, double alpha) {
    TestOutcome out;
    out.method = method;
    out.statistic = statistic;
    out.p_value = std::clamp(p_value, 0.0, 1.0);
    out.alpha = alpha;
    out.reject = out.p_value <= alpha;
    return out;
}

}  // namespace

RhoEstimate clamp_rho(double rho, Index k, RhoSource source) {
    RhoEstimate est{rho, source, false};
    const double lower = k > 1 ? -1.0 / static_cast<double>(k - 1) + kRhoEps : -1.0 + kRhoEps;
    const double upper = 1.0 - kRhoEps;
    if (rho < lower || rho > upper) {
        est.rho = std::clamp(rho, lower, upper);
        est.clamped = true;
    }
    return est;
}

RhoEstimate estimate_rho(const Eigen::MatrixXd& corr, Index selected, RhoSource source) {
    const Index k = corr.rows();
    if (k < 2 || corr.cols() != k) throw UsageError("rho estimation needs a square correlation matrix with k >= 2");
    if (selected < 0 || selected >= k) throw UsageError("selected index out of range");
    double rho = 0.0;
    switch (source) {
        case RhoSource::mean_selected_vs_rest: {
            double sum = 0.0;
            for (Index j = 0; j < k; ++j)
                if (j != selected) sum += corr(selected, j);
            rho = sum / static_cast<double>(k - 1);
            break;
        }
        case RhoSource::median_pairwise: {
            std::vector<double> pairs;
            pairs.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
            for (Index j = 1; j < k; ++j)
                for (Index i = 0; i < j; ++i) pairs.push_back(corr(i, j));
            std::sort(pairs.begin(), pairs.end());
            const std::size_t mid = pairs.size() / 2;
            rho = pairs.size() % 2 == 1 ? pairs[mid] : 0.5 * (pairs[mid - 1] + pairs[mid]);
            break;
        }
        case RhoSource::supplied:
            throw UsageError("RhoSource::supplied is not an estimator");
    }
    return clamp_rho(rho, k, source);
}

RhoEstimate estimate_rho(const MomentEstimates& moments, Index selected, RhoSource source) {
    return estimate_rho(moments.corr, selected, source);
}

ChiBarWeights chi_bar_weights(Index k) {
    if (k < 0) throw UsageError("chi-bar-square weights need k >= 0");
    ChiBarWeights w;
    w.k = k;
    w.weights.resize(static_cast<std::size_t>(k + 1));
    const double kd = static_cast<double>(k);
    const double log_norm = std::lgamma(kd + 1.0) - kd * std::log(2.0);
    for (Index i = 0; i <= k; ++i) {
        const double id = static_cast<double>(i);
        w.weights[static_cast<std::size_t>(i)] = std::exp(log_norm - std::lgamma(id + 1.0) - std::lgamma(kd - id + 1.0));
    }
    return w;
}

double chi_bar_cdf(double x, const ChiBarWeights& weights) {
    if (x < 0.0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < weights.weights.size(); ++i)
        total += weights.weights[i] * dist::chisq_cdf(x, static_cast<int>(i));
    return std::clamp(total, 0.0, 1.0);
}

double chi_bar_sf(double x, const ChiBarWeights& weights) {
    if (x < 0.0) return 1.0;
    double total = 0.0;
    for (std::size_t i = 1; i < weights.weights.size(); ++i)
        total += weights.weights[i] * chisq_sf(x, static_cast<Index>(i));
    return std::clamp(total, 0.0, 1.0);
}

TestOutcome bonferroni_naive(double max_sharpe, Index n, Index k, double c0, double alpha) {
    if (n < 2) throw UsageError("sample size must be at least 2");
    if (k < 1) throw UsageError("asset count must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    if (!std::isfinite(max_sharpe)) throw DataError("maximum Sharpe is not finite");
    const double root_n = std::sqrt(static_cast<double>(n));
    const double t = root_n * max_sharpe;
    const double tail = dist::nct_sf(t, static_cast<double>(n - 1), root_n * c0);
    return make_outcome("bonferroni", t, std::min(1.0, static_cast<double>(k) * tail), alpha);
}

TestOutcome bonferroni_rho_fixed(const Eigen::VectorXd& sharpe, Index n, double rho, double c0, double alpha) {
    check_test_inputs(sharpe, n, alpha);
    const Index k = sharpe.size();
    if (rho >= 1.0) throw DataError("rho must be below 1");
    check_rho_range(rho, k);
    const double root_n = std::sqrt(static_cast<double>(n));
    const double inv_sd = 1.0 / std::sqrt(1.0 - rho);
    const double common = 1.0 / std::sqrt(1.0 - rho + static_cast<double>(k) * rho);
    const double z1 = root_n * (inv_sd * (sharpe.maxCoeff() - c0) + (common - inv_sd) * (sharpe.mean() - c0));
    return make_outcome("bonferroni_fixed", z1, std::min(1.0, static_cast<double>(k) * dist::normal_sf(z1)), alpha);
}

TestOutcome bonferroni_slepian(const Eigen::VectorXd& sharpe, Index n, const Eigen::MatrixXd& corr, double c0,
                               double alpha) {
    const Index k = sharpe.size();
    if (corr.rows() != k || corr.cols() != k) throw UsageError("correlation matrix does not match Sharpe vector");
    double rho = k > 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < k; ++i) {
            if (i == j) continue;
            if (corr(i, j) < 0.0) {
                std::ostringstream msg;
                msg << "worst-case rank-one bound needs nonnegative correlations; corr(" << i << ", " << j
                    << ") = " << corr(i, j);
                throw DataError(msg.str());
            }
            rho = std::min(rho, corr(i, j));
        }
    }
    TestOutcome out = bonferroni_rho_fixed(sharpe, n, rho, c0, alpha);
    out.method = "bonferroni_slepian";
    return out;
}

Eigen::VectorXd xi_transform(const Eigen::VectorXd& sharpe, double rho) {
    const Index k = sharpe.size();
    if (rho >= 1.0) throw DataError("rho must be below 1");
    check_rho_range(rho, k);
    const double mean = sharpe.mean();
    const double inv_sd = 1.0 / std::sqrt(1.0 - rho);
    return (common_factor(rho, k) * mean + inv_sd * (sharpe.array() - mean)).matrix();
}

TestOutcome chi_bar_square_with_dof(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha,
                                    Index dof) {
    check_test_inputs(sharpe, n, alpha);
    const Eigen::VectorXd xi = xi_transform(sharpe, rho);
    const double x2 = chi_bar_statistic(xi, common_factor(rho, sharpe.size()) * zeta0, n);
    // P(X >= 0) = 1: the point mass at zero counts toward the p-value.
    const double p = x2 > 0.0 ? chi_bar_sf(x2, chi_bar_weights(dof)) : 1.0;
    return make_outcome("chibar", x2, p, alpha);
}

TestOutcome chi_bar_square_test(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha) {
    return chi_bar_square_with_dof(sharpe, n, rho, zeta0, alpha, sharpe.size());
}

TestOutcome follman_test(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha) {
    check_test_inputs(sharpe, n, alpha);
    const Index k = sharpe.size();
    if (rho >= 1.0) throw DataError("rho must be below 1");
    check_rho_range(rho, k);
    const double nd = static_cast<double>(n);
    const double c = common_factor(rho, k);
    const double mean = sharpe.mean();
    const double g2 = nd * static_cast<double>(k) * c * c * (mean - zeta0) * (mean - zeta0) +
                      nd / (1.0 - rho) * (sharpe.array() - mean).square().sum();
    const double p = mean > zeta0 ? 0.5 * chisq_sf(g2, k) : 1.0;
    return make_outcome("follman", g2, p, alpha);
}

Index hansen_effective_count(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0) {
    if (n < 3) throw UsageError("the log-log adjustment needs n >= 3");
    const double nd = static_cast<double>(n);
    const double cutoff = common_factor(rho, sharpe.size()) * zeta0 - std::sqrt(2.0 * std::log(std::log(nd)) / nd);
    const Eigen::VectorXd xi = xi_transform(sharpe, rho);
    return static_cast<Index>((xi.array() > cutoff).count());
}

TestOutcome hansen_chi_bar_square(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha) {
    check_test_inputs(sharpe, n, alpha);
    const Index k_eff = hansen_effective_count(sharpe, n, rho, zeta0);
    TestOutcome out = chi_bar_square_with_dof(sharpe, n, rho, zeta0, alpha, k_eff);
    out.method = "hansen_chibar";
    if (k_eff == 0) {
        out.p_value = 1.0;
        out.reject = false;
    }
    return out;
}

TestOutcome hansen_spa(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha) {
    check_test_inputs(sharpe, n, alpha);
    const Index k_eff = hansen_effective_count(sharpe, n, rho, zeta0);
    const Eigen::VectorXd xi = xi_transform(sharpe, rho);
    const double stat =
        std::sqrt(static_cast<double>(n)) * (xi.maxCoeff() - common_factor(rho, sharpe.size()) * zeta0);
    if (k_eff == 0) return make_outcome("hansen_spa", stat, 1.0, alpha);
    return make_outcome("hansen_spa", stat, std::min(1.0, static_cast<double>(k_eff) * dist::normal_sf(stat)),
                        alpha);
}

double invert_to_lower_bound(const NullTest& test, double center, double scale) {
    if (!(scale > 0.0) || !std::isfinite(center)) throw UsageError("inversion needs a finite center and positive scale");
    double lo = center - 10.0 * scale;
    double hi = center + 10.0 * scale;
    double step = hi - lo;
    for (int i = 0; !test(lo).reject; ++i) {
        if (i >= 60) throw NumericalError("test inversion: no rejecting null value found below the estimate");
        if (test(hi).reject) throw NumericalError("test inversion: non-monotone rejection region");
        lo -= step;
        step *= 2.0;
    }
    step = hi - lo;
    for (int i = 0; test(hi).reject; ++i) {
        if (i >= 60) throw NumericalError("test inversion: test rejects for every null value tried");
        hi += step;
        step *= 2.0;
    }
    // Coarse scan: the reject flag must switch from true to false exactly once.
    constexpr int kScan = 16;
    bool previous = true;
    for (int i = 1; i < kScan; ++i) {
        const bool now = test(lo + (hi - lo) * i / kScan).reject;
        if (now && !previous) throw NumericalError("test inversion: non-monotone rejection region");
        previous = now;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(center)) + 1e-6 * scale;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (test(mid).reject) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double invert_to_lower_bound(RhoFamilyTest test, const Eigen::VectorXd& sharpe, Index n, double rho, double alpha) {
    check_test_inputs(sharpe, n, alpha);
    const NullTest at = [&](double zeta0) { return test(sharpe, n, rho, zeta0, alpha); };
    return invert_to_lower_bound(at, sharpe.maxCoeff(), 1.0 / std::sqrt(static_cast<double>(n)));
}

}  // namespace maxsharpe
