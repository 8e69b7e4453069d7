#include "maxsharpe/distributions.hpp"

#include "maxsharpe/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace maxsharpe::dist {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Mills ratio (1 - Phi(x)) / phi(x) by backward evaluation of the Laplace
// continued fraction; used only for x >= 5 where it converges quickly.
double mills_ratio(double x) {
    double t = x;
    for (int i = 200; i >= 1; --i) t = x + i / t;
    return 1.0 / t;
}

// Lower-tail series for t >= 0 (any sign of ncp).
double nct_cdf_nonnegative(double t, double df, double ncp) {
    const double x = t * t / (t * t + df);
    const double lambda = 0.5 * ncp * ncp;
    double total = normal_cdf(-ncp);
    if (x <= 0.0) return total;

    const double half_df = 0.5 * df;
    const double log_lambda = lambda > 0.0 ? std::log(lambda) : -std::numeric_limits<double>::infinity();
    const double scale = ncp * kInvSqrt2;

    auto term = [&](long j) {
        const double jd = static_cast<double>(j);
        double p_j, q_j;
        if (lambda > 0.0) {
            p_j = std::exp(-lambda + jd * log_lambda - std::lgamma(jd + 1.0));
            q_j = std::exp(-lambda + jd * log_lambda - std::lgamma(jd + 1.5));
        } else {
            p_j = j == 0 ? 1.0 : 0.0;
            q_j = j == 0 ? 1.0 / std::tgamma(1.5) : 0.0;
        }
        const double ix_p = p_j > 0.0 ? boost::math::ibeta(jd + 0.5, half_df, x) : 0.0;
        const double ix_q = q_j > 0.0 ? boost::math::ibeta(jd + 1.0, half_df, x) : 0.0;
        return std::pair{p_j * ix_p + scale * q_j * ix_q, p_j + std::abs(scale) * q_j};
    };

    constexpr double tol = 1e-17;
    const long mode = static_cast<long>(std::floor(lambda));
    double sum = 0.0;
    for (long j = mode;; ++j) {
        const auto [value, weight] = term(j);
        sum += value;
        if (weight < tol && j > mode + 2) break;
        if (j > mode + 100000) throw NumericalError("noncentral t series failed to converge");
    }
    for (long j = mode - 1; j >= 0; --j) {
        const auto [value, weight] = term(j);
        sum += value;
        if (weight < tol) break;
    }
    total += 0.5 * sum;
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_normal_sf(double x) {
    if (x < 5.0) return std::log(normal_sf(x));
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(mills_ratio(x));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw UsageError("normal quantile requires p in [0, 1], got " + std::to_string(p));
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chisq_cdf(double x, int df) {
    if (df < 0) throw UsageError("chi-square degrees of freedom must be nonnegative");
    if (x < 0.0) return 0.0;
    if (df == 0) return 1.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(0.5 * df, 0.5 * x);
}

double nct_cdf(double t, double df, double ncp) {
    if (!(df > 0.0)) throw UsageError("noncentral t requires positive degrees of freedom");
    if (std::isnan(t) || std::isnan(ncp)) throw NumericalError("noncentral t evaluated at NaN");
    if (t == std::numeric_limits<double>::infinity()) return 1.0;
    if (t == -std::numeric_limits<double>::infinity()) return 0.0;
    if (t >= 0.0) return nct_cdf_nonnegative(t, df, ncp);
    return std::clamp(1.0 - nct_cdf_nonnegative(-t, df, -ncp), 0.0, 1.0);
}

double nct_sf(double t, double df, double ncp) {
    if (t < 0.0) {
        if (std::isinf(t)) return 1.0;
        return nct_cdf_nonnegative(-t, df, -ncp);
    }
    return std::clamp(1.0 - nct_cdf(t, df, ncp), 0.0, 1.0);
}

double nct_quantile(double p, double df, double ncp) {
    if (!(p > 0.0 && p < 1.0)) throw UsageError("noncentral t quantile requires p in (0, 1)");
    double lo = ncp - 10.0, hi = ncp + 10.0;
    for (int i = 0; nct_cdf(lo, df, ncp) > p; ++i) {
        if (i > 60) throw NumericalError("noncentral t quantile: lower bracket not found");
        lo -= (hi - lo);
    }
    for (int i = 0; nct_cdf(hi, df, ncp) < p; ++i) {
        if (i > 60) throw NumericalError("noncentral t quantile: upper bracket not found");
        hi += (hi - lo);
    }
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-10 * std::max(1.0, std::abs(mid))) return mid;
        if (nct_cdf(mid, df, ncp) < p) lo = mid;
        else hi = mid;
    }
    throw NumericalError("noncentral t quantile did not converge");
}

}  // namespace maxsharpe::dist
