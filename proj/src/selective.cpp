#include "maxsharpe/selective.hpp"

#include "maxsharpe/distributions.hpp"
#include "maxsharpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace maxsharpe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SelectionEvent identity_event(Index k, Index rows) {
    SelectionEvent ev;
    ev.a = Eigen::MatrixXd::Zero(rows, k);
    ev.b = Eigen::VectorXd::Zero(rows);
    ev.eta = Eigen::VectorXd::Unit(k, 0);
    ev.permutation.resize(static_cast<std::size_t>(k));
    std::iota(ev.permutation.begin(), ev.permutation.end(), Index{0});
    ev.signs = Eigen::VectorXd::Ones(k);
    return ev;
}

// Stable descending order of v: ties keep the lower original index first.
std::vector<Index> descending_order(const Eigen::VectorXd& v) {
    std::vector<Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return v[i] > v[j]; });
    return order;
}

void fill_max_rows(Eigen::MatrixXd& a, Index k) {
    for (Index j = 1; j < k; ++j) {
        a(j - 1, 0) = -1.0;
        a(j - 1, j) = 1.0;
    }
}

void require_finite(const Eigen::VectorXd& sharpe) {
    if (!sharpe.allFinite()) throw DataError("Sharpe vector contains non-finite entries");
}

// Truncated CDF for a standardized interval with lo >= 0, evaluated through
// log upper-tail probabilities so that far-tail intervals keep full precision.
double upper_interval_cdf(double t, double lo, double hi) {
    const double log_lo = dist::log_normal_sf(lo);
    const double log_t = dist::log_normal_sf(t);
    const double log_hi = std::isinf(hi) ? -kInf : dist::log_normal_sf(hi);
    const double num = -std::expm1(log_t - log_lo);
    const double den = -std::expm1(log_hi - log_lo);
    return num / den;
}

double standardized_truncated_cdf(double t, double lo, double hi) {
    if (t <= lo) return 0.0;
    if (t >= hi) return 1.0;
    double value;
    if (lo >= 0.0) {
        value = upper_interval_cdf(t, lo, hi);
    } else if (hi <= 0.0) {
        value = 1.0 - upper_interval_cdf(-t, -hi, -lo);
    } else {
        const double phi_lo = dist::normal_cdf(lo);
        value = (dist::normal_cdf(t) - phi_lo) / (dist::normal_cdf(hi) - phi_lo);
    }
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace

Eigen::VectorXd SelectionEvent::to_event(const Eigen::VectorXd& v) const {
    if (v.size() != k()) throw UsageError("vector length does not match the selection event");
    Eigen::VectorXd out(k());
    for (Index i = 0; i < k(); ++i) out[i] = signs[i] * v[permutation[static_cast<std::size_t>(i)]];
    return out;
}

Eigen::MatrixXd SelectionEvent::to_event(const Eigen::MatrixXd& m) const {
    if (m.rows() != k() || m.cols() != k()) throw UsageError("matrix size does not match the selection event");
    Eigen::MatrixXd out(k(), k());
    for (Index j = 0; j < k(); ++j) {
        const Index pj = permutation[static_cast<std::size_t>(j)];
        for (Index i = 0; i < k(); ++i)
            out(i, j) = signs[i] * signs[j] * m(permutation[static_cast<std::size_t>(i)], pj);
    }
    return out;
}

Index argmax_lowest(const Eigen::VectorXd& v) {
    if (v.size() == 0) throw UsageError("argmax of an empty vector");
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

SelectionEvent build_max_constraint(Index k) {
    if (k < 2)
        throw UsageError("max selection needs k >= 2; with a single asset use an unconditional test");
    SelectionEvent ev = identity_event(k, k - 1);
    fill_max_rows(ev.a, k);
    ev.kind = SelectionKind::max;
    return ev;
}

SelectionEvent select_max(const Eigen::VectorXd& sharpe) {
    require_finite(sharpe);
    SelectionEvent ev = build_max_constraint(sharpe.size());
    const Index best = argmax_lowest(sharpe);
    ev.permutation.clear();
    ev.permutation.push_back(best);
    for (Index i = 0; i < sharpe.size(); ++i)
        if (i != best) ev.permutation.push_back(i);
    ev.selected_index = best;
    return ev;
}

SelectionEvent build_abs_max_constraint(const Eigen::VectorXd& sharpe) {
    require_finite(sharpe);
    const Index k = sharpe.size();
    if (k < 2) throw UsageError("absolute-max selection needs k >= 2");
    SelectionEvent ev = identity_event(k, (k - 1) + k);
    const Index best = argmax_lowest(sharpe.cwiseAbs());
    ev.permutation.clear();
    ev.permutation.push_back(best);
    for (Index i = 0; i < k; ++i)
        if (i != best) ev.permutation.push_back(i);
    for (Index i = 0; i < k; ++i)
        ev.signs[i] = sharpe[ev.permutation[static_cast<std::size_t>(i)]] < 0.0 ? -1.0 : 1.0;
    fill_max_rows(ev.a, k);
    for (Index j = 0; j < k; ++j) ev.a(k - 1 + j, j) = -1.0;
    ev.selected_index = best;
    ev.kind = SelectionKind::abs_max;
    return ev;
}

SelectionEvent build_top_m_constraint(const Eigen::VectorXd& sharpe, Index m) {
    require_finite(sharpe);
    const Index k = sharpe.size();
    if (m < 1 || m >= k) throw UsageError("top-m selection needs 1 <= m < k");
    const std::vector<Index> order = descending_order(sharpe);
    if (sharpe[order[static_cast<std::size_t>(m - 1)]] == sharpe[order[static_cast<std::size_t>(m)]])
        throw DataError("tie at the top-m boundary: the kept set is not uniquely determined");

    SelectionEvent ev = identity_event(k, m * (k - m));
    ev.permutation = order;
    Index row = 0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = m; j < k; ++j, ++row) {
            ev.a(row, i) = -1.0;
            ev.a(row, j) = 1.0;
        }
    }
    ev.selected_index = order.front();
    ev.kind = SelectionKind::top_m;
    ev.kept = m;
    return ev;
}

SelectionEvent build_threshold_constraint(const Eigen::VectorXd& sharpe, double zeta_star) {
    require_finite(sharpe);
    const Index k = sharpe.size();
    std::vector<Index> passers, rest;
    for (Index i = 0; i < k; ++i) {
        if (sharpe[i] == zeta_star) {
            std::ostringstream msg;
            msg << "asset " << i << " has Sharpe exactly equal to the threshold " << zeta_star;
            throw DataError(msg.str());
        }
        (sharpe[i] > zeta_star ? passers : rest).push_back(i);
    }
    if (passers.empty()) throw DataError("no asset passes the Sharpe threshold");
    std::stable_sort(passers.begin(), passers.end(), [&](Index i, Index j) { return sharpe[i] > sharpe[j]; });

    SelectionEvent ev = identity_event(k, k);
    ev.permutation = passers;
    ev.permutation.insert(ev.permutation.end(), rest.begin(), rest.end());
    const Index n_pass = static_cast<Index>(passers.size());
    for (Index i = 0; i < k; ++i) {
        if (i < n_pass) {
            ev.a(i, i) = -1.0;
            ev.b[i] = -zeta_star;
        } else {
            ev.a(i, i) = 1.0;
            ev.b[i] = zeta_star;
        }
    }
    ev.selected_index = passers.front();
    ev.kind = SelectionKind::threshold;
    ev.kept = n_pass;
    ev.threshold = zeta_star;
    return ev;
}

SelectionEvent with_test_vector(SelectionEvent event, const Eigen::VectorXd& weights, const Eigen::MatrixXd& corr) {
    if (weights.size() != event.k() || corr.rows() != event.k() || corr.cols() != event.k())
        throw UsageError("test weights and correlation must match the number of assets");
    if (weights.isZero(0.0)) throw DataError("test weights are all zero");
    const double quad = weights.dot(corr * weights);
    if (!(quad > 0.0)) throw DataError("w' R w must be positive to normalize the test vector");
    event.eta = event.to_event(weights) / std::sqrt(quad);
    event.portfolio_weights = weights;
    return event;
}

TruncationInterval truncation_bounds(const SelectionEvent& event, const Eigen::VectorXd& sharpe,
                                     const SharpeCovariance& q) {
    if (sharpe.size() != event.k()) throw UsageError("Sharpe vector length does not match the selection event");
    const Eigen::VectorXd y = event.to_event(sharpe);
    const Eigen::MatrixXd qe = event.to_event(q.q);
    const Eigen::VectorXd q_eta = qe * event.eta;
    const double variance = event.eta.dot(q_eta);
    if (!(variance > 0.0)) throw NumericalError("eta' Q eta must be positive");

    const Eigen::VectorXd ay = event.a * y;
    for (Index j = 0; j < ay.size(); ++j) {
        const double slack = 1e-12 * std::max({1.0, std::abs(ay[j]), std::abs(event.b[j])});
        if (ay[j] > event.b[j] + slack) {
            std::ostringstream msg;
            msg << "observed Sharpe vector violates selection constraint row " << j << " (" << ay[j] << " > "
                << event.b[j] << ")";
            throw DataError(msg.str());
        }
    }

    TruncationInterval out;
    out.variance = variance;
    out.statistic = event.eta.dot(y);
    out.c_vector = q_eta / variance;
    out.z_vector = y - out.c_vector * out.statistic;

    const Eigen::VectorXd ac = event.a * out.c_vector;
    const Eigen::VectorXd az = event.a * out.z_vector;
    const double zero_tol = 1e-12 * out.c_vector.norm();
    out.v_min = -kInf;
    out.v_max = kInf;
    for (Index j = 0; j < ac.size(); ++j) {
        if (std::abs(ac[j]) < zero_tol) continue;
        const double bound = (event.b[j] - az[j]) / ac[j];
        if (ac[j] < 0.0) out.v_min = std::max(out.v_min, bound);
        else out.v_max = std::min(out.v_max, bound);
    }
    if (!(out.v_min < out.v_max)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "empty truncation interval: V- = " << out.v_min << ", V+ = " << out.v_max;
        throw NumericalError(msg.str());
    }
    // The observed statistic lies in [V-, V+] up to rounding; snap it inside.
    out.statistic = std::clamp(out.statistic, out.v_min, out.v_max);
    return out;
}

double truncated_normal_cdf(double x, double a, double b, double mu, double sigma2) {
    if (!(a < b)) throw UsageError("truncated normal requires a < b");
    if (!(sigma2 > 0.0)) throw UsageError("truncated normal requires positive variance");
    if (std::isnan(x) || std::isnan(mu)) throw NumericalError("truncated normal evaluated at NaN");
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const double sigma = std::sqrt(sigma2);
    return standardized_truncated_cdf((x - mu) / sigma, (a - mu) / sigma, (b - mu) / sigma);
}

namespace {

// 1 - F(x) evaluated by reflection so that small p-values keep relative precision.
double truncated_normal_upper(double x, double a, double b, double mu, double sigma2) {
    return truncated_normal_cdf(-x, -b, -a, -mu, sigma2);
}

}  // namespace

TestOutcome conditional_pvalue(const TruncationInterval& interval, double null_value, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    TestOutcome out;
    out.method = "conditional";
    out.alpha = alpha;
    out.statistic = interval.statistic;
    out.p_value = std::clamp(
        truncated_normal_upper(interval.statistic, interval.v_min, interval.v_max, null_value, interval.variance),
        0.0, 1.0);
    out.reject = out.p_value <= alpha;
    return out;
}

TestOutcome conditional_pvalue(const SelectionEvent& event, const Eigen::VectorXd& sharpe, const SharpeCovariance& q,
                               double null_value, double alpha) {
    return conditional_pvalue(truncation_bounds(event, sharpe, q), null_value, alpha);
}

double conditional_lower_bound(const TruncationInterval& interval, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    const double se = std::sqrt(interval.variance);
    auto pvalue = [&](double c0) {
        return truncated_normal_upper(interval.statistic, interval.v_min, interval.v_max, c0, interval.variance);
    };
    double lo = interval.statistic - 10.0 * se;
    double hi = interval.statistic + 10.0 * se;
    double width = hi - lo;
    for (int i = 0; pvalue(lo) > alpha; ++i) {
        if (i >= 60) throw NumericalError("conditional bound: lower bracket expansion exceeded 60 doublings");
        lo -= width;
        width *= 2.0;
    }
    width = hi - lo;
    for (int i = 0; pvalue(hi) < alpha; ++i) {
        if (i >= 60) throw NumericalError("conditional bound: upper bracket expansion exceeded 60 doublings");
        hi += width;
        width *= 2.0;
    }
    const double tol = std::min(1e-8, 1e-6 * se);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (pvalue(mid) < alpha) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double conditional_lower_bound(const SelectionEvent& event, const Eigen::VectorXd& sharpe, const SharpeCovariance& q,
                               double alpha) {
    return conditional_lower_bound(truncation_bounds(event, sharpe, q), alpha);
}

}  // namespace maxsharpe
