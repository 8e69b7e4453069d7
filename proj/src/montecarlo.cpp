#include "maxsharpe/montecarlo.hpp"

#include "maxsharpe/classical.hpp"
#include "maxsharpe/error.hpp"
#include "maxsharpe/selective.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace maxsharpe {

namespace {

constexpr double kMaxFailureRate = 1e-3;
constexpr std::size_t kMaxFailureMessages = 5;
constexpr Index kLowConfidenceCount = 25;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 replication_engine(std::uint64_t seed, Index replication_index) {
    const std::uint64_t key = splitmix64(seed) ^ splitmix64(0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(replication_index) + 1));
    return std::mt19937_64(splitmix64(key));
}

// Shared, read-only state for one experiment.
struct Context {
    SimConfig config;
    Eigen::VectorXd snr;
    Eigen::MatrixXd true_corr;
    Eigen::MatrixXd cholesky;  // only used when rho < 0
    std::optional<SharpeCovariance> infeasible_q;
    bool null_calibration = false;

    Context(const SimConfig& cfg, bool null_cal) : config(cfg), null_calibration(null_cal) {
        snr = config.snr.vector(config.k);
        true_corr = rank_one_correlation(config.rho, config.k);
        if (config.rho < 0.0) cholesky = Eigen::LLT<Eigen::MatrixXd>(true_corr).matrixL();
        if (config.covariance_mode == CovarianceMode::infeasible) {
            if (config.law.kind == ReturnsLaw::Kind::student_t) {
                const double kappa = 1.0 + 2.0 / (config.law.df - 4.0);
                infeasible_q = sharpe_covariance_elliptical(true_corr, snr, kappa, config.n);
            } else {
                infeasible_q = sharpe_covariance_gaussian(true_corr, snr, config.n);
            }
        }
    }
};

Eigen::MatrixXd draw_panel(const Context& ctx, Index replication_index) {
    const SimConfig& cfg = ctx.config;
    const Index k = cfg.k;
    std::mt19937_64 rng = replication_engine(cfg.seed, replication_index);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::optional<std::chi_squared_distribution<double>> chisq;
    if (cfg.law.kind == ReturnsLaw::Kind::student_t) chisq.emplace(cfg.law.df);

    const bool rank_one = cfg.rho >= 0.0;
    const double common_load = std::sqrt(std::max(cfg.rho, 0.0));
    const double idio_load = std::sqrt(1.0 - std::max(cfg.rho, 0.0));

    // Filled one observation per column, then transposed to n x k.
    Eigen::MatrixXd xt(k, cfg.n);
    Eigen::VectorXd g(k);
    for (Index t = 0; t < cfg.n; ++t) {
        double scale = 1.0;
        if (chisq) scale = std::sqrt((cfg.law.df - 2.0) / (*chisq)(rng));
        auto col = xt.col(t);
        if (rank_one) {
            const double f = common_load * gauss(rng);
            for (Index j = 0; j < k; ++j) col[j] = f + idio_load * gauss(rng);
        } else {
            for (Index j = 0; j < k; ++j) g[j] = gauss(rng);
            col.noalias() = ctx.cholesky * g;
        }
        col = ctx.snr + scale * col;
    }
    return xt.transpose();
}

struct ReplicationResult {
    bool ok = false;
    double selected_snr = 0.0;
    std::vector<double> p;  // NaN where the method failed
    std::string error;
};

double run_method(Method method, const Context& ctx, const ReturnsPanel& panel, const Eigen::VectorXd& sharpe,
                  const MomentEstimates* moments, Index selected, double null_value) {
    const SimConfig& cfg = ctx.config;
    const bool infeasible = cfg.covariance_mode == CovarianceMode::infeasible;
    const Eigen::MatrixXd& corr = infeasible ? ctx.true_corr : moments->corr;
    auto rho = [&] { return infeasible ? cfg.rho : estimate_rho(corr, selected, RhoSource::mean_selected_vs_rest).rho; };

    switch (method) {
        case Method::conditional: {
            const SelectionEvent event = select_max(sharpe);
            SharpeCovariance q;
            switch (cfg.covariance_mode) {
                case CovarianceMode::infeasible:
                    return conditional_pvalue(event, sharpe, *ctx.infeasible_q, null_value, cfg.alpha).p_value;
                case CovarianceMode::feasible_gaussian:
                    q = sharpe_covariance_gaussian(corr, sharpe, cfg.n);
                    break;
                case CovarianceMode::feasible_elliptical:
                    q = sharpe_covariance_elliptical(corr, sharpe, estimate_kurtosis_factor(panel), cfg.n);
                    break;
            }
            return conditional_pvalue(event, sharpe, q, null_value, cfg.alpha).p_value;
        }
        case Method::bonferroni:
            return bonferroni_naive(sharpe.maxCoeff(), cfg.n, cfg.k, null_value, cfg.alpha).p_value;
        case Method::bonferroni_fixed:
            return bonferroni_rho_fixed(sharpe, cfg.n, rho(), null_value, cfg.alpha).p_value;
        case Method::bonferroni_slepian:
            return bonferroni_slepian(sharpe, cfg.n, corr, null_value, cfg.alpha).p_value;
        case Method::chibar:
            return chi_bar_square_test(sharpe, cfg.n, rho(), null_value, cfg.alpha).p_value;
        case Method::follman:
            return follman_test(sharpe, cfg.n, rho(), null_value, cfg.alpha).p_value;
        case Method::hansen_chibar:
            return hansen_chi_bar_square(sharpe, cfg.n, rho(), null_value, cfg.alpha).p_value;
        case Method::hansen_spa:
            return hansen_spa(sharpe, cfg.n, rho(), null_value, cfg.alpha).p_value;
    }
    throw UsageError("unknown method");
}

ReplicationResult run_replication(const Context& ctx, Index replication_index) {
    const SimConfig& cfg = ctx.config;
    ReplicationResult result;
    result.p.assign(cfg.methods.size(), std::numeric_limits<double>::quiet_NaN());
    try {
        const ReturnsPanel panel(draw_panel(ctx, replication_index));
        std::optional<MomentEstimates> moments;
        Eigen::VectorXd sharpe;
        if (cfg.covariance_mode == CovarianceMode::infeasible) {
            const Eigen::MatrixXd& x = panel.values();
            const Eigen::RowVectorXd mu = x.colwise().mean();
            const Eigen::RowVectorXd var = (x.rowwise() - mu).colwise().squaredNorm() / static_cast<double>(cfg.n);
            sharpe = (mu.array() / var.array().sqrt()).transpose();
        } else {
            moments = estimate_moments(panel);
            sharpe = moments->sharpe;
        }
        const Index selected = argmax_lowest(sharpe);
        result.selected_snr = ctx.snr[selected];
        const double null_value = ctx.null_calibration ? result.selected_snr : cfg.null_value;

        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            try {
                result.p[m] = run_method(cfg.methods[m], ctx, panel, sharpe, moments ? &*moments : nullptr, selected,
                                         null_value);
            } catch (const std::exception& e) {
                if (result.error.empty())
                    result.error = std::string(method_name(cfg.methods[m])) + ": " + e.what();
            }
        }
        result.ok = true;
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    return result;
}

std::vector<ReplicationResult> run_all(const Context& ctx) {
    const Index reps = ctx.config.replications;
    std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));
    unsigned threads = ctx.config.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<Index>(threads, reps));

    std::atomic<Index> next{0};
    auto worker = [&] {
        for (Index i = next.fetch_add(1); i < reps; i = next.fetch_add(1))
            results[static_cast<std::size_t>(i)] = run_replication(ctx, i);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return results;
}

SimSummary summarize(const Context& ctx, const std::vector<ReplicationResult>& results) {
    const SimConfig& cfg = ctx.config;
    SimSummary summary;
    summary.config = cfg;
    summary.replications = cfg.replications;

    const double snr_lo = ctx.snr.minCoeff();
    const double snr_hi = ctx.snr.maxCoeff();
    const Index bins = snr_hi > snr_lo ? cfg.snr_bins : 1;
    const double width = bins > 1 ? (snr_hi - snr_lo) / static_cast<double>(bins) : 0.0;

    for (const ReplicationResult& r : results) {
        if (!r.ok) ++summary.replication_failures;
        else if (r.selected_snr < 0.0) ++summary.bad_selection_count;
        if (!r.error.empty() && summary.failure_messages.size() < kMaxFailureMessages)
            summary.failure_messages.push_back(r.error);
    }

    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        MethodSummary ms;
        ms.method = cfg.methods[m];
        std::vector<double> p_values;
        p_values.reserve(results.size());
        ms.power_by_selected_snr.resize(static_cast<std::size_t>(bins));
        for (Index b = 0; b < bins; ++b) {
            PowerBin& bin = ms.power_by_selected_snr[static_cast<std::size_t>(b)];
            bin.lo = snr_lo + width * static_cast<double>(b);
            bin.hi = bins > 1 ? snr_lo + width * static_cast<double>(b + 1) : snr_hi;
        }
        for (const ReplicationResult& r : results) {
            const double p = r.p[m];
            if (std::isnan(p)) {
                ++ms.failures;
                continue;
            }
            p_values.push_back(p);
            const bool reject = p <= cfg.alpha;
            ms.rejections += reject ? 1 : 0;
            Index b = bins > 1 ? static_cast<Index>(std::floor((r.selected_snr - snr_lo) / width)) : 0;
            b = std::clamp<Index>(b, 0, bins - 1);
            PowerBin& bin = ms.power_by_selected_snr[static_cast<std::size_t>(b)];
            ++bin.count;
            bin.rejections += reject ? 1 : 0;
        }
        ms.evaluated = static_cast<Index>(p_values.size());
        if (static_cast<double>(ms.failures) > kMaxFailureRate * static_cast<double>(cfg.replications)) {
            std::ostringstream msg;
            msg << method_name(ms.method) << " failed in " << ms.failures << " of " << cfg.replications
                << " replications (limit 0.1%)";
            if (!summary.failure_messages.empty()) msg << "; first error: " << summary.failure_messages.front();
            throw NumericalError(msg.str());
        }
        if (ms.evaluated > 0) {
            ms.rejection_rate = static_cast<double>(ms.rejections) / static_cast<double>(ms.evaluated);
            ms.ks_statistic = ks_statistic(p_values);
            for (double q : cfg.tracked_q) ms.delta_curve.push_back(delta_at(p_values, q));
        }
        for (PowerBin& bin : ms.power_by_selected_snr) {
            bin.rate = bin.count > 0 ? static_cast<double>(bin.rejections) / static_cast<double>(bin.count) : 0.0;
            bin.low_confidence = bin.count < kLowConfidenceCount;
        }
        if (cfg.retain_p_values) ms.p_values = std::move(p_values);
        summary.methods.push_back(std::move(ms));
    }
    return summary;
}

SimSummary run_experiment(const SimConfig& config, bool null_calibration) {
    config.validate();
    const Context ctx(config, null_calibration);
    return summarize(ctx, run_all(ctx));
}

}  // namespace

std::string_view method_name(Method method) {
    switch (method) {
        case Method::conditional: return "conditional";
        case Method::bonferroni: return "bonferroni";
        case Method::bonferroni_fixed: return "bonferroni_fixed";
        case Method::bonferroni_slepian: return "bonferroni_slepian";
        case Method::chibar: return "chibar";
        case Method::follman: return "follman";
        case Method::hansen_chibar: return "hansen_chibar";
        case Method::hansen_spa: return "hansen_spa";
    }
    return "unknown";
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods{Method::conditional, Method::bonferroni,    Method::bonferroni_fixed,
                                             Method::bonferroni_slepian, Method::chibar, Method::follman,
                                             Method::hansen_chibar, Method::hansen_spa};
    return methods;
}

Method parse_method(std::string_view name) {
    for (Method m : all_methods())
        if (method_name(m) == name) return m;
    throw UsageError("unknown method '" + std::string(name) + "'");
}

Eigen::VectorXd SnrConfig::vector(Index k) const {
    switch (kind) {
        case Kind::uniform_range:
            if (k == 1) return Eigen::VectorXd::Constant(1, 0.5 * (lo + hi));
            return Eigen::VectorXd::LinSpaced(k, lo, hi);
        case Kind::all_equal:
            return Eigen::VectorXd::Constant(k, value);
        case Kind::one_good: {
            Eigen::VectorXd v = Eigen::VectorXd::Constant(k, -value);
            v[0] = value;
            return v;
        }
        case Kind::half_good: {
            Eigen::VectorXd v = Eigen::VectorXd::Constant(k, -value);
            v.head(k / 2).setConstant(value);
            return v;
        }
        case Kind::zero:
            return Eigen::VectorXd::Zero(k);
    }
    return Eigen::VectorXd::Zero(k);
}

void SimConfig::validate() const {
    if (k < 2) throw UsageError("simulation needs k >= 2 assets (selection is vacuous otherwise)");
    if (n < 4) throw UsageError("simulation needs n >= 4 observations");
    if (replications < 1) throw UsageError("replications must be at least 1");
    if (methods.empty()) throw UsageError("no methods configured");
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    if (law.kind == ReturnsLaw::Kind::student_t && !(law.df > 4.0))
        throw UsageError("student t returns need df > 4 (finite fourth moment)");
    if (!std::isfinite(snr.lo) || !std::isfinite(snr.hi) || !std::isfinite(snr.value) || !std::isfinite(null_value))
        throw UsageError("SNR configuration must be finite");
    if (snr_bins < 1) throw UsageError("snr_bins must be positive");
    for (double q : tracked_q)
        if (!(q > 0.0 && q < 1.0)) throw UsageError("tracked q values must lie in (0, 1)");
    try {
        check_rho_range(rho, k);
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
}

const MethodSummary& SimSummary::at(Method method) const {
    for (const MethodSummary& m : methods)
        if (m.method == method) return m;
    throw UsageError("method '" + std::string(method_name(method)) + "' not part of this summary");
}

ReturnsPanel sample_returns(const SimConfig& config, Index replication_index) {
    if (config.law.kind == ReturnsLaw::Kind::student_t && !(config.law.df > 2.0))
        throw UsageError("student t returns need df > 2 for a finite covariance");
    if (config.k < 1 || config.n < 2) throw UsageError("sampling needs k >= 1 and n >= 2");
    check_rho_range(config.rho, config.k);
    SimConfig cfg = config;
    cfg.covariance_mode = CovarianceMode::feasible_gaussian;  // skip the covariance precomputation
    const Context ctx(cfg, false);
    return ReturnsPanel(draw_panel(ctx, replication_index));
}

SimSummary run_null_calibration(const SimConfig& config) { return run_experiment(config, true); }

SimSummary run_power_study(const SimConfig& config) {
    using Kind = SnrConfig::Kind;
    if (config.snr.kind != Kind::all_equal && config.snr.kind != Kind::one_good && config.snr.kind != Kind::half_good)
        throw UsageError("power study needs an all_equal, one_good or half_good SNR configuration");
    return run_experiment(config, false);
}

std::vector<KsRow> run_ks_sweep(const std::vector<SimConfig>& grid) {
    std::vector<KsRow> rows;
    for (const SimConfig& cfg : grid) {
        const SimSummary summary = run_null_calibration(cfg);
        for (const MethodSummary& m : summary.methods)
            rows.push_back({cfg.n, cfg.k, cfg.rho, m.method, m.ks_statistic});
    }
    return rows;
}

std::vector<RhoSweepRow> run_rho_sweep(const SimConfig& config_template, const std::vector<double>& rhos) {
    if (config_template.snr.kind != SnrConfig::Kind::zero) throw UsageError("rho sweep needs the zero SNR configuration");
    std::vector<RhoSweepRow> rows;
    for (double rho : rhos) {
        SimConfig cfg = config_template;
        cfg.rho = rho;
        const SimSummary summary = run_experiment(cfg, false);
        for (const MethodSummary& m : summary.methods) rows.push_back({rho, m.method, m.rejection_rate, m.evaluated});
    }
    return rows;
}

double ks_statistic(std::span<const double> p_values) {
    if (p_values.empty()) throw UsageError("K-S statistic of an empty sample");
    std::vector<double> sorted(p_values.begin(), p_values.end());
    for (double p : sorted)
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError("K-S statistic needs values in [0, 1]");
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double above = static_cast<double>(i + 1) / m - sorted[i];
        const double below = sorted[i] - static_cast<double>(i) / m;
        d = std::max({d, above, below});
    }
    return d;
}

DeltaPoint delta_at(std::span<const double> p_values, double q) {
    if (p_values.empty()) throw UsageError("delta of an empty sample");
    const auto count = std::count_if(p_values.begin(), p_values.end(), [q](double p) { return p <= q; });
    const double n = static_cast<double>(p_values.size());
    const boost::math::binomial_distribution<double> law(n, q);
    DeltaPoint point;
    point.q = q;
    point.delta = static_cast<double>(count) / n - q;
    point.band_lo = boost::math::quantile(law, 0.025) / n - q;
    point.band_hi = boost::math::quantile(law, 0.975) / n - q;
    return point;
}

}  // namespace maxsharpe
