#pragma once

// Seeded simulation engine for null calibration, uniformity sweeps, power
// studies and rho sweeps.
//
// Every replication draws from its own generator keyed by (seed, replication
// index), and results are reduced in replication order, so summaries do not
// depend on the number of worker threads.

#include "maxsharpe/moments.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maxsharpe {

enum class Method {
    conditional,
    bonferroni,
    bonferroni_fixed,
    bonferroni_slepian,
    chibar,
    follman,
    hansen_chibar,
    hansen_spa,
};

std::string_view method_name(Method method);
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct SnrConfig {
    enum class Kind { uniform_range, all_equal, one_good, half_good, zero };
    Kind kind = Kind::zero;
    double lo = 0.0;     // uniform_range
    double hi = 0.0;     // uniform_range
    double value = 0.0;  // all_equal, one_good, half_good

    static SnrConfig uniform_range(double lo, double hi) { return {Kind::uniform_range, lo, hi, 0.0}; }
    static SnrConfig all_equal(double z) { return {Kind::all_equal, 0.0, 0.0, z}; }
    static SnrConfig one_good(double z) { return {Kind::one_good, 0.0, 0.0, z}; }
    static SnrConfig half_good(double z) { return {Kind::half_good, 0.0, 0.0, z}; }
    static SnrConfig zero() { return {}; }

    // Population SNR vector; uniform_range is an evenly spaced grid from lo to hi.
    Eigen::VectorXd vector(Index k) const;
};

struct ReturnsLaw {
    enum class Kind { gaussian, student_t };
    Kind kind = Kind::gaussian;
    double df = 0.0;

    static ReturnsLaw gaussian() { return {}; }
    static ReturnsLaw student_t(double df) { return {Kind::student_t, df}; }
};

// infeasible: covariance of the Sharpe vector from the true R and SNRs, and the
// true rho for rank-one tests. feasible_*: plug-in sample estimates.
enum class CovarianceMode { infeasible, feasible_gaussian, feasible_elliptical };

struct SimConfig {
    Index k = 100;
    Index n = 1260;
    double rho = 0.7;
    SnrConfig snr = SnrConfig::zero();
    ReturnsLaw law = ReturnsLaw::gaussian();
    Index replications = 2000;
    std::uint64_t seed = 20190722;
    std::vector<Method> methods{Method::conditional};
    double alpha = 0.05;
    CovarianceMode covariance_mode = CovarianceMode::feasible_gaussian;
    // Null value for power studies and rho sweeps (null calibration uses the
    // true SNR of the selected asset instead).
    double null_value = 0.0;
    unsigned threads = 0;  // 0: hardware concurrency
    bool retain_p_values = false;
    std::vector<double> tracked_q{0.005, 0.01, 0.025, 0.05, 0.10};
    Index snr_bins = 20;

    void validate() const;
};

struct DeltaPoint {
    double q = 0.0;
    double delta = 0.0;    // prop(p <= q) - q
    double band_lo = 0.0;  // binomial 95% band, same units as delta
    double band_hi = 0.0;

    bool inside_band() const noexcept { return delta >= band_lo && delta <= band_hi; }
};

struct PowerBin {
    double lo = 0.0;
    double hi = 0.0;
    Index count = 0;
    Index rejections = 0;
    double rate = 0.0;
    bool low_confidence = false;  // fewer than 25 observations
};

struct MethodSummary {
    Method method = Method::conditional;
    Index evaluated = 0;
    Index rejections = 0;
    Index failures = 0;
    double rejection_rate = 0.0;
    double ks_statistic = 0.0;
    std::vector<DeltaPoint> delta_curve;
    std::vector<PowerBin> power_by_selected_snr;
    std::vector<double> p_values;  // in replication order; only if retained
};

struct SimSummary {
    SimConfig config;
    Index replications = 0;
    Index replication_failures = 0;
    Index bad_selection_count = 0;  // selected asset has negative true SNR
    std::vector<MethodSummary> methods;
    std::vector<std::string> failure_messages;  // first few, for diagnostics

    const MethodSummary& at(Method method) const;
};

ReturnsPanel sample_returns(const SimConfig& config, Index replication_index);

SimSummary run_null_calibration(const SimConfig& config);
SimSummary run_power_study(const SimConfig& config);

struct KsRow {
    Index n = 0;
    Index k = 0;
    double rho = 0.0;
    Method method = Method::conditional;
    double ks_statistic = 0.0;
};
std::vector<KsRow> run_ks_sweep(const std::vector<SimConfig>& grid);

struct RhoSweepRow {
    double rho = 0.0;
    Method method = Method::conditional;
    double rejection_rate = 0.0;
    Index evaluated = 0;
};
std::vector<RhoSweepRow> run_rho_sweep(const SimConfig& config_template, const std::vector<double>& rhos);

// sup |F_m(x) - x| for the empirical CDF F_m of the sample.
double ks_statistic(std::span<const double> p_values);

DeltaPoint delta_at(std::span<const double> p_values, double q);

}  // namespace maxsharpe
