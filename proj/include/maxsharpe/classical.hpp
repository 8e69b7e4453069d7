#pragma once

// Competing procedures for H0: all SNRs equal zeta0 against one-sided
// alternatives: Bonferroni (plain and correlation-corrected), chi-bar-square,
// Follman, and the log-log adjusted chi-bar-square and SPA tests. The
// correlation-aware tests assume the rank-one model R = rho 11' + (1 - rho) I.

#include "maxsharpe/moments.hpp"
#include "maxsharpe/outcome.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace maxsharpe {

enum class RhoSource { supplied, mean_selected_vs_rest, median_pairwise };

struct RhoEstimate {
    double rho = 0.0;
    RhoSource source = RhoSource::supplied;
    bool clamped = false;
};

struct ChiBarWeights {
    std::vector<double> weights;  // weights[i] = C(k, i) 2^-k, i = 0..k
    Index k = 0;
};

// Clamps into (-1/(k-1) + eps, 1 - eps) with eps = 1e-6 and flags the result.
RhoEstimate clamp_rho(double rho, Index k, RhoSource source);

RhoEstimate estimate_rho(const MomentEstimates& moments, Index selected,
                         RhoSource source = RhoSource::mean_selected_vs_rest);
RhoEstimate estimate_rho(const Eigen::MatrixXd& corr, Index selected, RhoSource source);

ChiBarWeights chi_bar_weights(Index k);
// sum_i w_i F_{chi2_i}(x), with chi2_0 the point mass at zero.
double chi_bar_cdf(double x, const ChiBarWeights& weights);
// 1 - chi_bar_cdf, summed from the upper tails.
double chi_bar_sf(double x, const ChiBarWeights& weights);

// Plain Bonferroni on the maximum Sharpe using the noncentral t law with
// n - 1 degrees of freedom and noncentrality sqrt(n) c0.
TestOutcome bonferroni_naive(double max_sharpe, Index n, Index k, double c0, double alpha);

// z1 = sqrt(n) [M (zhat - c0 1)]_1 with M the rank-one inverse square root,
// compared against the 1 - alpha/k normal quantile.
TestOutcome bonferroni_rho_fixed(const Eigen::VectorXd& sharpe, Index n, double rho, double c0, double alpha);

// Worst case rank-one bound: rho = smallest off-diagonal correlation.
TestOutcome bonferroni_slepian(const Eigen::VectorXd& sharpe, Index n, const Eigen::MatrixXd& corr, double c0,
                               double alpha);

// xi = M zhat = c mean(zhat) 1 + (1 - rho)^{-1/2} (zhat - mean(zhat) 1).
Eigen::VectorXd xi_transform(const Eigen::VectorXd& sharpe, double rho);

TestOutcome chi_bar_square_test(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha);
// Chi-bar-square statistic referred to the mixture with `dof` binomial
// components; chi_bar_square_test uses dof = k, the log-log variant uses the
// effective count.
TestOutcome chi_bar_square_with_dof(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha,
                                    Index dof);
TestOutcome follman_test(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha);

// Number of xi_i above c zeta0 - sqrt(2 log log n / n).
Index hansen_effective_count(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0);
TestOutcome hansen_chi_bar_square(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha);
TestOutcome hansen_spa(const Eigen::VectorXd& sharpe, Index n, double rho, double zeta0, double alpha);

// Runs the test at null value zeta0.
using NullTest = std::function<TestOutcome(double zeta0)>;

// Largest zeta0 at which the test still rejects; bisection on the reject
// flag between a bracket centred at `center` with half-width 10 * scale.
double invert_to_lower_bound(const NullTest& test, double center, double scale);

using RhoFamilyTest = TestOutcome (*)(const Eigen::VectorXd&, Index, double, double, double);
double invert_to_lower_bound(RhoFamilyTest test, const Eigen::VectorXd& sharpe, Index n, double rho, double alpha);

}  // namespace maxsharpe
