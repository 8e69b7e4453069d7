#pragma once

// Sample moments of a returns panel and the delta-method covariance of the
// vector of Sharpe ratios.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace maxsharpe {

using Index = Eigen::Index;

// n x k matrix of per-period returns, one column per asset.
//
// Construction enforces n >= 2, k >= 1, finite entries and strictly positive
// variance in every column; a degenerate column is reported by name.
class ReturnsPanel {
public:
    ReturnsPanel(Eigen::MatrixXd values, std::vector<std::string> labels, double periods_per_year = 0.0);
    // Labels default to "asset1", "asset2", ...
    explicit ReturnsPanel(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    double periods_per_year() const noexcept { return periods_per_year_; }
    Index n() const noexcept { return values_.rows(); }
    Index k() const noexcept { return values_.cols(); }

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> labels_;
    double periods_per_year_;
};

struct MomentEstimates {
    Eigen::VectorXd mu;      // per-period mean
    Eigen::VectorXd mom2;    // uncentered second moment
    Eigen::VectorXd sigma;   // sqrt(mom2 - mu^2), 1/n normalization
    Eigen::VectorXd sharpe;  // (mu - rfr) / sigma
    Eigen::MatrixXd corr;
    double rfr = 0.0;
    Index n = 0;

    Index k() const noexcept { return mu.size(); }
};

enum class CovarianceFlavor { gaussian, elliptical };

// Approximate variance of the Sharpe vector; already includes the 1/n factor.
struct SharpeCovariance {
    Eigen::MatrixXd q;
    CovarianceFlavor flavor = CovarianceFlavor::gaussian;
    double kurtosis_factor = 1.0;
    Index n = 0;
};

MomentEstimates estimate_moments(const ReturnsPanel& panel, double rfr = 0.0);

// Q = (R + 1/2 diag(snr) (R o R) diag(snr)) / n.
SharpeCovariance sharpe_covariance_gaussian(const Eigen::MatrixXd& corr, const Eigen::VectorXd& snr, Index n);

// Q = (R + (kappa - 1)/4 snr snr' + kappa/2 diag(snr) (R o R) diag(snr)) / n.
// kappa is one third of the marginal kurtosis (1 for Gaussian returns).
SharpeCovariance sharpe_covariance_elliptical(const Eigen::MatrixXd& corr, const Eigen::VectorXd& snr,
                                              double kurtosis_factor, Index n);

// Jacobian of the Sharpe vector with respect to the stacked (mean, second
// moment) vector: [diag((mom2 - mu rfr)/sigma^3) | diag((rfr - mu)/(2 sigma^3))].
Eigen::MatrixXd delta_derivative(const Eigen::VectorXd& mu, const Eigen::VectorXd& mom2, double rfr);

// Median over assets of the raw fourth standardized moment divided by 3.
double estimate_kurtosis_factor(const ReturnsPanel& panel);

// rho * 11' + (1 - rho) I; requires -1/(k-1) < rho < 1.
Eigen::MatrixXd rank_one_correlation(double rho, Index k);

// Closed-form symmetric inverse square root of rank_one_correlation(rho, k).
Eigen::MatrixXd rank_one_inverse_sqrt(double rho, Index k);

// Throws DataError unless -1/(k-1) < rho < 1 (any rho < 1 when k == 1).
void check_rho_range(double rho, Index k);

}  // namespace maxsharpe
