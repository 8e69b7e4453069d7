#include "maxsharpe/moments.hpp"

#include "maxsharpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace maxsharpe {

namespace {

constexpr double kPsdTolerance = 1e-10;

std::vector<std::string> default_labels(Index k) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(k));
    for (Index j = 0; j < k; ++j) labels.push_back("asset" + std::to_string(j + 1));
    return labels;
}

// Symmetrize and enforce the PSD policy: eigenvalues in (-tol, 0) are clamped
// to zero, anything more negative is an error.
Eigen::MatrixXd enforce_psd(Eigen::MatrixXd q) {
    q = 0.5 * (q + q.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig >= 0.0) return q;
    if (min_eig < -kPsdTolerance) {
        std::ostringstream msg;
        msg << "Sharpe covariance is not positive semidefinite (minimum eigenvalue " << min_eig << ")";
        throw NumericalError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(q);
    const Eigen::VectorXd clamped = full.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd repaired = full.eigenvectors() * clamped.asDiagonal() * full.eigenvectors().transpose();
    return 0.5 * (repaired + repaired.transpose());
}

void check_covariance_inputs(const Eigen::MatrixXd& corr, const Eigen::VectorXd& snr, Index n) {
    if (corr.rows() != corr.cols()) throw UsageError("correlation matrix must be square");
    if (corr.rows() != snr.size()) {
        std::ostringstream msg;
        msg << "dimension mismatch: correlation is " << corr.rows() << "x" << corr.cols() << " but SNR vector has "
            << snr.size() << " entries";
        throw UsageError(msg.str());
    }
    if (n < 2) throw UsageError("sample size must be at least 2");
}

}  // namespace

ReturnsPanel::ReturnsPanel(Eigen::MatrixXd values, std::vector<std::string> labels, double periods_per_year)
    : values_(std::move(values)), labels_(std::move(labels)), periods_per_year_(periods_per_year) {
    if (values_.rows() < 2) throw DataError("returns panel needs at least 2 observations");
    if (values_.cols() < 1) throw DataError("returns panel needs at least 1 asset");
    if (static_cast<Index>(labels_.size()) != values_.cols())
        throw DataError("returns panel has " + std::to_string(values_.cols()) + " columns but " +
                        std::to_string(labels_.size()) + " labels");
    if (!values_.allFinite()) throw DataError("returns panel contains non-finite values");
    if (periods_per_year_ < 0.0) throw DataError("periods_per_year must be nonnegative");
    for (Index j = 0; j < values_.cols(); ++j) {
        const auto col = values_.col(j);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().mean();
        if (!(var > 0.0)) throw DataError("column '" + labels_[static_cast<std::size_t>(j)] + "' has zero variance");
    }
}

ReturnsPanel::ReturnsPanel(Eigen::MatrixXd values)
    : ReturnsPanel(values, default_labels(values.cols()), 0.0) {}

MomentEstimates estimate_moments(const ReturnsPanel& panel, double rfr) {
    const Eigen::MatrixXd& x = panel.values();
    const double n = static_cast<double>(panel.n());

    MomentEstimates m;
    m.n = panel.n();
    m.rfr = rfr;
    m.mu = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - m.mu.transpose();
    const Eigen::VectorXd var = centered.colwise().squaredNorm().transpose() / n;
    m.mom2 = var.array() + m.mu.array().square();
    m.sigma = var.array().sqrt();
    m.sharpe = (m.mu.array() - rfr) / m.sigma.array();

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(panel.k(), panel.k());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / n);
    cov = cov.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd inv_sigma = m.sigma.cwiseInverse();
    m.corr = inv_sigma.asDiagonal() * cov * inv_sigma.asDiagonal();
    m.corr = m.corr.cwiseMax(-1.0).cwiseMin(1.0);
    m.corr.diagonal().setOnes();
    return m;
}

SharpeCovariance sharpe_covariance_gaussian(const Eigen::MatrixXd& corr, const Eigen::VectorXd& snr, Index n) {
    check_covariance_inputs(corr, snr, n);
    const Eigen::MatrixXd hadamard = corr.cwiseProduct(corr);
    Eigen::MatrixXd q = corr + 0.5 * (snr.asDiagonal() * hadamard * snr.asDiagonal());
    q /= static_cast<double>(n);
    return {enforce_psd(std::move(q)), CovarianceFlavor::gaussian, 1.0, n};
}

SharpeCovariance sharpe_covariance_elliptical(const Eigen::MatrixXd& corr, const Eigen::VectorXd& snr,
                                              double kurtosis_factor, Index n) {
    check_covariance_inputs(corr, snr, n);
    if (!(kurtosis_factor >= 1.0 / 3.0))
        throw UsageError("kurtosis factor must be at least 1/3, got " + std::to_string(kurtosis_factor));
    const Eigen::MatrixXd hadamard = corr.cwiseProduct(corr);
    Eigen::MatrixXd q = corr + 0.25 * (kurtosis_factor - 1.0) * (snr * snr.transpose()) +
                        0.5 * kurtosis_factor * (snr.asDiagonal() * hadamard * snr.asDiagonal());
    q /= static_cast<double>(n);
    return {enforce_psd(std::move(q)), CovarianceFlavor::elliptical, kurtosis_factor, n};
}

Eigen::MatrixXd delta_derivative(const Eigen::VectorXd& mu, const Eigen::VectorXd& mom2, double rfr) {
    if (mu.size() != mom2.size()) throw UsageError("mean and second-moment vectors differ in length");
    const Index k = mu.size();
    const Eigen::ArrayXd var = mom2.array() - mu.array().square();
    if ((var <= 0.0).any()) throw DataError("second moment does not exceed squared mean (degenerate variance)");
    const Eigen::ArrayXd sigma3 = var * var.sqrt();

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k, 2 * k);
    d.leftCols(k).diagonal() = (mom2.array() - mu.array() * rfr) / sigma3;
    d.rightCols(k).diagonal() = (rfr - mu.array()) / (2.0 * sigma3);
    return d;
}

double estimate_kurtosis_factor(const ReturnsPanel& panel) {
    if (panel.n() < 4) throw DataError("kurtosis estimate needs at least 4 observations");
    const Eigen::MatrixXd& x = panel.values();
    std::vector<double> factors;
    factors.reserve(static_cast<std::size_t>(panel.k()));
    for (Index j = 0; j < panel.k(); ++j) {
        const Eigen::ArrayXd centered = x.col(j).array() - x.col(j).mean();
        const Eigen::ArrayXd sq = centered.square();
        const double m2 = sq.mean();
        const double m4 = sq.square().mean();
        factors.push_back(m4 / (m2 * m2) / 3.0);
    }
    std::sort(factors.begin(), factors.end());
    const std::size_t mid = factors.size() / 2;
    if (factors.size() % 2 == 1) return factors[mid];
    return 0.5 * (factors[mid - 1] + factors[mid]);
}

void check_rho_range(double rho, Index k) {
    if (k < 1) throw UsageError("asset count must be positive");
    const double lower = k > 1 ? -1.0 / static_cast<double>(k - 1) : -std::numeric_limits<double>::infinity();
    if (!(rho > lower && rho < 1.0)) {
        std::ostringstream msg;
        msg << "rho = " << rho << " outside the positive-definite range (" << lower << ", 1) for k = " << k;
        throw DataError(msg.str());
    }
}

Eigen::MatrixXd rank_one_correlation(double rho, Index k) {
    check_rho_range(rho, k);
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(k, k, rho);
    r.diagonal().setOnes();
    return r;
}

Eigen::MatrixXd rank_one_inverse_sqrt(double rho, Index k) {
    check_rho_range(rho, k);
    const double kd = static_cast<double>(k);
    const double diag_part = 1.0 / std::sqrt(1.0 - rho);
    const double ones_part = (1.0 / std::sqrt(1.0 - rho + kd * rho) - diag_part) / kd;
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, ones_part);
    m.diagonal().array() += diag_part;
    return m;
}

}  // namespace maxsharpe
