#pragma once

// Conditional inference on a linear functional of the Sharpe vector after a
// data-driven selection that can be written as A * zhat <= b.
//
// Every SelectionEvent carries the reordering (and, for absolute-max
// selection, the sign flips) that maps the observed Sharpe vector into the
// coordinates in which A, b and eta are expressed. Functions that take the
// observed Sharpe vector and its covariance accept them in the original asset
// order and apply that map internally.

#include "maxsharpe/moments.hpp"
#include "maxsharpe/outcome.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace maxsharpe {

enum class SelectionKind { max, abs_max, top_m, threshold };

struct SelectionEvent {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::VectorXd eta;
    // Original column index of the asset placed first.
    Index selected_index = 0;
    // permutation[i] = original index of the asset in position i.
    std::vector<Index> permutation;
    // +1 or -1 per position (after permutation).
    Eigen::VectorXd signs;
    SelectionKind kind = SelectionKind::max;
    Index kept = 1;               // top_m only
    double threshold = 0.0;       // threshold only
    // Set by with_test_vector; original asset order.
    std::optional<Eigen::VectorXd> portfolio_weights;

    Index k() const noexcept { return static_cast<Index>(permutation.size()); }
    // Maps an original-order vector into event coordinates.
    Eigen::VectorXd to_event(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd to_event(const Eigen::MatrixXd& m) const;
};

struct TruncationInterval {
    double v_min = 0.0;
    double v_max = 0.0;
    Eigen::VectorXd c_vector;
    Eigen::VectorXd z_vector;
    double statistic = 0.0;  // eta' zhat
    double variance = 0.0;   // eta' Q eta
};

// Index of the largest entry; ties go to the lowest index.
Index argmax_lowest(const Eigen::VectorXd& v);

// Max-selection constraints for a Sharpe vector already ordered with the
// maximum first: rows -e1 + ej, b = 0, eta = e1.
SelectionEvent build_max_constraint(Index k);

// Max-selection for an arbitrary ordering: the maximizer is moved to the front.
SelectionEvent select_max(const Eigen::VectorXd& sharpe);

SelectionEvent build_abs_max_constraint(const Eigen::VectorXd& sharpe);
SelectionEvent build_top_m_constraint(const Eigen::VectorXd& sharpe, Index m);
SelectionEvent build_threshold_constraint(const Eigen::VectorXd& sharpe, double zeta_star);

// eta = w / sqrt(w' R w), with w and R in original asset order.
SelectionEvent with_test_vector(SelectionEvent event, const Eigen::VectorXd& weights, const Eigen::MatrixXd& corr);

TruncationInterval truncation_bounds(const SelectionEvent& event, const Eigen::VectorXd& sharpe,
                                     const SharpeCovariance& q);

// CDF of N(mu, sigma2) truncated to [a, b]; a and b may be infinite.
double truncated_normal_cdf(double x, double a, double b, double mu, double sigma2);

TestOutcome conditional_pvalue(const SelectionEvent& event, const Eigen::VectorXd& sharpe, const SharpeCovariance& q,
                               double null_value, double alpha = 0.05);

// Same test, reusing a precomputed interval.
TestOutcome conditional_pvalue(const TruncationInterval& interval, double null_value, double alpha = 0.05);

double conditional_lower_bound(const SelectionEvent& event, const Eigen::VectorXd& sharpe, const SharpeCovariance& q,
                               double alpha);
double conditional_lower_bound(const TruncationInterval& interval, double alpha);

}  // namespace maxsharpe
