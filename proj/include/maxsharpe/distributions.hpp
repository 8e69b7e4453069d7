#pragma once

// Scalar distribution functions shared by the test procedures.

namespace maxsharpe::dist {

double normal_pdf(double x);
double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate for large positive x.
double normal_sf(double x);
// log(1 - Phi(x)); finite for every finite x (continued fraction in the far tail).
double log_normal_sf(double x);
double normal_quantile(double p);

// Chi-square CDF. df = 0 is the point mass at zero, so the CDF is 1 for x >= 0.
double chisq_cdf(double x, int df);

// Noncentral t CDF with df degrees of freedom and noncentrality ncp.
//
// Sums the Poisson-weighted incomplete-beta series outward from the modal
// term in both directions, stopping once the remaining Poisson mass is below
// the tolerance. Negative t uses F(t; df, ncp) = 1 - F(-t; df, -ncp).
double nct_cdf(double t, double df, double ncp);
double nct_sf(double t, double df, double ncp);
// Bisection on nct_cdf; relative tolerance 1e-10.
double nct_quantile(double p, double df, double ncp);

}  // namespace maxsharpe::dist
