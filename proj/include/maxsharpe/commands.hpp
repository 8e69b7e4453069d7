#pragma once

// The test and ci commands as library calls; tools/maxsharpe.cpp is a thin
// argument parser over these.

#include "maxsharpe/classical.hpp"
#include "maxsharpe/moments.hpp"
#include "maxsharpe/panel_io.hpp"
#include "maxsharpe/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace maxsharpe {

// Methods accepted on the command line: the simulation methods plus "naive",
// the unconditional noncentral t test on the selected asset alone.
const std::vector<std::string>& cli_method_names();

struct TestArgs {
    PanelFile panel;
    std::vector<std::string> methods;  // empty: command default
    double alpha = 0.05;
    double null_value = 0.0;
    std::optional<double> rho;  // overrides the median pairwise estimate
    CovarianceFlavor flavor = CovarianceFlavor::gaussian;
    std::optional<double> rfr;  // constant per-period rate
    double level = 0.95;        // ci only
    bool annualize = false;
    std::optional<double> periods_per_year;
};

// Selects the maximum-Sharpe asset and runs each method at null_value.
RunReport cmd_test(const TestArgs& args);
RunReport run_test(const LoadedPanel& data, const TestArgs& args);

// As cmd_test, plus a one-sided lower confidence bound per method at the given level.
RunReport cmd_ci(const TestArgs& args);
RunReport run_ci(const LoadedPanel& data, const TestArgs& args);

}  // namespace maxsharpe
