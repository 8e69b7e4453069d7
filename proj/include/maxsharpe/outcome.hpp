#pragma once

#include <optional>
#include <string>
#include <vector>

namespace maxsharpe {

// Result of one hypothesis test (optionally inverted into a one-sided bound).
struct TestOutcome {
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.05;
    std::optional<double> lower_bound;
    std::vector<std::string> warnings;

    bool operator==(const TestOutcome&) const = default;
};

}  // namespace maxsharpe
