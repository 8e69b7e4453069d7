#pragma once

// Flat key=value experiment descriptions for the simulate command.

#include "maxsharpe/montecarlo.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace maxsharpe {

using Settings = std::map<std::string, std::string>;

enum class ExperimentKind { null_calibration, power, rho_sweep, ks_sweep };

struct SimJob {
    ExperimentKind kind = ExperimentKind::null_calibration;
    SimConfig config;
    std::vector<double> rhos;      // rho_sweep and ks_sweep
    std::vector<Index> sweep_n;    // ks_sweep
    std::vector<Index> sweep_k;    // ks_sweep
};

// '#' starts a comment; blank lines are ignored; keys may not repeat.
Settings parse_settings(std::istream& in);
Settings load_settings(const std::string& path);

// Every key accepted by job_from_settings, in a fixed order.
const std::vector<std::string>& setting_keys();

// Throws UsageError on unknown keys and malformed values.
SimJob job_from_settings(const Settings& settings);

std::string experiment_name(ExperimentKind kind);

}  // namespace maxsharpe
