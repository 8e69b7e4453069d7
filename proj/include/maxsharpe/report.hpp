#pragma once

// Serialization of test reports and simulation summaries. JSON objects are
// key-sorted; CSV follows RFC-4180 quoting.

#include "maxsharpe/montecarlo.hpp"
#include "maxsharpe/outcome.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace maxsharpe {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunReport {
    std::string command;  // "test" or "ci"
    std::string tool_version = kToolVersion;
    std::string input_path;
    std::string input_hash;
    nlohmann::json config = nlohmann::json::object();  // echoed settings
    std::vector<std::string> labels;
    std::vector<double> sharpe;  // per period, input order
    Index n = 0;
    Index selected_index = 0;
    std::string selected_label;
    std::optional<double> annualization;  // sqrt(periods per year), display only
    std::vector<TestOutcome> outcomes;
    double elapsed_seconds = 0.0;

    bool operator==(const RunReport&) const = default;
};

nlohmann::json to_json(const TestOutcome& outcome);
TestOutcome outcome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

// Human-readable table: Sharpes in descending order, then one line per method.
void write_report_table(std::ostream& out, const RunReport& report);

nlohmann::json to_json(const SimSummary& summary);

// Long format: method,metric,q,bin_lo,bin_hi,count,value,band_lo,band_hi.
void write_summary_csv(std::ostream& out, const SimSummary& summary);
// method,replication_slot,p_value for each retained p-value.
void write_p_values_csv(std::ostream& out, const SimSummary& summary);
void write_delta_table(std::ostream& out, const SimSummary& summary);
void write_rho_sweep_csv(std::ostream& out, const std::vector<RhoSweepRow>& rows);
void write_ks_sweep_csv(std::ostream& out, const std::vector<KsRow>& rows);

}  // namespace maxsharpe
