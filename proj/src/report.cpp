#include "maxsharpe/report.hpp"

#include "maxsharpe/error.hpp"
#include "maxsharpe/panel_io.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace maxsharpe {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::string covariance_mode_name(CovarianceMode mode) {
    switch (mode) {
        case CovarianceMode::infeasible: return "infeasible";
        case CovarianceMode::feasible_gaussian: return "feasible_gaussian";
        case CovarianceMode::feasible_elliptical: return "feasible_elliptical";
    }
    return "unknown";
}

std::string snr_kind_name(SnrConfig::Kind kind) {
    switch (kind) {
        case SnrConfig::Kind::uniform_range: return "uniform_range";
        case SnrConfig::Kind::all_equal: return "all_equal";
        case SnrConfig::Kind::one_good: return "one_good";
        case SnrConfig::Kind::half_good: return "half_good";
        case SnrConfig::Kind::zero: return "zero";
    }
    return "unknown";
}

// CSV number: empty for "not applicable".
std::string num(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

}  // namespace

json to_json(const TestOutcome& o) {
    return json{{"method", o.method},   {"statistic", o.statistic}, {"p_value", o.p_value},
                {"reject", o.reject},   {"alpha", o.alpha},         {"lower_bound", optional_number(o.lower_bound)},
                {"warnings", o.warnings}};
}

TestOutcome outcome_from_json(const json& j) {
    TestOutcome o;
    o.method = j.at("method").get<std::string>();
    o.statistic = j.at("statistic").get<double>();
    o.p_value = j.at("p_value").get<double>();
    o.reject = j.at("reject").get<bool>();
    o.alpha = j.at("alpha").get<double>();
    o.lower_bound = optional_from(j.at("lower_bound"));
    o.warnings = j.at("warnings").get<std::vector<std::string>>();
    return o;
}

json to_json(const RunReport& r) {
    json outcomes = json::array();
    for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
    return json{{"command", r.command},
                {"tool_version", r.tool_version},
                {"input", {{"path", r.input_path}, {"hash", r.input_hash}, {"n", r.n}, {"labels", r.labels}}},
                {"config", r.config},
                {"sharpe", r.sharpe},
                {"selected", {{"index", r.selected_index}, {"label", r.selected_label}}},
                {"annualization", optional_number(r.annualization)},
                {"outcomes", outcomes},
                {"timing", {{"elapsed_seconds", r.elapsed_seconds}}}};
}

RunReport report_from_json(const json& j) {
    try {
        RunReport r;
        r.command = j.at("command").get<std::string>();
        r.tool_version = j.at("tool_version").get<std::string>();
        const json& input = j.at("input");
        r.input_path = input.at("path").get<std::string>();
        r.input_hash = input.at("hash").get<std::string>();
        r.n = input.at("n").get<Index>();
        r.labels = input.at("labels").get<std::vector<std::string>>();
        r.config = j.at("config");
        r.sharpe = j.at("sharpe").get<std::vector<double>>();
        r.selected_index = j.at("selected").at("index").get<Index>();
        r.selected_label = j.at("selected").at("label").get<std::string>();
        r.annualization = optional_from(j.at("annualization"));
        for (const auto& o : j.at("outcomes")) r.outcomes.push_back(outcome_from_json(o));
        r.elapsed_seconds = j.at("timing").at("elapsed_seconds").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

void write_report_table(std::ostream& out, const RunReport& r) {
    const double scale = r.annualization.value_or(1.0);
    std::vector<std::size_t> order(r.sharpe.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.sharpe[a] > r.sharpe[b]; });
    std::size_t width = 6;
    for (const auto& l : r.labels) width = std::max(width, l.size() + 2);

    out << pad("asset", width) << "sharpe" << (r.annualization ? " (annualized)" : "") << '\n';
    for (std::size_t i : order) out << pad(r.labels[i], width) << fixed(scale * r.sharpe[i], 3) << '\n';
    out << "\nselected: " << r.selected_label << " (n = " << r.n << ")\n\n";
    out << pad("method", 20) << pad("statistic", 12) << pad("p_value", 12) << pad("reject", 8) << "lower_bound\n";
    for (const auto& o : r.outcomes) {
        out << pad(o.method, 20) << pad(fixed(o.statistic, 4), 12) << pad(fixed(o.p_value, 4), 12)
            << pad(o.reject ? "yes" : "no", 8) << (o.lower_bound ? fixed(scale * *o.lower_bound, 3) : "-") << '\n';
        for (const auto& w : o.warnings) out << "  warning: " << w << '\n';
    }
}

json to_json(const SimSummary& s) {
    const SimConfig& c = s.config;
    json methods = json::array();
    for (Method m : c.methods) methods.push_back(std::string(method_name(m)));
    json config{{"k", c.k},
                {"n", c.n},
                {"rho", c.rho},
                {"snr", {{"kind", snr_kind_name(c.snr.kind)}, {"lo", c.snr.lo}, {"hi", c.snr.hi}, {"value", c.snr.value}}},
                {"law", c.law.kind == ReturnsLaw::Kind::gaussian ? "gaussian" : "student_t"},
                {"df", c.law.df},
                {"replications", c.replications},
                {"seed", c.seed},
                {"methods", methods},
                {"alpha", c.alpha},
                {"covariance", covariance_mode_name(c.covariance_mode)},
                {"null_value", c.null_value},
                {"tracked_q", c.tracked_q},
                {"snr_bins", c.snr_bins}};
    json per_method = json::array();
    for (const MethodSummary& m : s.methods) {
        json delta = json::array();
        for (const DeltaPoint& d : m.delta_curve)
            delta.push_back({{"q", d.q}, {"delta", d.delta}, {"band_lo", d.band_lo}, {"band_hi", d.band_hi},
                             {"inside_band", d.inside_band()}});
        json bins = json::array();
        for (const PowerBin& b : m.power_by_selected_snr)
            bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"rejections", b.rejections},
                            {"rate", b.rate}, {"low_confidence", b.low_confidence}});
        per_method.push_back({{"method", std::string(method_name(m.method))},
                              {"evaluated", m.evaluated},
                              {"rejections", m.rejections},
                              {"failures", m.failures},
                              {"rejection_rate", m.rejection_rate},
                              {"ks_statistic", m.ks_statistic},
                              {"delta_curve", delta},
                              {"power_by_selected_snr", bins}});
    }
    return json{{"config", config},
                {"replications", s.replications},
                {"replication_failures", s.replication_failures},
                {"bad_selection_count", s.bad_selection_count},
                {"failure_messages", s.failure_messages},
                {"methods", per_method}};
}

void write_summary_csv(std::ostream& out, const SimSummary& s) {
    out << "method,metric,q,bin_lo,bin_hi,count,value,band_lo,band_hi\n";
    auto row = [&](const MethodSummary& m, const std::string& metric, std::optional<double> q, std::optional<double> lo,
                   std::optional<double> hi, std::optional<Index> count, double value, std::optional<double> band_lo,
                   std::optional<double> band_hi) {
        out << csv_field(method_name(m.method)) << ',' << metric << ',' << num(q) << ',' << num(lo) << ',' << num(hi)
            << ',' << (count ? std::to_string(*count) : std::string()) << ',' << format_double(value) << ','
            << num(band_lo) << ',' << num(band_hi) << '\n';
    };
    for (const MethodSummary& m : s.methods) {
        row(m, "evaluated", {}, {}, {}, {}, static_cast<double>(m.evaluated), {}, {});
        row(m, "failures", {}, {}, {}, {}, static_cast<double>(m.failures), {}, {});
        row(m, "rejection_rate", s.config.alpha, {}, {}, m.evaluated, m.rejection_rate, {}, {});
        row(m, "ks_statistic", {}, {}, {}, m.evaluated, m.ks_statistic, {}, {});
        for (const DeltaPoint& d : m.delta_curve) row(m, "delta", d.q, {}, {}, m.evaluated, d.delta, d.band_lo, d.band_hi);
        for (const PowerBin& b : m.power_by_selected_snr)
            row(m, b.low_confidence ? "power_bin_low_confidence" : "power_bin", s.config.alpha, b.lo, b.hi, b.count,
                b.rate, {}, {});
    }
}

void write_p_values_csv(std::ostream& out, const SimSummary& s) {
    out << "method,slot,p_value\n";
    for (const MethodSummary& m : s.methods)
        for (std::size_t i = 0; i < m.p_values.size(); ++i)
            out << method_name(m.method) << ',' << i << ',' << format_double(m.p_values[i]) << '\n';
}

void write_delta_table(std::ostream& out, const SimSummary& s) {
    out << pad("method", 20) << pad("q", 8) << pad("delta", 10) << pad("band", 22) << "inside\n";
    for (const MethodSummary& m : s.methods)
        for (const DeltaPoint& d : m.delta_curve)
            out << pad(std::string(method_name(m.method)), 20) << pad(fixed(d.q, 3), 8) << pad(fixed(d.delta, 4), 10)
                << pad("[" + fixed(d.band_lo, 4) + ", " + fixed(d.band_hi, 4) + "]", 22)
                << (d.inside_band() ? "yes" : "no") << '\n';
}

void write_rho_sweep_csv(std::ostream& out, const std::vector<RhoSweepRow>& rows) {
    out << "rho,method,rejection_rate,evaluated\n";
    for (const auto& r : rows)
        out << format_double(r.rho) << ',' << method_name(r.method) << ',' << format_double(r.rejection_rate) << ','
            << r.evaluated << '\n';
}

void write_ks_sweep_csv(std::ostream& out, const std::vector<KsRow>& rows) {
    out << "n,k,rho,method,ks_statistic\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.k << ',' << format_double(r.rho) << ',' << method_name(r.method) << ','
            << format_double(r.ks_statistic) << '\n';
}

}  // namespace maxsharpe
