#include "maxsharpe/sim_config.hpp"

#include "maxsharpe/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace maxsharpe {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
        throw UsageError("setting '" + key + "': expected a number, got '" + v + "'");
    return x;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw UsageError("setting '" + key + "': expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw UsageError("setting '" + key + "': expected an unsigned integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("setting '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream s(v);
    std::string item;
    while (std::getline(s, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
    if (out.empty()) throw UsageError("setting '" + key + "' is an empty list");
    return out;
}

std::vector<Index> to_indices(const std::string& key, const std::string& v) {
    std::vector<Index> out;
    for (const auto& item : split_list(v)) out.push_back(static_cast<Index>(to_integer(key, item)));
    if (out.empty()) throw UsageError("setting '" + key + "' is an empty list");
    return out;
}

}  // namespace

Settings parse_settings(std::istream& in) {
    Settings settings;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(number) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw UsageError("config line " + std::to_string(number) + ": empty key");
        if (!settings.emplace(key, trim(line.substr(eq + 1))).second)
            throw UsageError("config line " + std::to_string(number) + ": key '" + key + "' repeated");
    }
    return settings;
}

Settings load_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    return parse_settings(in);
}

const std::vector<std::string>& setting_keys() {
    static const std::vector<std::string> keys{
        "experiment", "k",         "n",       "rho",          "rhos",     "sweep_n",     "sweep_k",
        "snr",        "snr_value", "snr_lo",  "snr_hi",       "law",      "df",          "replications",
        "seed",       "methods",   "alpha",   "covariance",   "null_value", "threads",   "retain_p_values",
        "tracked_q",  "snr_bins"};
    return keys;
}

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::null_calibration: return "null_calibration";
        case ExperimentKind::power: return "power";
        case ExperimentKind::rho_sweep: return "rho_sweep";
        case ExperimentKind::ks_sweep: return "ks_sweep";
    }
    return "unknown";
}

SimJob job_from_settings(const Settings& settings) {
    for (const auto& [key, value] : settings) {
        const auto& keys = setting_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw UsageError("unknown setting '" + key + "'");
    }
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = settings.find(key);
        return it == settings.end() ? nullptr : &it->second;
    };

    SimJob job;
    SimConfig& c = job.config;
    if (auto v = get("experiment")) {
        if (*v == "null_calibration") job.kind = ExperimentKind::null_calibration;
        else if (*v == "power") job.kind = ExperimentKind::power;
        else if (*v == "rho_sweep") job.kind = ExperimentKind::rho_sweep;
        else if (*v == "ks_sweep") job.kind = ExperimentKind::ks_sweep;
        else throw UsageError("unknown experiment '" + *v + "'");
    }
    if (auto v = get("k")) c.k = static_cast<Index>(to_integer("k", *v));
    if (auto v = get("n")) c.n = static_cast<Index>(to_integer("n", *v));
    if (auto v = get("rho")) c.rho = to_double("rho", *v);
    if (auto v = get("rhos")) job.rhos = to_doubles("rhos", *v);
    if (auto v = get("sweep_n")) job.sweep_n = to_indices("sweep_n", *v);
    if (auto v = get("sweep_k")) job.sweep_k = to_indices("sweep_k", *v);

    const double snr_value = get("snr_value") ? to_double("snr_value", *get("snr_value")) : 0.0;
    const double snr_lo = get("snr_lo") ? to_double("snr_lo", *get("snr_lo")) : 0.0;
    const double snr_hi = get("snr_hi") ? to_double("snr_hi", *get("snr_hi")) : 0.0;
    if (auto v = get("snr")) {
        if (*v == "zero") c.snr = SnrConfig::zero();
        else if (*v == "all_equal") c.snr = SnrConfig::all_equal(snr_value);
        else if (*v == "one_good") c.snr = SnrConfig::one_good(snr_value);
        else if (*v == "half_good") c.snr = SnrConfig::half_good(snr_value);
        else if (*v == "uniform_range") c.snr = SnrConfig::uniform_range(snr_lo, snr_hi);
        else throw UsageError("unknown snr configuration '" + *v + "'");
    }
    if (auto v = get("law")) {
        if (*v == "gaussian") c.law = ReturnsLaw::gaussian();
        else if (*v == "student_t") c.law = ReturnsLaw::student_t(get("df") ? to_double("df", *get("df")) : 5.0);
        else throw UsageError("unknown returns law '" + *v + "'");
    } else if (get("df")) {
        throw UsageError("setting 'df' needs law=student_t");
    }
    if (auto v = get("replications")) c.replications = static_cast<Index>(to_integer("replications", *v));
    if (auto v = get("seed")) c.seed = to_seed("seed", *v);
    if (auto v = get("methods")) {
        c.methods.clear();
        const auto names = split_list(*v);
        if (names.size() == 1 && names[0] == "all") c.methods = all_methods();
        else
            for (const auto& name : names) c.methods.push_back(parse_method(name));
    }
    if (auto v = get("alpha")) c.alpha = to_double("alpha", *v);
    if (auto v = get("covariance")) {
        if (*v == "infeasible") c.covariance_mode = CovarianceMode::infeasible;
        else if (*v == "feasible_gaussian") c.covariance_mode = CovarianceMode::feasible_gaussian;
        else if (*v == "feasible_elliptical") c.covariance_mode = CovarianceMode::feasible_elliptical;
        else throw UsageError("unknown covariance mode '" + *v + "'");
    }
    if (auto v = get("null_value")) c.null_value = to_double("null_value", *v);
    if (auto v = get("threads")) {
        const long long t = to_integer("threads", *v);
        if (t < 0) throw UsageError("threads must be non-negative");
        c.threads = static_cast<unsigned>(t);
    }
    if (auto v = get("retain_p_values")) c.retain_p_values = to_bool("retain_p_values", *v);
    if (auto v = get("tracked_q")) c.tracked_q = to_doubles("tracked_q", *v);
    if (auto v = get("snr_bins")) c.snr_bins = static_cast<Index>(to_integer("snr_bins", *v));

    if (job.kind == ExperimentKind::rho_sweep && job.rhos.empty())
        throw UsageError("rho_sweep needs a 'rhos' list");
    if (job.kind != ExperimentKind::rho_sweep && job.kind != ExperimentKind::ks_sweep && !job.rhos.empty())
        throw UsageError("'rhos' only applies to rho_sweep and ks_sweep");
    if (job.kind != ExperimentKind::ks_sweep && (!job.sweep_n.empty() || !job.sweep_k.empty()))
        throw UsageError("'sweep_n' and 'sweep_k' only apply to ks_sweep");
    c.validate();
    return job;
}

}  // namespace maxsharpe
