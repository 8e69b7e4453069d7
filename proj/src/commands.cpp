#include "maxsharpe/commands.hpp"

#include "maxsharpe/error.hpp"
#include "maxsharpe/montecarlo.hpp"
#include "maxsharpe/selective.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace maxsharpe {

namespace {

using nlohmann::json;

const std::vector<std::string> kTestDefault{"conditional"};
const std::vector<std::string> kCiDefault{"naive", "bonferroni", "bonferroni_fixed", "chibar", "conditional"};

bool uses_rho(const std::string& m) {
    return m == "bonferroni_fixed" || m == "chibar" || m == "follman" || m == "hansen_chibar" || m == "hansen_spa";
}

std::string rho_source_name(RhoSource s) {
    switch (s) {
        case RhoSource::supplied: return "supplied";
        case RhoSource::mean_selected_vs_rest: return "mean_selected_vs_rest";
        case RhoSource::median_pairwise: return "median_pairwise";
    }
    return "unknown";
}

// Everything the individual methods need, computed once.
struct Prepared {
    MomentEstimates moments;
    Index selected = 0;
    std::optional<RhoEstimate> rho;
    std::optional<SharpeCovariance> q;
    std::optional<SelectionEvent> event;
    std::vector<std::string> methods;
};

Prepared prepare(const LoadedPanel& data, const TestArgs& args, const std::vector<std::string>& defaults) {
    Prepared p;
    p.methods = args.methods.empty() ? defaults : args.methods;
    const auto& known = cli_method_names();
    for (const auto& m : p.methods) {
        if (std::find(known.begin(), known.end(), m) == known.end()) throw UsageError("unknown method '" + m + "'");
        if (std::count(p.methods.begin(), p.methods.end(), m) > 1) throw UsageError("method '" + m + "' listed twice");
    }
    if (!(args.alpha > 0.0 && args.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    if (!std::isfinite(args.null_value)) throw UsageError("--null-value must be finite");
    const bool wants_conditional = std::find(p.methods.begin(), p.methods.end(), "conditional") != p.methods.end();
    const bool wants_slepian = std::find(p.methods.begin(), p.methods.end(), "bonferroni_slepian") != p.methods.end();
    if (args.rho && wants_conditional)
        throw UsageError("--rho cannot be combined with the conditional method, which uses the full covariance");
    if (args.rho && wants_slepian)
        throw UsageError("--rho cannot be combined with bonferroni_slepian, which uses the full correlation matrix");
    if (args.rfr && data.rfr) throw UsageError("give either a constant --rfr or a risk-free column, not both");
    if (args.rfr && !std::isfinite(*args.rfr)) throw UsageError("--rfr must be finite");

    const ReturnsPanel panel = data.excess();
    const Index k = panel.k();
    if (k < 2) {
        for (const auto& m : p.methods)
            if (m != "naive" && m != "bonferroni")
                throw UsageError("method '" + m + "' needs at least 2 assets: with a single asset there is no "
                                 "selection to condition on; use the unconditional test (--method naive)");
    }
    p.moments = estimate_moments(panel, args.rfr.value_or(0.0));
    p.selected = argmax_lowest(p.moments.sharpe);

    if (std::any_of(p.methods.begin(), p.methods.end(), uses_rho)) {
        if (args.rho) {
            check_rho_range(*args.rho, k);
            p.rho = RhoEstimate{*args.rho, RhoSource::supplied, false};
        } else {
            p.rho = estimate_rho(p.moments, p.selected, RhoSource::median_pairwise);
        }
    }
    if (wants_conditional) {
        p.q = args.flavor == CovarianceFlavor::gaussian
                  ? sharpe_covariance_gaussian(p.moments.corr, p.moments.sharpe, panel.n())
                  : sharpe_covariance_elliptical(p.moments.corr, p.moments.sharpe, estimate_kurtosis_factor(panel),
                                                 panel.n());
        p.event = select_max(p.moments.sharpe);
    }
    return p;
}

TestOutcome run_one(const std::string& m, const Prepared& p, double c0, double alpha) {
    const Eigen::VectorXd& z = p.moments.sharpe;
    const Index n = p.moments.n;
    const double rho = p.rho ? p.rho->rho : 0.0;
    TestOutcome out;
    if (m == "conditional") out = conditional_pvalue(*p.event, z, *p.q, c0, alpha);
    else if (m == "naive") out = bonferroni_naive(z[p.selected], n, 1, c0, alpha);
    else if (m == "bonferroni") out = bonferroni_naive(z[p.selected], n, z.size(), c0, alpha);
    else if (m == "bonferroni_fixed") out = bonferroni_rho_fixed(z, n, rho, c0, alpha);
    else if (m == "bonferroni_slepian") out = bonferroni_slepian(z, n, p.moments.corr, c0, alpha);
    else if (m == "chibar") out = chi_bar_square_test(z, n, rho, c0, alpha);
    else if (m == "follman") out = follman_test(z, n, rho, c0, alpha);
    else if (m == "hansen_chibar") out = hansen_chi_bar_square(z, n, rho, c0, alpha);
    else if (m == "hansen_spa") out = hansen_spa(z, n, rho, c0, alpha);
    else throw UsageError("unknown method '" + m + "'");
    out.method = m;
    return out;
}

double lower_bound(const std::string& m, const Prepared& p, double alpha) {
    if (m == "conditional") return conditional_lower_bound(*p.event, p.moments.sharpe, *p.q, alpha);
    const NullTest test = [&](double c0) { return run_one(m, p, c0, alpha); };
    const double center = p.moments.sharpe[p.selected];
    return invert_to_lower_bound(test, center, 1.0 / std::sqrt(static_cast<double>(p.moments.n)));
}

RunReport base_report(const LoadedPanel& data, const TestArgs& args, const Prepared& p, const std::string& command) {
    RunReport r;
    r.command = command;
    r.input_path = args.panel.path;
    if (!args.panel.path.empty()) r.input_hash = file_hash(args.panel.path);
    r.labels = data.panel.labels();
    r.sharpe.assign(p.moments.sharpe.data(), p.moments.sharpe.data() + p.moments.sharpe.size());
    r.n = p.moments.n;
    r.selected_index = p.selected;
    r.selected_label = r.labels[static_cast<std::size_t>(p.selected)];
    if (args.annualize) {
        const double periods = args.periods_per_year.value_or(data.panel.periods_per_year());
        if (!(periods > 0.0))
            throw UsageError("--annualize needs --periods-per-year (the date column does not determine it)");
        r.annualization = std::sqrt(periods);
    }
    json& c = r.config;
    c["methods"] = p.methods;
    c["alpha"] = args.alpha;
    c["null_value"] = args.null_value;
    c["flavor"] = args.flavor == CovarianceFlavor::gaussian ? "gaussian" : "elliptical";
    c["rfr"] = args.rfr ? json(*args.rfr) : json(nullptr);
    c["rfr_column"] = args.panel.rfr_column ? json(*args.panel.rfr_column) : json(nullptr);
    if (p.rho) c["rho"] = {{"value", p.rho->rho}, {"source", rho_source_name(p.rho->source)}, {"clamped", p.rho->clamped}};
    else c["rho"] = nullptr;
    if (p.q) c["kurtosis_factor"] = p.q->kurtosis_factor;
    if (command == "ci") c["level"] = args.level;
    return r;
}

RunReport run(const LoadedPanel& data, const TestArgs& args, bool with_bounds) {
    const auto start = std::chrono::steady_clock::now();
    TestArgs effective = args;
    if (with_bounds) {
        if (!(args.level > 0.0 && args.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
        effective.alpha = 1.0 - args.level;
    }
    const Prepared p = prepare(data, effective, with_bounds ? kCiDefault : kTestDefault);
    RunReport r = base_report(data, effective, p, with_bounds ? "ci" : "test");
    for (const auto& m : p.methods) {
        TestOutcome o = run_one(m, p, effective.null_value, effective.alpha);
        if (with_bounds) o.lower_bound = lower_bound(m, p, effective.alpha);
        if (p.rho && p.rho->clamped && uses_rho(m)) o.warnings.push_back("rho estimate was clamped into the valid range");
        r.outcomes.push_back(std::move(o));
    }
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

const std::vector<std::string>& cli_method_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v{"naive"};
        for (Method m : all_methods()) v.emplace_back(method_name(m));
        return v;
    }();
    return names;
}

RunReport run_test(const LoadedPanel& data, const TestArgs& args) { return run(data, args, false); }
RunReport run_ci(const LoadedPanel& data, const TestArgs& args) { return run(data, args, true); }
RunReport cmd_test(const TestArgs& args) { return run_test(load_panel(args.panel), args); }
RunReport cmd_ci(const TestArgs& args) { return run_ci(load_panel(args.panel), args); }

}  // namespace maxsharpe
