// maxsharpe: inference on the maximum Sharpe ratio of a returns panel.
//
//   maxsharpe test returns.csv --method conditional,chibar
//   maxsharpe ci returns.csv --level 0.95 --format table
//   maxsharpe simulate --config null.cfg --out results/
//
// Exit status: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include "maxsharpe/commands.hpp"
#include "maxsharpe/error.hpp"
#include "maxsharpe/montecarlo.hpp"
#include "maxsharpe/report.hpp"
#include "maxsharpe/sim_config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace maxsharpe;

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumerical = 4;

struct TestOptions {
    std::string panel;
    std::vector<std::string> methods;
    double alpha = 0.05;
    double null_value = 0.0;
    std::optional<double> rho;
    std::string flavor = "gaussian";
    std::string rfr;
    std::string date_column;
    double level = 0.95;
    bool annualize = false;
    std::optional<double> periods_per_year;
    std::string format = "json";
    std::string out;
};

void add_test_options(CLI::App* cmd, TestOptions& o, bool ci) {
    cmd->add_option("panel", o.panel, "wide CSV of returns, one column per asset")->required();
    cmd->add_option("-m,--method", o.methods, "methods, comma separated")->delimiter(',');
    if (ci) cmd->add_option("--level", o.level, "confidence level of the one-sided bounds");
    else cmd->add_option("--alpha", o.alpha, "test size");
    cmd->add_option("--null-value", o.null_value, "SNR under the null, per sqrt(period)");
    cmd->add_option("--rho", o.rho, "common correlation for rank-one methods (default: median pairwise)");
    cmd->add_option("--flavor", o.flavor, "covariance flavor for the conditional test")
        ->check(CLI::IsMember({"gaussian", "elliptical"}));
    cmd->add_option("--rfr", o.rfr, "constant per-period risk-free rate, or the name of a risk-free column");
    cmd->add_option("--date-column", o.date_column, "name of the date column (detected when omitted)");
    cmd->add_flag("--annualize", o.annualize, "display Sharpes and bounds annualized");
    cmd->add_option("--periods-per-year", o.periods_per_year, "periods per year for --annualize");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "table"}));
    cmd->add_option("--out", o.out, "write the report here instead of stdout");
}

TestArgs to_args(const TestOptions& o) {
    TestArgs a;
    a.panel.path = o.panel;
    if (!o.date_column.empty()) a.panel.date_column = o.date_column;
    if (!o.rfr.empty()) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(o.rfr.data(), o.rfr.data() + o.rfr.size(), v);
        if (ec == std::errc() && ptr == o.rfr.data() + o.rfr.size()) a.rfr = v;
        else a.panel.rfr_column = o.rfr;
    }
    a.methods = o.methods;
    a.alpha = o.alpha;
    a.null_value = o.null_value;
    a.rho = o.rho;
    a.flavor = o.flavor == "elliptical" ? CovarianceFlavor::elliptical : CovarianceFlavor::gaussian;
    a.level = o.level;
    a.annualize = o.annualize;
    a.periods_per_year = o.periods_per_year;
    return a;
}

void emit(const RunReport& report, const TestOptions& o) {
    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) throw DataError("cannot write report to '" + o.out + "'");
    }
    std::ostream& out = o.out.empty() ? std::cout : file;
    if (o.format == "table") write_report_table(out, report);
    else out << to_json(report).dump(2) << '\n';
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void simulate(const std::string& config_path, const std::map<std::string, std::string>& flags, const fs::path& out_dir) {
    Settings settings;
    if (!config_path.empty()) settings = load_settings(config_path);
    if (const char* env = std::getenv("MAXSHARPE_SEED")) settings["seed"] = env;
    for (const auto& [key, value] : flags) settings[key] = value;
    const SimJob job = job_from_settings(settings);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw DataError("cannot create output directory '" + out_dir.string() + "'");

    switch (job.kind) {
        case ExperimentKind::null_calibration:
        case ExperimentKind::power: {
            const SimSummary s = job.kind == ExperimentKind::power ? run_power_study(job.config)
                                                                  : run_null_calibration(job.config);
            auto csv = open_output(out_dir / "summary.csv");
            write_summary_csv(csv, s);
            auto js = open_output(out_dir / "summary.json");
            js << to_json(s).dump(2) << '\n';
            if (job.config.retain_p_values) {
                auto pv = open_output(out_dir / "p_values.csv");
                write_p_values_csv(pv, s);
            }
            write_delta_table(std::cout, s);
            break;
        }
        case ExperimentKind::rho_sweep: {
            const auto rows = run_rho_sweep(job.config, job.rhos);
            auto csv = open_output(out_dir / "rho_sweep.csv");
            write_rho_sweep_csv(csv, rows);
            write_rho_sweep_csv(std::cout, rows);
            break;
        }
        case ExperimentKind::ks_sweep: {
            std::vector<SimConfig> grid;
            const std::vector<Index> ns = job.sweep_n.empty() ? std::vector<Index>{job.config.n} : job.sweep_n;
            const std::vector<Index> ks = job.sweep_k.empty() ? std::vector<Index>{job.config.k} : job.sweep_k;
            const std::vector<double> rhos = job.rhos.empty() ? std::vector<double>{job.config.rho} : job.rhos;
            for (Index n : ns)
                for (Index k : ks)
                    for (double rho : rhos) {
                        SimConfig c = job.config;
                        c.n = n;
                        c.k = k;
                        c.rho = rho;
                        grid.push_back(c);
                    }
            const auto rows = run_ks_sweep(grid);
            auto csv = open_output(out_dir / "ks_sweep.csv");
            write_ks_sweep_csv(csv, rows);
            write_ks_sweep_csv(std::cout, rows);
            break;
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inference on the maximum Sharpe ratio"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    TestOptions test_opts;
    TestOptions ci_opts;
    add_test_options(app.add_subcommand("test", "test the selected (maximum Sharpe) asset"), test_opts, false);
    add_test_options(app.add_subcommand("ci", "one-sided lower confidence bounds on the selected SNR"), ci_opts, true);

    auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    std::string config_path;
    std::string out_dir;
    sim->add_option("--config", config_path, "key=value experiment file")->check(CLI::ExistingFile);
    sim->add_option("--out", out_dir, "output directory")->required();
    std::map<std::string, std::string> sim_values;
    for (const auto& key : setting_keys()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        sim->add_option_function<std::string>("--" + flag, [&sim_values, key](const std::string& v) { sim_values[key] = v; },
                                              "overrides '" + key + "' from the config file");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (app.got_subcommand("test")) emit(cmd_test(to_args(test_opts)), test_opts);
        else if (app.got_subcommand("ci")) emit(cmd_ci(to_args(ci_opts)), ci_opts);
        else simulate(config_path, sim_values, out_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case ErrorKind::usage: return kUsage;
            case ErrorKind::data: return kData;
            case ErrorKind::numerical: return kNumerical;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return 0;
}
