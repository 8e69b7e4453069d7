#include "maxsharpe/commands.hpp"
#include "maxsharpe/error.hpp"
#include "maxsharpe/montecarlo.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace maxsharpe;

namespace {

std::string fixture_path() {
    if (const char* env = std::getenv("MAXSHARPE_FIXTURE")) return env;
    return MAXSHARPE_FIXTURE_DEFAULT;
}

// Correlated Gaussian panel with a date column, written to a temporary file.
std::string synthetic_panel(Index k, Index n, const std::string& name) {
    SimConfig c;
    c.k = k;
    c.n = n;
    c.rho = 0.7;
    c.snr = SnrConfig::uniform_range(0.05, 0.2);
    const ReturnsPanel p = sample_returns(c, 0);
    std::vector<std::string> labels;
    for (Index j = 0; j < k; ++j) labels.push_back("ind" + std::to_string(j));
    std::vector<std::string> dates;
    for (Index i = 0; i < n; ++i) dates.push_back(std::to_string(1927 + i / 12) + (i % 12 < 9 ? "0" : "") + std::to_string(i % 12 + 1));
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    write_panel(out, ReturnsPanel(0.05 * p.values(), labels), dates, "");
    return path.string();
}

TestArgs args_for(const std::string& path, std::vector<std::string> methods) {
    TestArgs a;
    a.panel.path = path;
    a.methods = std::move(methods);
    return a;
}

}  // namespace

TEST(CmdTest, SelectsMaximumAndEchoesInputs) {
    const std::string path = synthetic_panel(5, 300, "maxsharpe_cmd_a.csv");
    const RunReport r = cmd_test(args_for(path, {"conditional", "chibar", "naive"}));
    EXPECT_EQ(r.command, "test");
    EXPECT_EQ(r.outcomes.size(), 3u);
    EXPECT_EQ(r.selected_label, r.labels[std::size_t(r.selected_index)]);
    EXPECT_EQ(*std::max_element(r.sharpe.begin(), r.sharpe.end()), r.sharpe[std::size_t(r.selected_index)]);
    EXPECT_EQ(r.input_hash.size(), 16u);
    EXPECT_EQ(r.config.at("rho").at("source"), "median_pairwise");
    EXPECT_EQ(r.n, 300);
    for (const auto& o : r.outcomes) EXPECT_FALSE(o.lower_bound.has_value());
}

TEST(CmdTest, Guards) {
    const std::string path = synthetic_panel(5, 300, "maxsharpe_cmd_b.csv");
    TestArgs a = args_for(path, {"conditional"});
    a.rho = 0.5;
    EXPECT_THROW(cmd_test(a), UsageError);
    EXPECT_THROW(cmd_test(args_for(path, {"magic"})), UsageError);
    EXPECT_THROW(cmd_test(args_for(path, {"chibar", "chibar"})), UsageError);
    const std::string single = synthetic_panel(1, 50, "maxsharpe_cmd_single.csv");
    try {
        cmd_test(args_for(single, {"conditional"}));
        FAIL() << "k = 1 accepted";
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("naive"), std::string::npos);
    }
    EXPECT_NO_THROW(cmd_test(args_for(single, {"naive"})));
    EXPECT_THROW(cmd_test(args_for("/nonexistent/file.csv", {})), DataError);
}

TEST(CmdCi, BoundsIncreaseWithAlpha) {
    const std::string path = synthetic_panel(6, 400, "maxsharpe_cmd_c.csv");
    TestArgs a = args_for(path, {});
    const RunReport r95 = cmd_ci(a);
    a.level = 0.5;
    const RunReport r50 = cmd_ci(a);
    ASSERT_EQ(r95.outcomes.size(), 5u);
    for (std::size_t i = 0; i < r95.outcomes.size(); ++i) {
        ASSERT_TRUE(r95.outcomes[i].lower_bound && r50.outcomes[i].lower_bound);
        EXPECT_GT(*r50.outcomes[i].lower_bound, *r95.outcomes[i].lower_bound) << r95.outcomes[i].method;
        EXPECT_NEAR(r95.outcomes[i].alpha, 0.05, 1e-15);
    }
    // naive is the least conservative of the unconditional bounds
    EXPECT_GT(*r95.outcomes[0].lower_bound, *r95.outcomes[1].lower_bound);
}

TEST(CmdCi, AnnualizeNeedsFrequency) {
    const std::string path = synthetic_panel(3, 100, "maxsharpe_cmd_d.csv");
    TestArgs a = args_for(path, {"naive"});
    a.annualize = true;
    const RunReport r = cmd_ci(a);  // YYYYMM dates: monthly
    ASSERT_TRUE(r.annualization.has_value());
    EXPECT_NEAR(*r.annualization, std::sqrt(12.0), 1e-15);
}

TEST(Fixture, TableSharpes) {
    if (!std::filesystem::exists(fixture_path())) GTEST_SKIP() << "five-industry fixture not present: " << fixture_path();
    const LoadedPanel data = load_panel(PanelFile{fixture_path(), {}, {}});
    EXPECT_EQ(data.panel.n(), 1104);
    EXPECT_EQ(data.panel.k(), 5);
    const MomentEstimates m = estimate_moments(data.panel);
    std::vector<double> z(m.sharpe.data(), m.sharpe.data() + 5);
    std::sort(z.rbegin(), z.rend());
    const std::vector<double> expected{0.193, 0.187, 0.172, 0.170, 0.140};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(z[i], expected[i], 0.001);
}

TEST(Fixture, PublishedBounds) {
    if (!std::filesystem::exists(fixture_path())) GTEST_SKIP() << "five-industry fixture not present: " << fixture_path();
    TestArgs a = args_for(fixture_path(), {"naive", "bonferroni", "bonferroni_fixed", "chibar", "conditional"});
    const RunReport r = cmd_ci(a);
    const std::vector<double> expected{0.143, 0.122, 0.125, 0.141, 0.073};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(*r.outcomes[i].lower_bound, expected[i], 0.002) << r.outcomes[i].method;
    EXPECT_NEAR(r.config.at("rho").at("value").get<double>(), 0.801, 0.0005);
}
