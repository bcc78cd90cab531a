#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcr/harness.hpp"

using namespace pcr;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST(Csv, RoundTripIsExact) {
    MetricsRows rows{{0, 1, "pcr-td", "train_return", 0.1},
                     {1, 1, "pcr-td", "train_return", 1.0 / 3.0},
                     {2, 18446744073709551615ULL, "td", "td_loss", -1e-300},
                     {3, 0, "td", "td_loss", 12345678.875}};
    const std::string text = format_csv(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,seed,method,metric,value");
    EXPECT_EQ(parse_csv(text), rows);
    EXPECT_EQ(format_csv(parse_csv(text)), text);
}

TEST(Csv, RejectsBadInput) {
    EXPECT_THROW(format_csv({{0, 0, "a,b", "m", 1.0}}), Error);
    EXPECT_THROW(parse_csv("epoch,seed,method,metric,value\n1,2,x\n"), Error);
    EXPECT_THROW(parse_csv("wrong header\n"), Error);
    EXPECT_THROW(parse_csv("epoch,seed,method,metric,value\nx,0,m,k,1\n"), Error);
}

TEST(Stats, MedianMadMeanSe) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
    EXPECT_EQ(median_abs_deviation({1, 2, 3, 4, 100}), 1.0);
    const MeanSe ms = mean_and_se({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(ms.mean, 2.5);
    EXPECT_NEAR(ms.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(mean_and_se({7}).se, 0.0);
}

TEST(Summary, MedianPerEpoch) {
    MetricsRows rows;
    for (std::uint64_t s = 0; s < 3; ++s)
        for (std::size_t e = 0; e < 4; ++e) rows.push_back({e, s, "m", "r", static_cast<double>(e + s)});
    const RunSummary sum = summarize(rows);
    ASSERT_EQ(sum.curves.size(), 4u);
    EXPECT_EQ(sum.curves[2].median, 3.0);
    EXPECT_EQ(sum.curves[2].mad, 1.0);
    EXPECT_EQ(sum.curves[2].count, 3u);
}

TEST(Svg, OnePathPerSeedPlusMedianAndBand) {
    MetricsRows rows;
    for (std::uint64_t s = 0; s < 5; ++s)
        for (std::size_t e = 0; e < 10; ++e) rows.push_back({e, s, "pcr-td", "train_return", 0.1 * e * (s + 1)});
    rows.push_back({0, 0, "td", "train_return", 3.0});
    const std::string svg = render_svg(rows, "pcr-td", "train_return");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_EQ(count(svg, "class=\"seed\""), 5u);
    EXPECT_EQ(count(svg, "class=\"median\""), 1u);
    EXPECT_EQ(count(svg, "class=\"mad\""), 1u);
}

TEST(Outputs, FilesWrittenAndEmptyRejected) {
    const auto dir = scratch("pcr_outputs_test");
    MetricsRows rows;
    for (std::size_t e = 0; e < 3; ++e) rows.push_back({e, 0, "td", "train_return", 1.0 * e});
    rows.push_back({3, 0, "td", "test_mean", 2.0});
    const auto files = emit_outputs(rows, dir.string(), "treasure_3");
    EXPECT_TRUE(std::filesystem::exists(dir / "treasure_3.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "treasure_3_summary.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "treasure_3_td_train_return.svg"));
    EXPECT_FALSE(std::filesystem::exists(dir / "treasure_3_td_test_mean.svg"));
    std::ifstream is(dir / "treasure_3.csv");
    std::stringstream ss;
    ss << is.rdbuf();
    EXPECT_EQ(parse_csv(ss.str()), rows);
    EXPECT_THROW(emit_outputs({}, dir.string(), "x"), Error);
    std::filesystem::remove_all(dir);
}

TEST(Config, DefaultsAndOverrides) {
    const ExperimentConfig c = ExperimentConfig::from_json(nlohmann::json::parse(R"({"task":"tmaze"})"));
    EXPECT_EQ(c.resolved_epochs(), 5000u);
    EXPECT_EQ(c.resolved_epsilon(), 0.5);
    const std::vector<std::string> tm{"pcr-q", "baseline-q"};
    EXPECT_EQ(c.methods(), tm);
    const ExperimentConfig t = ExperimentConfig::from_json(nlohmann::json::parse(R"({"size":5,"method":"td,vi-td"})"));
    EXPECT_EQ(t.resolved_epochs(), 2000u);
    EXPECT_EQ(t.resolved_epsilon(), 0.1);
    EXPECT_EQ(t.methods().size(), 2u);
    const ExperimentConfig back = ExperimentConfig::from_json(t.to_json());
    EXPECT_EQ(back.to_json(), t.to_json());
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"epochz":3})")), Error);
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"size":4})")), Error);
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"method":"pcr-q"})")), Error);
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"seeds":[]})")), Error);
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"epsilon":"high"})")), Error);
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"perturb_gamma":0.1})")), Error);
    EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(TreasureRunner, ZeroEpochsSkipsTraining) {
    ExperimentConfig c;
    c.epochs = 0;
    c.test_trials = 2;
    c.batch = 2;
    const TreasureResult r = run_treasure_method(c, "td", 0);
    for (const auto& row : r.rows) {
        EXPECT_NE(row.metric, "train_return");
    }
    EXPECT_EQ(r.rows.size(), 2u + 4u);
    ASSERT_TRUE(r.checkpoint.has_value());
}

TEST(TreasureRunner, RowsPerEpochAndDeterminism) {
    ExperimentConfig c;
    c.method = "pcr-td,td,vi-td,vi-thompson,vi-greedy";
    c.epochs = 2;
    c.batch = 2;
    c.test_trials = 2;
    c.seeds = {0, 1};
    c.m_samples = 1;
    c.n_bound = 4;
    c.n_lambda = 4;
    const MetricsRows a = run_treasure(c);
    const MetricsRows b = run_treasure(c);
    EXPECT_EQ(format_csv(a), format_csv(b));
    std::size_t train = 0;
    for (const auto& row : a) train += row.metric == "train_return" ? 1 : 0;
    // Three trained methods, two seeds, two epochs.
    EXPECT_EQ(train, 3u * 2u * 2u);
    EXPECT_EQ(a.size(), 2u * (3u * (2u * 2u + 2u + 4u) + 2u * (2u + 4u)));
}

TEST(TreasureRunner, CheckpointsWritten) {
    const auto dir = scratch("pcr_ckpt_test");
    ExperimentConfig c;
    c.method = "td,vi-greedy";
    c.epochs = 1;
    c.batch = 1;
    c.test_trials = 1;
    c.out_dir = dir.string();
    run_treasure(c);
    EXPECT_TRUE(std::filesystem::exists(dir / "td_seed0.ckpt"));
    EXPECT_FALSE(std::filesystem::exists(dir / "vi-greedy_seed0.ckpt"));
    const Checkpoint ck = load_checkpoint((dir / "td_seed0.ckpt").string());
    EXPECT_EQ(ck.meta.at("method"), "td");
    EXPECT_EQ(ck.meta.at("size"), "3");
    std::filesystem::remove_all(dir);
}

TEST(TMazeRunner, RowsForBothMethods) {
    ExperimentConfig c;
    c.task = "tmaze";
    c.epochs = 20;
    c.seeds = {0, 1};
    const MetricsRows rows = run_tmaze(c);
    std::size_t pcr = 0, base = 0;
    for (const auto& r : rows) {
        if (r.metric != "greedy_return") continue;
        pcr += r.method == "pcr-q" ? 1 : 0;
        base += r.method == "baseline-q" ? 1 : 0;
    }
    EXPECT_EQ(pcr, 40u);
    EXPECT_EQ(base, 40u);
}

TEST(Oracles, AllPassAndPerturbationIsCaught) {
    ExperimentConfig c;
    const auto good = run_oracles(c);
    for (const auto& e : good) EXPECT_TRUE(e.pass) << e.name;
    c.perturb_gamma = 0.01;
    std::size_t failed = 0;
    for (const auto& e : run_oracles(c)) failed += e.pass ? 0 : 1;
    EXPECT_GT(failed, 10u);
    EXPECT_NE(format_oracle_report(good).find(std::to_string(good.size()) + "/" + std::to_string(good.size())),
              std::string::npos);
}
