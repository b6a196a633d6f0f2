// Copyright 2026 The qfedsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "error.hpp"
#include "experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace qfed;
namespace fs = std::filesystem;

namespace {

const char *kSmall =
    "qnn.n_qubits = 2\nqnn.n_layers = 1\ndataset.n_samples = 24\nfederation.n_clients = 3\n"
    "train.rounds = 2\ntrain.shots = 20\ntrain.local_steps = 2\ntrain.batch_size = 2\n"
    "theory.verify_repeats = 40\ntheory.verify_circuits = 1\n";

fs::path fresh_dir(const std::string &name) {
    const auto d = fs::temp_directory_path() / "qfed_experiment_test" / name;
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path &p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST(Train, WritesArtifacts) {
    const auto cfg = parse_config_text(kSmall);
    const auto dir = fresh_dir("train");
    const auto r = cmd_train(cfg, dir);
    ASSERT_EQ(r.reports.size(), 2u);
    const auto rows = read_csv(dir / "metrics.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(slurp(dir / "metrics.csv").substr(0, metrics_header().size()), metrics_header());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 7u);
        EXPECT_EQ(std::stoi(rows[i][0]), static_cast<int>(i));
        const double loss = std::stod(rows[i][1]), acc = std::stod(rows[i][2]);
        const double x = std::stod(rows[i][3]);
        EXPECT_GT(loss, 0.0);
        EXPECT_GE(acc, 0.0);
        EXPECT_LE(acc, 1.0);
        EXPECT_GT(x, 0.0);
        EXPECT_LE(x, 1.0);
        EXPECT_EQ(rows[i][6], "0");
    }
    const auto model = parse_model(slurp(dir / "final_model.txt"), cfg.qnn);
    EXPECT_EQ(model, r.final_params);
    const auto resolved = parse_config(dir / "resolved.cfg");
    EXPECT_EQ(render_config(resolved), render_config(cfg));
}

TEST(Train, ByteIdenticalReruns) {
    auto cfg = parse_config_text(kSmall);
    const auto a = fresh_dir("det-a"), b = fresh_dir("det-b"), c = fresh_dir("det-c");
    cmd_train(cfg, a);
    cmd_train(cfg, b);
    cfg.fed.workers = 3;
    cmd_train(cfg, c);
    EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
    EXPECT_EQ(slurp(a / "metrics.csv"), slurp(c / "metrics.csv"));
    EXPECT_EQ(slurp(a / "final_model.txt"), slurp(c / "final_model.txt"));
}

TEST(Train, ZeroRoundsPersistsInitialModel) {
    auto cfg = parse_config_text(std::string(kSmall) + "train.init = uniform\n");
    cfg.rounds = 0;
    const auto dir = fresh_dir("k0");
    const auto r = cmd_train(cfg, dir);
    EXPECT_TRUE(r.reports.empty());
    EXPECT_EQ(parse_model(slurp(dir / "final_model.txt"), cfg.qnn), initial_params(cfg));
    EXPECT_EQ(read_csv(dir / "metrics.csv").size(), 1u);
}

TEST(Train, MissingDatasetLeavesNoModel) {
    const auto cfg = parse_config_text("dataset.source = csv\ndataset.path = /nonexistent/d.csv\n");
    const auto dir = fresh_dir("missing");
    try {
        cmd_train(cfg, dir);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
    EXPECT_FALSE(fs::exists(dir / "final_model.txt"));
}

TEST(Train, CsvDatasetIsReducedAndNormalized) {
    const auto dir = fresh_dir("csv");
    fs::create_directories(dir);
    std::ofstream(dir / "d.csv") << "f0,f1,f2,f3,label\n0,0,1,1,0\n1,1,0,0,1\n0,0.2,1,0.8,0\n1,0.9,0,0.1,1\n";
    const auto cfg = parse_config_text("dataset.source = csv\ndataset.path = " +
                                       (dir / "d.csv").string() +
                                       "\nqnn.n_qubits = 2\nfederation.n_clients = 2\n");
    const auto d = load_experiment_data(cfg);
    EXPECT_EQ(d.n_features, 2);
    EXPECT_NEAR(d.row(0)[0], 0.0, 1e-12);
    EXPECT_NEAR(d.row(0)[1], std::numbers::pi, 1e-12);
    EXPECT_NEAR(d.row(2)[0], 0.1 * std::numbers::pi, 1e-12);
}

TEST(Model, HashGuardsShape) {
    const QnnSpec a{4, 2, 2}, b{4, 3, 2};
    EXPECT_NE(spec_hash(a), spec_hash(b));
    const auto text = format_model(a, ModelParams::zeros(a));
    EXPECT_THROW(parse_model(text, b), Error);
    EXPECT_EQ(text.substr(0, 10), "spec_hash ");
}

TEST(Compare, NeedsTwoMethods) {
    const auto cfg = parse_config_text(kSmall);
    try {
        cmd_compare(cfg, {Method::Qfl}, fresh_dir("cmp1"));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Usage);
    }
}

TEST(Compare, SummaryShape) {
    auto cfg = parse_config_text(kSmall);
    cfg.compare_seeds = 2;
    const auto dir = fresh_dir("cmp");
    const auto r = cmd_compare(cfg, {Method::Spqfl, Method::Qfl}, dir);
    ASSERT_EQ(r.methods.size(), 2u);
    EXPECT_EQ(r.runs.size(), 4u);
    EXPECT_EQ(r.baseline, Method::Qfl);
    EXPECT_EQ(r.methods[1].delta_acc, 0.0);
    EXPECT_DOUBLE_EQ(r.methods[0].delta_acc, r.methods[0].mean_final_acc - r.methods[1].mean_final_acc);
    const auto rows = read_csv(dir / "summary.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].back(), "delta_acc_vs_qfl");
    EXPECT_TRUE(rows[1].back()[0] == '+' || rows[1].back()[0] == '-');
    EXPECT_TRUE(fs::exists(dir / "metrics_spqfl_seed1.csv"));
    EXPECT_TRUE(fs::exists(dir / "metrics_qfl_seed2.csv"));
    for (const auto &run : r.runs) {
        EXPECT_GE(run.rounds_to_threshold, 1);
        EXPECT_LE(run.rounds_to_threshold, cfg.rounds + 1);
    }
}

TEST(Sweep, RejectsDuplicatesAndSorts) {
    const auto cfg = parse_config_text(kSmall);
    EXPECT_THROW(cmd_sweep_shots(cfg, {10, 5, 10}, fresh_dir("dup")), Error);
    EXPECT_THROW(cmd_sweep_shots(cfg, {}, fresh_dir("none")), Error);
    const auto dir = fresh_dir("sweep");
    const auto r = cmd_sweep_shots(cfg, {40, 1, 100}, dir);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_EQ(r.rows[0].shots, 1);
    EXPECT_EQ(r.rows[2].shots, 100);
    for (int m : {1, 40, 100}) EXPECT_TRUE(fs::exists(dir / ("loss_M" + std::to_string(m) + ".csv")));
    const auto rows = read_csv(dir / "shots_summary.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[1][0], "1");
    EXPECT_EQ(rows[3][0], "100");
}

TEST(VerifyBounds, SmallGridPasses) {
    const auto cfg = parse_config_text(kSmall);
    const auto dir = fresh_dir("verify");
    const auto r = cmd_verify_bounds(cfg, dir);
    EXPECT_TRUE(r.all_pass) << r.table;
    EXPECT_NE(r.table.find("nu = 1"), std::string::npos);
    EXPECT_NE(r.table.find("Tr(H^2) = 2"), std::string::npos);
    EXPECT_NE(r.table.find("exact-mode variance"), std::string::npos);
    const auto rows = read_csv(dir / "bounds.csv");
    EXPECT_EQ(rows.size(), r.checks.size() + 1);
}

TEST(Csv, FieldQuoting) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}
