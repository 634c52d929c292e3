// Copyright 2026 The diqkd-mc Authors
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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "diqkd/cli.hpp"
#include "json.hpp"

namespace diqkd::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path &p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    return line;
}

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("diqkd_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int call(std::vector<std::string> args, std::string *stdout_text = nullptr) {
    args.insert(args.begin(), "diqkd");
    std::vector<const char *> argv;
    for (const auto &a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    if (stdout_text) *stdout_text = out.str();
    return code;
}

int shell(const std::string &args) {
    const std::string cmd = std::string(DIQKD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::vector<std::string> kSmall{"--samples", "4000", "--bins", "40", "--restarts", "4", "--seed", "3"};

std::vector<std::string> small(std::vector<std::string> extra) {
    extra.insert(extra.end(), kSmall.begin(), kSmall.end());
    return extra;
}

TEST(CliConfig, EfficiencyOutOfRangeExitsWithConfigStatus) {
    EXPECT_EQ(shell("--mode keyrate --eta 1.5 --out " + scratch("eta").string()), kExitConfig);
    EXPECT_EQ(call({"--mode", "keyrate", "--eta", "-0.1"}), kExitConfig);
}

TEST(CliConfig, InconsistentSetupsAreRejected) {
    EXPECT_EQ(call({"--mode", "keyrate", "--setup", "custom", "--eta-a", "0.9"}), kExitConfig);
    EXPECT_EQ(call({"--mode", "keyrate", "--setup", "symmetric", "--eta-a", "0.9", "--eta-b", "0.8"}), kExitConfig);
    EXPECT_EQ(call({"--mode", "keyrate", "--setup", "asymmetric", "--eta-a", "0.9"}), kExitConfig);
    EXPECT_EQ(call({"--mode", "threshold", "--setup", "custom", "--eta-a", "1", "--eta-b", "1"}), kExitConfig);
}

TEST(CliConfig, UnknownNamesAndFlags) {
    EXPECT_EQ(call({"--mode", "bogus"}), kExitConfig);
    EXPECT_EQ(call({"--mode", "keyrate", "--inequality", "NOPE", "--out", scratch("nope").string()}), kExitConfig);
    EXPECT_EQ(call({"--mode", "keyrate", "--format", "xml"}), kExitConfig);
    EXPECT_EQ(call({"--mode", "keyrate", "--d-max", "3"}), kExitConfig);
    EXPECT_EQ(call({"--mode", "highdim", "--d-max", "5"}), kExitConfig);
    EXPECT_EQ(call({"--mode", "keyrate", "--bins", "1"}), kExitConfig);
}

TEST(CliConfig, HelpExitsCleanly) {
    std::string text;
    EXPECT_EQ(call({"--help"}, &text), kExitOk);
    EXPECT_NE(text.find("--mode"), std::string::npos);
}

TEST(CliConfig, ParseFillsFields) {
    const char *argv[] = {"diqkd", "--mode", "keyrate", "--setup", "custom", "--eta-a", "0.9", "--eta-b", "0.8",
                          "--samples", "123", "--seed", "9"};
    std::ostringstream out;
    const auto cfg = parse_args(13, argv, out);
    ASSERT_TRUE(cfg);
    EXPECT_EQ(cfg->mode, Mode::kKeyrate);
    EXPECT_EQ(cfg->samples, 123u);
    EXPECT_EQ(cfg->seed, 9u);
    EXPECT_DOUBLE_EQ(cfg->efficiency().eta_a, 0.9);
    EXPECT_DOUBLE_EQ(cfg->efficiency().eta_b, 0.8);
    for (Mode m : {Mode::kCurves, Mode::kKeyrate, Mode::kThreshold, Mode::kQber, Mode::kBb84, Mode::kTable2,
                   Mode::kHighdim})
        EXPECT_EQ(parse_mode(mode_name(m)), m);
}

TEST(CliRun, KeyrateWritesCurvesAndSummary) {
    const fs::path dir = scratch("keyrate");
    std::string text;
    ASSERT_EQ(call(small({"--mode", "keyrate", "--out", dir.string()}), &text), kExitOk);
    EXPECT_NE(text.find("eps_cr"), std::string::npos);
    EXPECT_NE(text.find("runtime:"), std::string::npos);
    EXPECT_EQ(first_line(dir / "ie.csv"), "bin_lo,bin_hi,value,occupied");
    EXPECT_EQ(first_line(dir / "iab.csv"), "bin_lo,bin_hi,value,occupied");
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    for (const char *key : {"inequality", "mode", "eta_a", "eta_b", "samples", "seed", "crossing_q", "crossing_i",
                            "eps_cr", "eta_min", "runtime_s"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["inequality"], "CHSH");
    EXPECT_EQ(j["mode"], "keyrate");
    EXPECT_TRUE(j["runtime_s"].is_null());
    EXPECT_TRUE(j["eps_cr"].is_number());
    EXPECT_GT(j["eps_cr"].get<double>(), 0.0);
}

TEST(CliRun, RecordRuntimeFillsField) {
    const fs::path dir = scratch("runtime");
    ASSERT_EQ(call(small({"--mode", "curves", "--record-runtime", "--out", dir.string()})), kExitOk);
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_TRUE(j["runtime_s"].is_number());
}

TEST(CliRun, QberAndCloudOutputs) {
    const fs::path dir = scratch("qber");
    ASSERT_EQ(call(small({"--mode", "qber", "--out", dir.string()})), kExitOk);
    EXPECT_EQ(first_line(dir / "mutual_cloud.csv"), "q,value,kind");
    const fs::path dir2 = scratch("clouds");
    ASSERT_EQ(call(small({"--mode", "curves", "--clouds", "--out", dir2.string()})), kExitOk);
    EXPECT_TRUE(fs::exists(dir2 / "eaves_cloud.csv"));
    EXPECT_TRUE(fs::exists(dir2 / "mutual_cloud.csv"));
}

TEST(CliRun, JsonFormatSkipsCsv) {
    const fs::path dir = scratch("json");
    ASSERT_EQ(call(small({"--mode", "curves", "--format", "json", "--out", dir.string()})), kExitOk);
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    EXPECT_FALSE(fs::exists(dir / "ie.csv"));
}

TEST(CliRun, ByteIdenticalAcrossRuns) {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    ASSERT_EQ(call(small({"--mode", "keyrate", "--clouds", "--out", a.string()})), kExitOk);
    ASSERT_EQ(call(small({"--mode", "keyrate", "--clouds", "--out", b.string()})), kExitOk);
    for (const char *name : {"ie.csv", "iab.csv", "eaves_cloud.csv", "mutual_cloud.csv", "summary.json"})
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
}

TEST(CliRun, BoundariesIndependentOfThreadCount) {
    const fs::path a = scratch("thr_1");
    const fs::path b = scratch("thr_3");
    ASSERT_EQ(call(small({"--mode", "keyrate", "--threads", "1", "--out", a.string()})), kExitOk);
    ASSERT_EQ(call(small({"--mode", "keyrate", "--threads", "3", "--out", b.string()})), kExitOk);
    for (const char *name : {"ie.csv", "iab.csv", "summary.json"}) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
}

TEST(CliRun, SeedChangesClouds) {
    const fs::path a = scratch("seed_a");
    const fs::path b = scratch("seed_b");
    std::vector<std::string> args{"--mode", "curves", "--samples", "2000", "--bins", "20", "--restarts", "2",
                                  "--clouds"};
    auto with = [&](const std::string &seed, const fs::path &dir) {
        auto v = args;
        v.insert(v.end(), {"--seed", seed, "--out", dir.string()});
        return v;
    };
    ASSERT_EQ(call(with("1", a)), kExitOk);
    ASSERT_EQ(call(with("2", b)), kExitOk);
    EXPECT_NE(slurp(a / "eaves_cloud.csv"), slurp(b / "eaves_cloud.csv"));
}

TEST(CliRun, MissingCrossingExitsWithNumericalStatus) {
    // Detection efficiency too low for any secure bin.
    EXPECT_EQ(call(small({"--mode", "keyrate", "--eta", "0.6", "--out", scratch("loweta").string()})),
              kExitNumerical);
}

TEST(CliRun, HighdimWritesTerms) {
    const fs::path dir = scratch("highdim");
    ASSERT_EQ(call({"--mode", "highdim", "--d-max", "2", "--q", "0.16", "--samples", "4000", "--bins", "40",
                    "--restarts", "3", "--out", dir.string()}),
              kExitOk);
    EXPECT_EQ(first_line(dir / "highdim.csv"), "d,xi,iab,ie,rate");
}

}  // namespace
}  // namespace diqkd::cli
