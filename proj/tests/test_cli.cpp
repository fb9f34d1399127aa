#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "eel");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = eel::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> records(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("eel_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
        three_ = write("three.csv", "# x\n1\n2\n4\n");
        bad_ = write("bad.csv", "1\n2\nabc\n");
        std::string reg = "# y,1,x\n";
        for (int i = 0; i < 15; ++i) {
            const double x = 2.0 * i;
            reg += std::to_string(1.0 + 2.0 * x + ((i * 7) % 5 - 2) * 0.4) + ",1," + std::to_string(x) + "\n";
        }
        reg_ = write("reg.csv", reg);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    fs::path dir_;
    std::string three_, bad_, reg_;
};

}  // namespace

TEST_F(Cli, EvalMachineRecord) {
    const Outcome o = invoke({"eval", "--data", three_, "--model", "mean", "--theta", "2", "--machine"});
    ASSERT_EQ(o.code, 0) << o.err;
    auto kv = records(o.out);
    EXPECT_NEAR(std::stod(kv["oel"]), 2.0 * std::log(1.125), 1e-9);
    EXPECT_NEAR(std::stod(kv["theta_tilde"]), 7.0 / 3.0, 1e-12);
    EXPECT_EQ(kv["in_domain"], "true");
    EXPECT_TRUE(kv.count("eel1") && kv.count("eel2") && kv.count("bel") && kv.count("bartlett_b"));
    EXPECT_TRUE(kv.count("preimage"));
    EXPECT_LE(std::stod(kv["eel1"]), std::stod(kv["oel"]));
}

TEST_F(Cli, EvalAtEstimateIsZero) {
    const Outcome o = invoke({"eval", "--data", three_, "--model", "mean", "--theta", "2.3333333333333335",
                              "--machine"});
    ASSERT_EQ(o.code, 0) << o.err;
    auto kv = records(o.out);
    for (const char* key : {"oel", "eel1", "eel2", "bel"}) EXPECT_NEAR(std::stod(kv[key]), 0.0, 1e-12) << key;
}

TEST_F(Cli, EvalOutsideDomain) {
    const Outcome o = invoke({"eval", "--data", three_, "--model", "mean", "--theta", "10", "--machine"});
    ASSERT_EQ(o.code, 0) << o.err;
    auto kv = records(o.out);
    EXPECT_EQ(kv["oel"], "inf");
    EXPECT_EQ(kv["in_domain"], "false");
    EXPECT_NE(kv["eel1"], "inf");
    EXPECT_TRUE(std::isfinite(std::stod(kv["eel1"])));
}

TEST_F(Cli, HumanOutputUsesSixDigits) {
    const Outcome o = invoke({"eval", "--data", three_, "--model", "mean", "--theta", "2", "--methods", "oel"});
    ASSERT_EQ(o.code, 0);
    EXPECT_NE(o.out.find("0.235566\n"), std::string::npos);
    EXPECT_EQ(o.out.find("eel1"), std::string::npos);
}

TEST_F(Cli, RegionExitCodes) {
    EXPECT_EQ(invoke({"region", "--data", three_, "--model", "mean", "--theta", "2"}).code, 0);
    EXPECT_EQ(invoke({"region", "--data", three_, "--model", "mean", "--theta", "2.3333333333333335",
                      "--method", "bel", "--level", "0.5"})
                  .code,
              0);
    EXPECT_EQ(invoke({"region", "--data", three_, "--model", "mean", "--theta", "10"}).code, 1);
    const Outcome e = invoke({"region", "--data", three_, "--model", "mean", "--theta", "10", "--method", "eel1"});
    EXPECT_TRUE(e.code == 0 || e.code == 1);
}

TEST_F(Cli, ErrorsAreOneLineWithCode) {
    const Outcome parse = invoke({"eval", "--data", bad_, "--model", "mean", "--theta", "1"});
    EXPECT_EQ(parse.code, 2);
    EXPECT_EQ(parse.err.rfind("error code=parse_error", 0), 0u) << parse.err;
    EXPECT_NE(parse.err.find("line 3"), std::string::npos) << parse.err;
    EXPECT_EQ(std::count(parse.err.begin(), parse.err.end(), '\n'), 1);

    const Outcome dim = invoke({"eval", "--data", reg_, "--model", "model1", "--theta", "1"});
    EXPECT_EQ(dim.code, 2);
    EXPECT_NE(dim.err.find("code=dimension_mismatch"), std::string::npos);
    EXPECT_NE(dim.err.find("--theta"), std::string::npos);

    const Outcome unknown = invoke({"eval", "--data", three_, "--model", "mean", "--theta", "1", "--bogus"});
    EXPECT_EQ(unknown.code, 2);
    EXPECT_NE(unknown.err.find("code=usage"), std::string::npos);

    const Outcome foreign = invoke({"eval", "--data", three_, "--model", "mean", "--theta", "1", "--reps", "3"});
    EXPECT_EQ(foreign.code, 2);

    const Outcome missing = invoke({"eval", "--data", (dir_ / "none.csv").string(), "--model", "mean", "--theta", "1"});
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("code=io_error"), std::string::npos);

    const Outcome model = invoke({"eval", "--data", three_, "--model", "nope", "--theta", "1"});
    EXPECT_EQ(model.code, 2);
    EXPECT_NE(model.err.find("code=invalid_argument"), std::string::npos);

    EXPECT_EQ(invoke({}).code, 2);
}

TEST_F(Cli, ContourWritesGrid) {
    const std::string out = (dir_ / "grid.csv").string();
    const Outcome o = invoke({"contour", "--data", reg_, "--model", "model1", "--lower", "0,1.9", "--upper",
                              "2,2.1", "--resolution", "4,3", "--methods", "oel,eel1", "--output", out});
    ASSERT_EQ(o.code, 0) << o.err;
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "theta_0,theta_1,oel,eel1");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 12);

    const Outcome bad = invoke({"contour", "--data", reg_, "--model", "model1", "--lower", "0", "--upper", "2,2"});
    EXPECT_EQ(bad.code, 2);
    const Outcome axes = invoke({"contour", "--data", reg_, "--model", "model1", "--lower", "0,1", "--upper",
                                 "2,2", "--axes", "0,5"});
    EXPECT_EQ(axes.code, 2);
    EXPECT_NE(axes.err.find("invalid_argument"), std::string::npos);
}

TEST_F(Cli, CoverageSingleReplicateAndWorkers) {
    const Outcome one = invoke({"coverage", "--model", "model1", "--n", "10", "--reps", "1", "--machine"});
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_NE(one.out.find(",0\n"), std::string::npos);  // std_error = 0

    const std::vector<std::string> base = {"coverage", "--model", "model2", "--n", "10,12", "--reps", "30",
                                           "--seed", "5"};
    auto with = [&](const char* w) {
        auto a = base;
        a.insert(a.end(), {"--workers", w});
        return invoke(a).out;
    };
    const std::string a = with("1");
    EXPECT_EQ(a, with("3"));
    EXPECT_EQ(a, with("1"));
    EXPECT_NE(a.find("model2"), std::string::npos);
    EXPECT_NE(a.find("99% level"), std::string::npos);

    EXPECT_EQ(invoke({"coverage", "--model", "mean"}).code, 2);
    EXPECT_EQ(invoke({"coverage", "--levels", "1.2", "--reps", "1"}).code, 2);
}
