#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "martapprox/commands.hpp"
#include "martapprox/error.hpp"
#include "martapprox/io.hpp"

using namespace martapprox;
using cmd::Json;

namespace {

const std::string kData = MARTAPPROX_TEST_DATA;

Json load(const std::string& name) {
    std::ifstream in(kData + "/" + name);
    return Json::parse(in);
}

cmd::RunConfig config(std::string command, Json knobs = Json::object()) {
    cmd::RunConfig c;
    c.command = std::move(command);
    c.knobs = std::move(knobs);
    return c;
}

cmd::RunConfig two_state(std::string command, Json knobs = Json::object()) {
    auto c = config(std::move(command), std::move(knobs));
    c.inputs["chain"] = load("two_state_chain.json");
    c.inputs["g"] = load("two_state_g.json");
    return c;
}

cmd::RunConfig with_generator(std::string command, const std::string& gen, Json knobs = Json::object()) {
    auto c = config(std::move(command), std::move(knobs));
    c.inputs["coeffs"] = io::generator_doc(gen);
    return c;
}

ErrorCode code_of(const cmd::RunConfig& c) {
    try {
        cmd::run(c);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::IoError;
}

}  // namespace

TEST(Report, Envelope) {
    const auto r = cmd::run(two_state("chain-diagnose"));
    EXPECT_EQ(r["tool"], "martapprox");
    EXPECT_TRUE(r.contains("format_version"));
    EXPECT_TRUE(r.contains("tool_version"));
    EXPECT_EQ(r["command"], "chain-diagnose");
    EXPECT_EQ(r["config"]["knobs"]["grid"], "dyadic:1:10");
    EXPECT_EQ(r["config"]["knobs"]["margin"], 0.1);
}

TEST(ChainDiagnose, Fixtures) {
    const auto r = cmd::run(two_state("chain-diagnose"))["result"];
    EXPECT_EQ(r["verdict"], "yes");
    EXPECT_NEAR(r["kappa_sq"].get<double>(), 3.0, 1e-12);

    auto iid = config("chain-diagnose");
    iid.inputs["chain"] = load("iid_chain.json");
    iid.inputs["g"] = load("iid_g.json");
    const auto ri = cmd::run(iid)["result"];
    EXPECT_EQ(ri["verdict"], "yes");
    // kappa^2 = ||g||^2 when Qg = 0.
    const auto pi = ri["chain"]["pi"].get<std::vector<double>>();
    const auto g = iid.inputs["g"]["values"].get<std::vector<double>>();
    double mean = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) mean += pi[i] * g[i];
    for (std::size_t i = 0; i < pi.size(); ++i) norm += pi[i] * (g[i] - mean) * (g[i] - mean);
    EXPECT_NEAR(ri["kappa_sq"].get<double>(), norm, 1e-12);

    auto bad = config("chain-diagnose");
    bad.inputs["chain"] = load("bad_row_chain.json");
    bad.inputs["g"] = load("two_state_g.json");
    bad.input_paths["chain"] = "bad_row_chain.json";
    try {
        cmd::run(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonStochasticRow);
        EXPECT_EQ(e.path(), "bad_row_chain.json:Q[1]");
    }
}

TEST(Linear, Fixtures) {
    const auto geo = cmd::run(with_generator("linear", "geometric:0.5"))["result"];
    EXPECT_EQ(geo["verdict"]["exists"], "yes");
    EXPECT_NEAR(geo["verdict"]["kappa_sq"].get<double>(), 4.0, 1e-9);

    const auto ex5 = cmd::run(with_generator("linear", "example5", {{"n_max", 4096}, {"k", 20000}}))["result"];
    EXPECT_EQ(ex5["verdict"]["exists"], "no");

    auto cob = config("linear");
    cob.inputs["coeffs"] = io::generator_doc("custom_array:1,-1");
    const auto rc = cmd::run(cob)["result"];
    EXPECT_EQ(rc["verdict"]["exists"], "yes");
    EXPECT_EQ(rc["verdict"]["kappa_sq"].get<double>(), 0.0);
}

TEST(Superlinear, Fixtures) {
    auto single = config("superlinear", {{"n_max", 16384}});
    single.inputs["coeffs"] = Json{{"columns", {{"0", Json::array({1.0, 0.5, 0.25, 0.125})}}}};
    auto lin = config("linear", {{"n_max", 16384}});
    lin.inputs["coeffs"] = io::generator_doc("custom_array:1,0.5,0.25,0.125");
    const auto s = cmd::run(single)["result"]["verdict"];
    const auto l = cmd::run(lin)["result"]["verdict"];
    EXPECT_EQ(s["exists"], l["exists"]);
    EXPECT_EQ(s["kappa_sq"], l["kappa_sq"]);

    auto ragged = config("superlinear");
    ragged.inputs["coeffs"] = load("ragged.json");
    EXPECT_EQ(code_of(ragged), ErrorCode::RaggedColumns);
}

TEST(Superlinear, Example6) {
    const auto r = cmd::run(with_generator("superlinear", "example6", {{"n_max", 65536}}))["result"];
    EXPECT_EQ(r["verdict"]["exists"], "no");
    EXPECT_NEAR(r["verdict"]["bbar_norm_sq_final"].get<double>(), 1.0, 0.1);
}

TEST(FracPoisson, Fixtures) {
    const auto r = cmd::run(two_state("frac-poisson"))["result"];
    EXPECT_NEAR(r["g"][0].get<double>(), 0.70710678118654752, 1e-9);
    EXPECT_NEAR(r["g"][1].get<double>(), -0.70710678118654752, 1e-9);
    EXPECT_TRUE(r["verify_square_ok"].get<bool>());

    const auto s = cmd::run(with_generator("frac-poisson", "example5", {{"k", 1000}, {"j_max", 100}}))["result"];
    EXPECT_EQ(s["mode"], "sequence");
    EXPECT_EQ(s["c"].size(), 101u);

    EXPECT_EQ(code_of(two_state("frac-poisson", {{"tol", 1e-300}, {"k_max", 10}})), ErrorCode::NoConvergence);
}

TEST(Simulate, SeedMandatory) {
    EXPECT_EQ(code_of(two_state("simulate", {{"n_max", 10}, {"paths", 10}})), ErrorCode::UsageError);
}

TEST(Simulate, TwoState) {
    const auto r = cmd::run(two_state("simulate", {{"seed", 42}, {"paths", 20000}, {"threads", 4}}))["result"];
    EXPECT_LE(r["cclt"]["distance"].get<double>(), 0.05);
    EXPECT_EQ(r["cclt"]["kappa_sq"].get<double>(), 3.0);
}

TEST(Config, Validation) {
    EXPECT_EQ(code_of(config("no-such-command")), ErrorCode::UsageError);
    EXPECT_EQ(code_of(two_state("chain-diagnose", {{"bogus", 1}})), ErrorCode::UsageError);
    EXPECT_EQ(code_of(two_state("chain-diagnose", {{"grid", "dyadic:5:2"}})), ErrorCode::UsageError);
    EXPECT_EQ(code_of(two_state("simulate", {{"seed", 1}, {"paths", 0}})), ErrorCode::UsageError);
    EXPECT_EQ(code_of(two_state("simulate", {{"seed", 1}, {"distance", "hellinger"}})), ErrorCode::UsageError);
    EXPECT_EQ(code_of(config("linear")), ErrorCode::UsageError);
}

TEST(Rerun, BitExact) {
    const auto report = cmd::run(two_state("simulate", {{"seed", 5}, {"paths", 2000}, {"n_max", 100}, {"grid", "dyadic:0:4"}}));
    const auto again = cmd::rerun(Json::parse(cmd::dump(report)));
    EXPECT_TRUE(again["reproduced"].get<bool>());
    EXPECT_EQ(cmd::dump(again["report"]), cmd::dump(report));

    auto tampered = report;
    tampered["result"]["cclt"]["distance"] = 0.5;
    EXPECT_FALSE(cmd::rerun(tampered)["reproduced"].get<bool>());
}

TEST(Dump, RoundTrip) {
    const Json doc = {{"x", 0.1}, {"y", 1.0 / 3.0}, {"z", 1e-300}};
    const auto back = Json::parse(cmd::dump(doc));
    EXPECT_EQ(back["x"].get<double>(), 0.1);
    EXPECT_EQ(back["y"].get<double>(), 1.0 / 3.0);
    EXPECT_EQ(back["z"].get<double>(), 1e-300);
    const Json bad = {{"n", io::number(std::nan(""))}, {"i", io::number(-HUGE_VAL)}, {"f", io::number(2.5)}};
    const auto s = cmd::dump(bad);
    EXPECT_NE(s.find("\"nan\""), std::string::npos);
    EXPECT_NE(s.find("\"-inf\""), std::string::npos);
    EXPECT_EQ(Json::parse(s)["f"].get<double>(), 2.5);
}

TEST(WorkedExamples, Fast) {
    const auto r = cmd::run(config("paper-examples", {{"which", "1"}}))["result"];
    EXPECT_TRUE(r["pass"].get<bool>());
    const auto a = cmd::run(config("paper-examples", {{"which", "ar1"}, {"paths", 20000}}))["result"];
    EXPECT_TRUE(a["pass"].get<bool>());
}

#ifdef MARTAPPROX_CLI_PATH
namespace {

struct Proc {
    int status = 0;
    std::string out;
};

Proc run_cli(const std::string& args) {
    const std::string command = std::string(MARTAPPROX_CLI_PATH) + " " + args + " 2>&1";
    Proc p;
    FILE* f = popen(command.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) p.out.append(buf, n);
    const int st = pclose(f);
    p.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return p;
}

}  // namespace

TEST(Binary, ExitCodes) {
    const auto ok = run_cli("chain-diagnose --chain " + kData + "/two_state_chain.json --g " + kData +
                            "/two_state_g.json");
    EXPECT_EQ(ok.status, 0);
    EXPECT_EQ(Json::parse(ok.out)["result"]["verdict"], "yes");

    const auto usage = run_cli("simulate --chain " + kData + "/two_state_chain.json --g " + kData +
                               "/two_state_g.json");
    EXPECT_EQ(usage.status, 2);
    EXPECT_EQ(Json::parse(usage.out)["error"]["code"], "UsageError");

    const auto bad = run_cli("chain-diagnose --chain " + kData + "/bad_row_chain.json --g " + kData +
                             "/two_state_g.json");
    EXPECT_EQ(bad.status, 1);
    const auto err = Json::parse(bad.out)["error"];
    EXPECT_EQ(err["code"], "NonStochasticRow");
    EXPECT_NE(err["path"].get<std::string>().find("bad_row_chain.json:Q[1]"), std::string::npos);

    EXPECT_EQ(run_cli("linear --coeffs " + kData + "/missing.json").status, 1);
}

TEST(Binary, Rerun) {
    const std::string out = ::testing::TempDir() + "martapprox_report.json";
    const auto first = run_cli("linear --generator geometric:0.5 --n-max 4096 --out " + out);
    ASSERT_EQ(first.status, 0) << first.out;
    const auto again = run_cli("rerun " + out);
    EXPECT_EQ(again.status, 0) << again.out;
    EXPECT_TRUE(Json::parse(again.out)["reproduced"].get<bool>());
    std::remove(out.c_str());
}
#endif
