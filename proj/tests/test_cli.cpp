#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = critjac::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"classify", "--alpha", "abc"}).code == 2);
    CHECK(run({"verify", "--n-max", "many"}).code == 2);

    auto r = run({"classify", "--alpha", "0.5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("alpha out of (2/3,1)") != std::string::npos);

    CHECK(run({"classify", "--b", "0"}).code == 2);
    CHECK(run({"verify", "--lambda", "-1"}).code == 2);
    CHECK(run({"verify", "--lambda", "0"}).code == 2);
    CHECK(run({"scan", "--alpha", "0.7:0.9"}).code == 2);
    CHECK(run({"scan", "--alpha", "0.7:0.9:0"}).code == 2);
    CHECK(run({"scan", "--workers", "0"}).code == 2);
    CHECK(run({"levinson"}).code == 2);
}

TEST_CASE("help exits 0") {
    auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("verify") != std::string::npos);
}

TEST_CASE("classify reports the regime, limit and ansatz") {
    auto r = run({"classify"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["regime"] == "critical-hyperbolic");
    CHECK(j["limit_matrix"] == json::parse("[[-1.0,-1.0],[0.0,-1.0]]"));

    const double B = std::sqrt(1.0 / std::pow(2.0, 0.8));
    CHECK(j["ansatz"]["B"].get<double>() == doctest::Approx(B).epsilon(1e-12));
    CHECK(j["ansatz"]["A"].get<double>() == doctest::Approx(B / 0.6).epsilon(1e-12));
    CHECK(j["ansatz"]["A"].get<double>() == doctest::Approx(1.2630971).epsilon(1e-7));
    CHECK(j["expected_leading_coeff"].get<double>() == doctest::Approx(4.0 / std::pow(2.0, 0.8)).epsilon(1e-12));
    CHECK(j["discr_leading_coeff"].get<double>() == doctest::Approx(4.0 / std::pow(2.0, 0.8)).epsilon(1e-3));

    auto e = json::parse(run({"classify", "--lambda", "-2"}).out);
    CHECK(e["regime"] == "critical-elliptic");
    CHECK(e.find("ansatz") == e.end());

    auto d = json::parse(run({"classify", "--lambda", "0"}).out);
    CHECK(d["regime"] == "degenerate");
    CHECK(d["discr_leading_coeff"].is_null());
}

TEST_CASE("scan grid is complete and flips regime at lambda = 0") {
    auto r = run({"scan", "--alpha", "0.7:0.9:3", "--b", "1", "--lambda", "-1:1:5"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    REQUIRE(rows.size() == 16);
    CHECK(rows[0] == "index,alpha,b,lambda,regime,discr_coeff,expected_coeff,discr_exponent,envelope_drift,odd_even_ratio");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const auto lambda_pos = row.find(",1,") + 3;
        const std::string lambda = row.substr(lambda_pos, row.find(',', lambda_pos) - lambda_pos);
        const double l = std::stod(lambda);
        if (l < 0) CHECK(row.find("critical-elliptic") != std::string::npos);
        if (l == 0) CHECK(row.find("degenerate") != std::string::npos);
        if (l > 0) CHECK(row.find("critical-hyperbolic") != std::string::npos);
    }
    CHECK(rows[1].rfind("0,0.7,1,-1,", 0) == 0);
    CHECK(rows[8].rfind("7,0.8,1,0,degenerate", 0) == 0);
}

TEST_CASE("scan values come from exact grid arithmetic") {
    auto r = run({"scan", "--alpha", "0.7:0.8:4", "--lambda", "0.1:0.3:3"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    REQUIRE(rows.size() == 13);
    CHECK(rows[4].rfind("3,0.733333333333,1,0.1,", 0) == 0);
    CHECK(rows[12].rfind("11,0.8,1,0.3,", 0) == 0);
}

TEST_CASE("scan output does not depend on the worker count") {
    const std::vector<std::string> base = {"scan", "--alpha", "0.7:0.95:4", "--b", "-1:1:2", "--lambda", "-0.5:0.5:3",
                                           "--envelope", "--envelope-n-max", "300"};
    auto with = [&](const std::string& workers, const std::string& format) {
        auto args = base;
        args.insert(args.end(), {"--workers", workers, "--format", format});
        return run(args);
    };
    for (const std::string format : {"csv", "json"}) {
        auto one = with("1", format);
        REQUIRE(one.code == 0);
        CHECK(with("4", format).out == one.out);
        CHECK(with("3", format).out == one.out);
        CHECK(with("4", format).out == one.out);
    }
    auto j = json::parse(with("2", "json").out);
    REQUIRE(j.size() == 24);
    for (const auto& row : j) {
        const bool hyperbolic = row["regime"] == "critical-hyperbolic";
        CHECK(row["envelope_drift"].is_null() == !hyperbolic);
    }
}

TEST_CASE("scan writes to a file") {
    const auto path = temp_file("critjac_scan.csv");
    auto r = run({"scan", "--lambda", "-1:1:3", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(lines(text.str()).size() == 4);
    std::filesystem::remove(path);
}

TEST_CASE("verify passes with warnings for short ranges and raised digits") {
    auto r = run({"verify", "--n-max", "400", "--digits", "40"});
    CHECK(r.code == 0);
    CHECK(r.err.find("insufficient range for slope fits") != std::string::npos);
    CHECK(r.err.find("digits raised from 40") != std::string::npos);
    auto j = json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["digits"].get<int>() > 40);

    bool saw_non_gating = false;
    for (const auto& c : j["checks"]) {
        if (c["gating"] == true) CHECK_MESSAGE(c["passed"] == true, c["name"]);
        if (c["gating"] == false) saw_non_gating = true;
    }
    CHECK(saw_non_gating);
    CHECK(j["theorem_constant"].get<double>() == doctest::Approx(0.4547150).epsilon(1e-6));
}

TEST_CASE("verify fails on an impossible tolerance") {
    auto r = run({"verify", "--n-max", "400", "--tolerance", "1e-9"});
    CHECK(r.code == 1);
    CHECK(json::parse(r.out)["passed"] == false);
}

TEST_CASE("verify emits the trace as CSV") {
    const auto back = temp_file("critjac_backward.csv");
    auto r = run({"verify", "--n-max", "400", "--format", "csv", "--backward-out", back.string()});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    CHECK(rows[0] == "n,re_u_even,im_u_even,re_u_odd,im_u_odd,envelope_ratio,wronskian_drift");
    CHECK(rows.size() > 300);
    CHECK(std::filesystem::exists(back));
    std::filesystem::remove(back);
}

TEST_CASE("verify is deterministic") {
    auto a = run({"verify", "--n-max", "500"});
    auto b = run({"verify", "--n-max", "500"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("levinson on the builtin stage") {
    auto r = run({"levinson", "--spec", "paper-L-stage", "--n-max", "600"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["larger"]["direction"] == json::parse("[0.0, 1.0]"));
    CHECK(j["smaller"]["direction"] == json::parse("[1.0, 0.0]"));
    CHECK(j.contains("boundedness"));
    CHECK(j["diagnostics"]["warnings"].empty());
}

TEST_CASE("levinson reads a spec file") {
    const auto path = temp_file("critjac_spec.json");
    {
        std::ofstream f(path);
        f << R"({"name": "harmonic", "p": {"family": "power", "c": 1, "e": -1},
                 "V": {"family": "constant", "matrix": [[-1, 0], [0, 0]]},
                 "R": {"family": "power", "matrix": [[0, 1], [1, 0]], "c": 1, "e": -2}})";
    }
    auto r = run({"levinson", "--spec", path.string(), "--n-max", "2000"});
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["name"] == "harmonic");
    CHECK(j["larger"]["tail_residual"].get<double>() < 0.05);

    auto csv = run({"levinson", "--spec", path.string(), "--n-max", "2000", "--format", "csv"});
    CHECK(lines(csv.out)[0] == "n,re_mu1,im_mu1,re_mu2,im_mu2,variation_sum");
    std::filesystem::remove(path);
}

TEST_CASE("levinson rejects malformed input with its position") {
    const auto path = temp_file("critjac_bad.json");
    {
        std::ofstream f(path);
        f << "{\n  \"p\": 1,\n  \"V\": [\n";
    }
    auto r = run({"levinson", "--spec", path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 4") != std::string::npos);
    CHECK(r.err.find("byte") != std::string::npos);

    {
        std::ofstream f(path);
        f << R"({"p": 1, "V": {"family": "bogus"}, "R": {"family": "zero"}})";
    }
    r = run({"levinson", "--spec", path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("V: unknown family 'bogus'") != std::string::npos);
    std::filesystem::remove(path);

    CHECK(run({"levinson", "--spec", "/nonexistent/spec.json"}).code == 2);
}

}  // TEST_SUITE
