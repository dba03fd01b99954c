#include "nondim/cli.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>

using namespace nondim;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string model(const char *name) { return oracle::fixture_path(name); }

std::string shell(const std::string &cmd) {
    std::string result;
    FILE *p = popen(cmd.c_str(), "r");
    if (!p)
        return result;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0)
        result.append(buf.data(), n);
    pclose(p);
    return result;
}

std::string write_temp(const std::string &name, const std::string &text) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path.string();
}

} // namespace

TEST(Cli, MurrayScaleSymmetries) {
    auto r = run({"symmetries", model("murray.ode"), "--kind", "scale", "--seed", "1"});
    EXPECT_EQ(r.code, cli::ok);
    EXPECT_NE(r.out.find("scale symmetries, m = 3"), std::string::npos);
    EXPECT_NE(r.out.find("seed 1"), std::string::npos);
}

TEST(Cli, ExitCodeProtocol) {
    EXPECT_EQ(run({"symmetries", model("murray.ode"), "--kind", "translation", "--seed", "1"}).code, cli::no_symmetry);
    EXPECT_NE(run({"symmetries", model("murray.ode"), "--kind", "translation", "--seed", "1"}).out.find("none found"),
              std::string::npos);
    EXPECT_EQ(run({"symmetries", model("fitzhugh.ode"), "--kind", "scale", "--seed", "1"}).code, cli::no_symmetry);
    EXPECT_EQ(run({"symmetries", model("fitzhugh.ode"), "--kind", "translation", "--seed", "1"}).code,
              cli::no_symmetry);
    EXPECT_EQ(run({"reduce", model("fitzhugh.ode"), "--seed", "1"}).code, cli::no_symmetry);
    EXPECT_EQ(run({"reduce", "/nonexistent/model.ode"}).code, cli::input_error);
    EXPECT_EQ(run({"symmetries", model("mm.ode"), "--kind", "rotation"}).code, cli::input_error);
    EXPECT_EQ(run({"reduce", model("mm.ode"), "--prefer", "zz"}).code, cli::input_error);
    EXPECT_EQ(run({"frobnicate"}).code, cli::input_error);

    std::string bad = write_temp("nondim_bad.ode", "state x;\nd/dt x = y;\n");
    auto r = run({"reduce", bad});
    EXPECT_EQ(r.code, cli::input_error);
    EXPECT_NE(r.err.find(":2:"), std::string::npos);
}

TEST(Cli, ReduceVerhulstWithCheck) {
    auto r = run({"reduce", model("verhulst.ode"), "--check", "--seed", "5"});
    EXPECT_EQ(r.code, cli::ok);
    EXPECT_NE(r.out.find("v_x - v_x^2"), std::string::npos);
    EXPECT_NE(r.out.find("a - c != 0"), std::string::npos);
    EXPECT_NE(r.out.find("# check: chain rule pass, invariance pass"), std::string::npos);
}

TEST(Cli, ReduceMurrayJson) {
    auto r = run({"reduce", model("murray.ode"), "--prefer", "r,k1,k2", "--check", "--json", "--seed", "3"});
    ASSERT_EQ(r.code, cli::ok);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["total_m"], 3);
    EXPECT_EQ(j["checks"]["chain_rule"], "pass");
    EXPECT_EQ(j["checks"]["invariance"], "pass");
    Model reduced = parse_model(j["reduced_model_text"].get<std::string>());
    EXPECT_EQ(reduced.l(), 3u);
}

TEST(Cli, ReduceMichaelisMenten) {
    auto r = run({"reduce", model("mm.ode"), "--seed", "8"});
    EXPECT_EQ(r.code, cli::ok);
    Model reduced = parse_model(r.out);
    EXPECT_EQ(reduced.l(), 0u);
    EXPECT_EQ(normalize(reduced.rhs[0]), normalize(parse_expr("v_x/(1 + v_x)", reduced.symbols())));
}

TEST(Cli, SeriesBackendAgrees) {
    auto a = run({"symmetries", model("mm.ode"), "--seed", "2", "--json"});
    auto b = run({"symmetries", model("mm.ode"), "--seed", "2", "--json", "--backend", "series"});
    ASSERT_EQ(a.code, cli::ok);
    ASSERT_EQ(b.code, cli::ok);
    auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
    EXPECT_EQ(ja["symmetries"].size(), jb["symmetries"].size());
    for (std::size_t k = 0; k < ja["symmetries"].size(); ++k)
        EXPECT_EQ(ja["symmetries"][k]["m"], jb["symmetries"][k]["m"]);
}

TEST(Cli, SameSeedGivesByteIdenticalOutput) {
    for (const char *name : {"verhulst.ode", "murray.ode", "mm.ode", "fitzhugh.ode"}) {
        for (const char *cmd : {"symmetries", "reduce"}) {
            std::string line = std::string(NONDIM_CLI) + " " + cmd + " " + model(name) + " --seed 99 --json 2>&1";
            std::string first = shell(line), second = shell(line);
            EXPECT_FALSE(first.empty());
            EXPECT_EQ(first, second) << name << " " << cmd;
        }
    }
}
