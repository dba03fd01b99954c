#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace nondim;

namespace {

ReduceConfig config(std::uint64_t seed, std::vector<std::string> prefer = {}) {
    ReduceConfig cfg;
    cfg.symmetry.seed = seed;
    cfg.prefer = std::move(prefer);
    return cfg;
}

RationalFunction reduced_rhs(const ReductionResult &r, std::size_t i) { return normalize(r.reduced.rhs[i]); }

RationalFunction nf(const std::string &text, const Model &m) { return normalize(parse_expr(text, m.symbols())); }

Rational value(const Definition &d, const Assignment &p) { return evaluate(*d.dag, p); }

} // namespace

TEST(ReduceSystem, Verhulst) {
    Model v = oracle::load_fixture("verhulst.ode");
    ReductionResult r = reduce_system(v, config(1));
    EXPECT_EQ(r.total_m, 3u);
    EXPECT_EQ(r.reduced.l(), 0u);
    ASSERT_EQ(r.stages.size(), 2u);
    EXPECT_EQ(r.stages[0].kind, Kind::translation);
    EXPECT_TRUE(same_row_space(r.stages[0].found.matrix(), oracle::rows_matrix({{0, 0, 1, 0, 1}})));
    EXPECT_EQ(reduced_rhs(r, 0), nf("v_x*(1 - v_x)", r.reduced));
    EXPECT_NE(std::find(r.assumptions.begin(), r.assumptions.end(), "a - c != 0"), r.assumptions.end());
    EXPECT_TRUE(r.check.passed());

    // v_t = (a - c) t and v_x = b x/(a - c)
    Rng rng(2);
    for (int k = 0; k < 10; ++k) {
        Assignment p = sample_point(v, rng);
        if (p["a"] == p["c"])
            continue;
        EXPECT_EQ(value(r.coordinates.at("v_t"), p), (p["a"] - p["c"]) * p["t"]);
        EXPECT_EQ(value(r.coordinates.at("v_x"), p), p["b"] * p["x"] / (p["a"] - p["c"]));
    }
}

TEST(ReduceSystem, MurrayWithPreferredPivots) {
    Model murray = oracle::load_fixture("murray.ode");
    ReductionResult r = reduce_system(murray, config(2, {"r", "k1", "k2"}));
    EXPECT_EQ(r.total_m, 3u);
    EXPECT_EQ(r.reduced.params, (std::vector<std::string>{"v_h", "v_s", "v_e"}));
    EXPECT_EQ(reduced_rhs(r, 0), nf("(1 - v_n - v_p/(v_n + v_e))*v_n", r.reduced));
    EXPECT_EQ(reduced_rhs(r, 1), nf("(1 - v_h*v_p/v_n)*v_p*v_s", r.reduced));
    EXPECT_EQ(r.eliminated_original, (std::vector<std::string>{"r", "k1", "k2"}));
    Rng rng(3);
    for (int k = 0; k < 10; ++k) {
        Assignment p = sample_point(murray, rng);
        EXPECT_EQ(value(r.coordinates.at("v_t"), p), p["r"] * p["t"]);
        EXPECT_EQ(value(r.coordinates.at("v_p"), p), p["k2"] * p["p"] / (p["k1"] * p["r"]));
        EXPECT_EQ(value(r.coordinates.at("v_h"), p), p["r"] * p["h"] / p["k2"]);
    }
}

TEST(ReduceSystem, MichaelisMenten) {
    Model mm = oracle::load_fixture("mm.ode");
    ReductionResult r = reduce_system(mm, config(3));
    EXPECT_EQ(r.reduced.l(), 0u);
    EXPECT_EQ(reduced_rhs(r, 0), nf("v_x/(1 + v_x)", r.reduced));
    EXPECT_EQ(r.coordinates.at("v_t").text, "k1*t/k2");
    EXPECT_EQ(r.coordinates.at("v_x").text, "x/k2");
}

TEST(ReduceSystem, NoSymmetryLeavesModelUnchanged) {
    Model fhn = oracle::load_fixture("fitzhugh.ode");
    ReductionResult r = reduce_system(fhn, config(4));
    EXPECT_EQ(r.total_m, 0u);
    EXPECT_TRUE(r.stages.empty());
    EXPECT_EQ(r.reduced.params, fhn.params);
}

TEST(ReduceSystem, UnknownPreferredParameterIsRejected) {
    EXPECT_THROW(reduce_system(oracle::load_fixture("mm.ode"), config(1, {"q"})), std::invalid_argument);
}

TEST(CheckReduction, CorruptedRightHandSideFailsWithWitness) {
    Model v = oracle::load_fixture("verhulst.ode");
    ReductionResult r = reduce_system(v, config(1));
    r.reduced.rhs[0] = parse_expr("v_x*(1 + v_x)", r.reduced.symbols());
    Rng rng(9);
    CheckReport rep = check_reduction(r, rng);
    EXPECT_FALSE(rep.passed());
    EXPECT_FALSE(rep.chain_rule);
    ASSERT_TRUE(rep.witness);
    EXPECT_TRUE(rep.witness->contains("v_x"));
}

TEST(CheckReduction, ForeignSymbolFails) {
    Model mm = oracle::load_fixture("mm.ode");
    ReductionResult r = reduce_system(mm, config(1));
    r.reduced.rhs[0] = parse_expr("x", mm.symbols());
    Rng rng(9);
    EXPECT_FALSE(check_reduction(r, rng).passed());
}

TEST(ReduceProperty, ParameterCountAndSeedIndependence) {
    std::vector<std::pair<const char *, std::vector<std::string>>> cases{
        {"verhulst.ode", {}}, {"murray.ode", {"r", "k1", "k2"}}, {"murray.ode", {"s", "e", "h"}}, {"mm.ode", {}}};
    for (const auto &[file, prefer] : cases) {
        Model m = oracle::load_fixture(file);
        ReductionResult a = reduce_system(m, config(11, prefer));
        ReductionResult b = reduce_system(m, config(0x5eed5eed, prefer));
        EXPECT_EQ(a.reduced.l(), m.l() - a.total_m) << file;
        EXPECT_EQ(a.reduced.l(), b.reduced.l()) << file;
        ASSERT_EQ(a.reduced.coordinates(), b.reduced.coordinates()) << file;
        for (std::size_t i = 0; i < m.n(); ++i)
            EXPECT_EQ(reduced_rhs(a, i), reduced_rhs(b, i)) << file;
        for (const auto &[sym, def] : a.coordinates)
            EXPECT_EQ(def.text, b.coordinates.at(sym).text) << file;
    }
}

TEST(ReduceProperty, PlantedModelsReduceAndCheck) {
    int reduced = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto pm = oracle::planted_model(seed);
        ReductionResult r;
        try {
            r = reduce_system(pm.model, config(seed));
        } catch (const NormalizationError &) {
            continue;
        }
        EXPECT_TRUE(r.check.passed()) << pm.model.name;
        EXPECT_EQ(r.reduced.l(), pm.model.l() - r.total_m);
        Rng rng(seed);
        EXPECT_TRUE(check_reduction(r, rng).passed()) << pm.model.name;
        reduced += r.total_m > 0;
    }
    EXPECT_GE(reduced, 30);
}
