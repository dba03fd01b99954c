#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace nondim;

namespace {

Assignment mm_point(long x, long k1, long k2) {
    return {{"t", Rational(1)}, {"x", Rational(x)}, {"k1", Rational(k1)}, {"k2", Rational(k2)}};
}

std::vector<Rational> row(std::initializer_list<Rational> v) { return v; }

Generator gen(Kind k, std::initializer_list<long> a) {
    Generator g{k, {}};
    for (long x : a)
        g.alpha.push_back(x);
    return g;
}

} // namespace

TEST(ConditionRows, MichaelisMentenScaleMatrix) {
    Model mm = oracle::load_fixture("mm.ode");
    std::vector<Assignment> pts{mm_point(-2, 10, -2), mm_point(-4, -7, 1), mm_point(2, 8, -1), mm_point(4, -2, 1)};
    ConditionMatrix cm = assemble(mm, Kind::scale, pts);
    ASSERT_EQ(cm.rows.rows(), 4u);
    Matrix expected = Matrix::from_rows({
        row({5, Rational(-5, 2), 5, Rational(-5, 2)}),
        row({Rational(-28, 3), Rational(112, 9), Rational(-28, 3), Rational(-28, 9)}),
        row({16, -32, 16, 16}),
        row({Rational(-8, 5), Rational(32, 25), Rational(-8, 5), Rational(8, 25)}),
    });
    EXPECT_EQ(cm.rows, expected);

    SymmetryBasis b = kernel_basis(cm, mm.coordinates());
    EXPECT_EQ(b.m(), 2u);
    EXPECT_TRUE(same_row_space(b.matrix(), oracle::rows_matrix({{1, 1, 0, 1}, {-1, 0, 1, 0}})));
    for (const auto &g : b.generators) {
        EXPECT_TRUE(std::all_of(g.alpha.begin(), g.alpha.end(), is_integer));
        auto nz = std::find_if(g.alpha.begin(), g.alpha.end(), [](const Rational &x) { return x != 0; });
        ASSERT_NE(nz, g.alpha.end());
        EXPECT_GT(*nz, 0);
    }
}

TEST(ConditionRows, TranslationRowOfConstantIsZero) {
    Model m = parse_model("state x; param a; d/dt x = 7/2;");
    auto rows = condition_rows(m, Kind::translation, {{"t", Rational(3)}, {"x", Rational(5)}, {"a", Rational(-1)}});
    ASSERT_EQ(rows.size(), 1u);
    for (const auto &v : rows[0])
        EXPECT_EQ(v, 0);
}

TEST(ConditionRows, MatchesClosedFormForMichaelisMenten) {
    Model mm = oracle::load_fixture("mm.ode");
    Rng rng(42);
    for (int k = 0; k < 10; ++k) {
        Assignment p = sample_point(mm, rng);
        Rational x = p["x"], k1 = p["k1"], k2 = p["k2"];
        Rational s = k2 + x;
        auto r = condition_rows(mm, Kind::scale, p)[0];
        EXPECT_EQ(r[0], k1 * x / s);
        EXPECT_EQ(r[1], -k1 * x * x / (s * s));
        EXPECT_EQ(r[2], k1 * x / s);
        EXPECT_EQ(r[3], -x * k1 * k2 / (s * s));
    }
}

TEST(SamplePoint, AvoidsPolesAndHonorsBound) {
    Model mm = oracle::load_fixture("mm.ode");
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        Assignment p = sample_point(mm, rng, 3);
        EXPECT_NE(p["k2"] + p["x"], 0);
        for (const auto &[s, v] : p) {
            EXPECT_NE(v, 0);
            EXPECT_LE(abs(v), 3);
            EXPECT_TRUE(is_integer(v));
        }
    }
    EXPECT_TRUE(detail::pole_free(mm, mm_point(-2, 10, -2)));
    EXPECT_FALSE(detail::pole_free(mm, mm_point(-2, 10, 2)));
}

TEST(SamplePoint, IdenticallySingularModelExhaustsRetries) {
    Model m = parse_model("state x; d/dt x = 1/(x - x);");
    Rng rng(1);
    EXPECT_THROW(sample_point(m, rng), SamplingExhausted);
    EXPECT_THROW(find_symmetries(m, Kind::scale), SamplingExhausted);
}

TEST(VerifyGenerator, KnownGenerators) {
    Model murray = oracle::load_fixture("murray.ode");
    Model verhulst = oracle::load_fixture("verhulst.ode");
    Rng rng(3);
    // coordinates (t, n, p, r, k1, k2, h, s, e)
    EXPECT_TRUE(verify_generator(murray, gen(Kind::scale, {0, 0, -1, 0, 0, 1, 1, 0, 0}), rng));
    EXPECT_TRUE(verify_generator(verhulst, gen(Kind::translation, {0, 0, 1, 0, 1}), rng));
    EXPECT_FALSE(verify_generator(verhulst, gen(Kind::translation, {0, 0, 1, 0, 0}), rng));
    EXPECT_TRUE(verify_generator_exact(verhulst, gen(Kind::translation, {0, 0, 1, 0, 1})));
    EXPECT_FALSE(verify_generator_exact(verhulst, gen(Kind::translation, {0, 0, 1, 0, 0})));
    EXPECT_TRUE(verify_generator_exact(murray, gen(Kind::scale, {0, 0, -1, 0, 0, 1, 1, 0, 0})));
    EXPECT_FALSE(verify_generator_exact(murray, gen(Kind::scale, {0, 0, 1, 0, 0, 1, 1, 0, 0})));
}

TEST(VerifyGenerator, TranslatingOnlyAChangesTheSolutions) {
    // x' = x(a + 1 - b x) - c x differs from the original by x, nonzero off x = 0
    Model v = oracle::load_fixture("verhulst.ode");
    ExprDag shifted = substitute(v.rhs[0], {{"a", parse_expr("a + 1", {"a"})}});
    Assignment p{{"x", Rational(3)}, {"a", Rational(2)}, {"b", Rational(5)}, {"c", Rational(-1)}};
    EXPECT_EQ(evaluate(shifted, p) - evaluate(v.rhs[0], p), p["x"]);
}

TEST(FindSymmetries, WorkedModels) {
    SymmetryConfig cfg;
    cfg.seed = 123;
    Model verhulst = oracle::load_fixture("verhulst.ode");
    SymmetryBasis vs = find_symmetries(verhulst, Kind::scale, cfg);
    EXPECT_EQ(vs.m(), 2u);
    // t -> t/nu gives (-1, 0, 1, 1, 1); x -> mu x gives (0, 1, 0, -1, 0)
    EXPECT_TRUE(same_row_space(vs.matrix(), oracle::rows_matrix({{-1, 0, 1, 1, 1}, {0, 1, 0, -1, 0}})));
    SymmetryBasis vt = find_symmetries(verhulst, Kind::translation, cfg);
    EXPECT_TRUE(same_row_space(vt.matrix(), oracle::rows_matrix({{0, 0, 1, 0, 1}})));

    Model murray = oracle::load_fixture("murray.ode");
    SymmetryBasis ms = find_symmetries(murray, Kind::scale, cfg);
    // K over (t, n, p, r, k1, k2, h, s, e)
    Matrix k = oracle::rows_matrix(
        {{0, 1, 1, 0, 1, 0, 0, 0, 1}, {-1, 0, 0, 1, 0, 1, 0, 1, 0}, {0, 0, -1, 0, 0, 1, 1, 0, 0}});
    EXPECT_TRUE(same_row_space(ms.matrix(), k));
    EXPECT_EQ(find_symmetries(murray, Kind::translation, cfg).m(), 0u);

    Model fhn = oracle::load_fixture("fitzhugh.ode");
    EXPECT_EQ(find_symmetries(fhn, Kind::scale, cfg).m(), 0u);
    EXPECT_EQ(find_symmetries(fhn, Kind::translation, cfg).m(), 0u);
}

TEST(FindSymmetries, MatchesSymbolicOracleOnPolynomialSystems) {
    std::vector<std::string> sources{
        "state x; param a, b, c; d/dt x = x*(a - b*x) - c*x;",
        "state x, y; param a, b; d/dt x = a*x - x*y; d/dt y = x*y - b*y;",
        "state x, y; param a; d/dt x = y; d/dt y = -a*x;",
        "state x; param a, b; d/dt x = a + b*x^2;",
        "state x, y; param a, b, c; d/dt x = a*x^2*y; d/dt y = b + c*y;",
        "state x; param a, b, c, d; d/dt x = a*x^3 + b*x^2 + c*x + d;",
        "state x, y; d/dt x = x^2 - y; d/dt y = x + 1;",
    };
    SymmetryConfig cfg;
    cfg.seed = 5;
    for (const auto &src : sources) {
        Model m = parse_model(src);
        for (Kind kind : {Kind::scale, Kind::translation}) {
            SymmetryBasis b = find_symmetries(m, kind, cfg);
            Matrix oracle_k = oracle::symbolic_kernel(m, kind);
            EXPECT_EQ(b.m(), oracle_k.rows()) << src << " " << to_string(kind);
            if (b.m()) {
                EXPECT_TRUE(same_row_space(b.matrix(), oracle_k)) << src << " " << to_string(kind);
            }
        }
    }
}

TEST(FindSymmetries, SoundOnFiftyFreshPoints) {
    Rng rng(99);
    for (const char *name : {"verhulst.ode", "murray.ode", "mm.ode"}) {
        Model m = oracle::load_fixture(name);
        for (Kind kind : {Kind::scale, Kind::translation}) {
            SymmetryBasis b = find_symmetries(m, kind);
            for (int k = 0; k < 50; ++k) {
                Assignment p = sample_point(m, rng);
                for (const auto &r : condition_rows(m, kind, p))
                    for (const auto &g : b.generators)
                        ASSERT_EQ(dot(r, g.alpha), 0) << name;
            }
        }
    }
}

TEST(FindSymmetries, SpanIsSeedIndependent) {
    for (const char *name : {"verhulst.ode", "murray.ode", "mm.ode", "fitzhugh.ode"}) {
        Model m = oracle::load_fixture(name);
        for (Kind kind : {Kind::scale, Kind::translation}) {
            SymmetryConfig a, b;
            a.seed = 1;
            b.seed = 0xdeadbeef;
            SymmetryBasis x = find_symmetries(m, kind, a), y = find_symmetries(m, kind, b);
            ASSERT_EQ(x.m(), y.m()) << name;
            if (x.m()) {
                EXPECT_TRUE(same_row_space(x.matrix(), y.matrix())) << name;
            }
        }
    }
}

TEST(FindSymmetries, SameSeedSameBasis) {
    Model m = oracle::load_fixture("murray.ode");
    SymmetryConfig cfg;
    cfg.seed = 77;
    EXPECT_EQ(find_symmetries(m, Kind::scale, cfg).matrix(), find_symmetries(m, Kind::scale, cfg).matrix());
}

TEST(FindSymmetriesProperty, PlantedScalingIsFound) {
    int found = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto pm = oracle::planted_model(seed);
        SymmetryConfig cfg;
        cfg.seed = seed;
        SymmetryBasis b = find_symmetries(pm.model, Kind::scale, cfg);
        if (b.m() && in_row_space(b.matrix(), pm.alpha))
            ++found;
    }
    EXPECT_GE(found, 99);
}

TEST(ReduceExponents, KeepsLatticeAndShortens) {
    SymmetryBasis b;
    b.kind = Kind::scale;
    b.coordinates = {"t", "x", "k1", "k2"};
    b.generators = {gen(Kind::scale, {1, 1, 0, 1}), gen(Kind::scale, {-1, 0, 1, 0})};
    b.verified = {true, true};
    for (bool lll : {false, true}) {
        SymmetryBasis r = reduce_exponents(b, lll);
        EXPECT_TRUE(same_row_space(r.matrix(), b.matrix()));
        EXPECT_TRUE(same_row_space(r.matrix(), oracle::rows_matrix({{1, 0, -1, 0}, {0, 1, 1, 1}})));
        Matrix change = r.matrix() * b.matrix().transpose() * inverse(b.matrix() * b.matrix().transpose());
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                EXPECT_TRUE(is_integer(change(i, j)));
        for (const auto &g : r.generators)
            for (const auto &x : g.alpha)
                EXPECT_LE(abs(x), 1);
    }

    SymmetryBasis single = b;
    single.generators.resize(1);
    single.verified.resize(1);
    EXPECT_EQ(reduce_exponents(single).matrix(), single.matrix());
    SymmetryBasis empty = b;
    empty.generators.clear();
    empty.verified.clear();
    EXPECT_EQ(reduce_exponents(empty).m(), 0u);
}
