#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace nondim;

TEST(ParseModel, Verhulst) {
    Model m = oracle::load_fixture("verhulst.ode");
    EXPECT_EQ(m.name, "verhulst");
    EXPECT_EQ(m.n(), 1u);
    EXPECT_EQ(m.l(), 3u);
    EXPECT_EQ(m.coordinates(), (std::vector<std::string>{"t", "x", "a", "b", "c"}));
}

TEST(ParseModel, MurrayWithListedParameterOrder) {
    Model m = parse_model(R"(
        state n, p;
        param r, s, e, h, k1, k2;
        d/dt n = ((1 - n/k1)*r - k2*p/(n + e))*n;
        d/dt p = (1 - h*p/n)*p*s;
    )");
    EXPECT_EQ(m.n(), 2u);
    EXPECT_EQ(m.l(), 6u);
    EXPECT_EQ(m.time, "t");
}

TEST(ParseModel, CustomTimeSymbolMayAppear) {
    Model m = parse_model("time tau; state x; param k; d/dtau x = k*tau - x;");
    EXPECT_EQ(m.coordinates().front(), "tau");
    EXPECT_TRUE(m.rhs[0].variables().contains("tau"));
}

TEST(ParseModel, Errors) {
    EXPECT_THROW(parse_model("state x; d/dt x = 1; d/dt x = 2;"), ParseError);
    EXPECT_THROW(parse_model("state x, y; d/dt x = y;"), ParseError);
    EXPECT_THROW(parse_model("state x; d/dt x = q*x;"), ParseError);
    EXPECT_THROW(parse_model("state x; param x; d/dt x = x;"), ParseError);
    EXPECT_THROW(parse_model("state t; d/dt t = 1;"), ParseError);
    EXPECT_THROW(parse_model("state x; d/ds x = 1;"), ParseError);
    EXPECT_THROW(parse_model("state x; d/dt y = 1;"), ParseError);
    EXPECT_THROW(parse_model("param a;"), ParseError);
    EXPECT_THROW(parse_model("state x; d/dt x = x"), ParseError);
    EXPECT_THROW(parse_model("state x; frobnicate; d/dt x = x;"), ParseError);
}

TEST(ParseModel, ControlInputsRejected) {
    try {
        parse_model("state x;\ninput u;\nd/dt x = -x;");
        FAIL();
    } catch (const ControlVariablesUnsupported &e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_NE(std::string(e.what()).find("control variables unsupported"), std::string::npos);
    }
}

TEST(ParseModel, ErrorPositionInsideEquation) {
    try {
        parse_model("state x;\nparam a;\nd/dt x = a*x + b;\n");
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(e.column(), 16);
    }
}

TEST(RenderModel, RoundTripIsEvaluationEquivalent) {
    std::mt19937_64 rng(8);
    for (const char *name : {"verhulst.ode", "murray.ode", "mm.ode", "fitzhugh.ode"}) {
        Model m = oracle::load_fixture(name);
        for (bool normalized : {false, true}) {
            Model back = parse_model(render_model(m, normalized));
            ASSERT_EQ(back.coordinates(), m.coordinates());
            for (int k = 0; k < 10; ++k) {
                auto p = oracle::random_point(rng, m.coordinates());
                for (std::size_t i = 0; i < m.n(); ++i) {
                    try {
                        EXPECT_EQ(evaluate(back.rhs[i], p), evaluate(m.rhs[i], p)) << name;
                    } catch (const PoleError &) {
                    }
                }
            }
        }
    }
}
