#include <gtest/gtest.h>

#include <wks/io.hpp>

using namespace wks;

TEST(Json, ConstantTableRoundTrip)
{
    for (int k : {1, 3, 9}) {
        const auto t = build_constants(k);
        const auto j = to_json(t);
        EXPECT_EQ(j.at("k"), k);
        EXPECT_TRUE(j.at("alpha").at(1).is_string());
        EXPECT_EQ(constants_from_json(json::parse(j.dump())), t);
    }
    EXPECT_EQ(to_json(build_constants(2)).at("C").at("3"), "6");
    EXPECT_EQ(to_json(build_constants(9)).at("alpha").at(7), "113423713055421844361000441");
}

TEST(Json, ConstantTableRejectsMalformed)
{
    auto j = to_json(build_constants(2));
    j["C"].erase("2");
    EXPECT_THROW(constants_from_json(j), InvalidArgument);
    EXPECT_THROW(constants_from_json(json{{"k", 2}}), InvalidArgument);
}

TEST(Json, PotentialTableRoundTripDouble)
{
    for (Backend b : {Backend::direct, Backend::gauss_seidel}) {
        const auto t = solve(ProbVector<double>({0.7, 0.31, 0.3, 1e-3}), b);
        const auto j = json::parse(to_json(t).dump());
        EXPECT_EQ(j.at("backend"), to_string(b));
        const auto back = potentials_from_json<double>(j);
        EXPECT_EQ(back.phi_values(), t.phi_values());
        EXPECT_EQ(back.f_values(), t.f_values());
        EXPECT_EQ(back.p(), t.p());
        EXPECT_EQ(back.residual(), t.residual());
        EXPECT_EQ(back.backend(), b);
        EXPECT_EQ(back.sweeps(), t.sweeps());
    }
}

TEST(Json, PotentialTableRoundTripExact)
{
    const auto t = solve_direct(ProbVector<Rational>({Rational(3), Rational(2)}));
    const auto j = to_json(t);
    EXPECT_EQ(j.at("phi").at("2"), "3/5");
    const auto back = potentials_from_json<Rational>(json::parse(j.dump()));
    EXPECT_EQ(back.phi_values(), t.phi_values());
    EXPECT_EQ(back.f_values(), t.f_values());
}

TEST(Json, PotentialTableRoundTripHighPrecision)
{
    PrecisionScope digits(80);
    const auto t = solve_direct(ProbVector<HighPrecision>({HighPrecision(1), HighPrecision("1e-30")}));
    const auto back = potentials_from_json<HighPrecision>(json::parse(to_json(t).dump()));
    EXPECT_EQ(back.phi_values(), t.phi_values());
}

TEST(Json, PotentialTableRejectsMalformed)
{
    auto j = to_json(solve_direct(ProbVector<double>({1, 0.5})));
    j["backend"] = "lu";
    EXPECT_THROW(potentials_from_json<double>(j), InvalidArgument);
    j = to_json(solve_direct(ProbVector<double>({1, 0.5})));
    j["phi"].erase("3");
    EXPECT_THROW(potentials_from_json<double>(j), InvalidArgument);
}

TEST(Json, RatioResultUsesUserOrder)
{
    const auto beta = WeightVector<double>::canonical({1000, 1});
    const auto p = optimal_p(beta, build_constants(2));
    const auto r = alpha_tilde(beta, p);
    const auto j = to_json(r, beta);
    EXPECT_EQ(j.at("arg_t"), 1); // sorted server 2 is the caller's first server
    EXPECT_DOUBLE_EQ(j.at("alpha_tilde").get<double>(), 5.0);
    EXPECT_DOUBLE_EQ(j.at("per_server").at(0).get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(j.at("s").get<double>(), 1e-3);
}

TEST(Json, ReportAndLedger)
{
    Report rep("demo");
    rep.expect_le("c", 3, 2, 2.0, 1.0);
    const auto j = to_json(rep);
    EXPECT_EQ(j.at("failures"), 1);
    EXPECT_EQ(j.at("records").at(0).at("S"), 3);
    EXPECT_EQ(j.at("records").at(0).at("pass"), false);

    const WeightVector<double> beta({2.0});
    const ProbVector<double> p({1.0});
    const auto l = run_game(beta, solve_direct(p), 10, 4);
    const auto lj = to_json(l, GameInputs{beta, p, 1, 10, 4});
    for (const char* key : {"k", "beta", "p", "t", "n", "seed", "alg", "adv", "adv_evict", "ratio", "ratio_adjusted",
                            "audit_failures"})
        EXPECT_TRUE(lj.contains(key)) << key;
    EXPECT_EQ(lj.at("ratio"), 1.0);
}

TEST(Json, LimitReport)
{
    LimitOptions o;
    o.grid = false;
    const auto j = to_json(limit_optimality_sweep<HighPrecision>(2, {1e4, 1e6}, build_constants(2), o));
    EXPECT_EQ(j.at("points").size(), 2u);
    EXPECT_EQ(j.at("ok"), true);
}
