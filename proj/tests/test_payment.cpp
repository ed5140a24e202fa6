#include <doctest.h>

#include "ratbench/case_studies.hpp"
#include "ratbench/payment.hpp"

using namespace ratbench;

TEST_CASE("conversion formulas") {
    const ConversionRule weather{ConversionKind::Affine, 1.0, 0.01};
    CHECK(convert(weather, -7.96) == doctest::Approx(0.9204));
    CHECK(convert(weather, -5.69) == doctest::Approx(0.9431));
    const ConversionRule flat{ConversionKind::Affine, 2.5, 0.0};
    CHECK(convert(flat, 1e6) == 2.5);
    CHECK(convert(flat, -1e6) == 2.5);
    const ConversionRule floored{ConversionKind::FlooredAffine, 1.0, 0.08, 42.0};
    CHECK(convert(floored, 30.0) == 1.0);
    CHECK(convert(floored, 52.0) == doctest::Approx(1.8));
    const ConversionRule shifted{ConversionKind::ShiftedAffine, 1.0, 0.5, 0.0, 10.0};
    CHECK(convert(shifted, 14.0) == doctest::Approx(3.0));
}

TEST_CASE("cumulative accounting scales by trials before converting") {
    const ConversionRule r{ConversionKind::Affine, 1.25, 0.08228 / 1000.0, 0.0, 0.0, 40};
    CHECK(convert_expected(r, 767.5) == doctest::Approx(1.25 + 0.08228 * 40 * 767.5 / 1000.0));
    CHECK(convert_expected(r, 767.5) == doctest::Approx(3.776).epsilon(1e-3));
}

TEST_CASE("weather incentive table") {
    const auto cs = build_weather();
    const auto r = analyze(cs.design);
    const auto t = incentive_table(cs.design, r);
    CHECK(t.benchmark.paid_baseline == doctest::Approx(1.0 + 0.01 * r.baseline));
    CHECK(t.benchmark.paid_baseline == doctest::Approx(0.920).epsilon(0.001 / 0.92));
    CHECK(t.benchmark.paid_optimal == doctest::Approx(0.943).epsilon(0.001 / 0.943));
    CHECK(t.benchmark.difference == doctest::Approx(0.01 * r.value_of_information));
    CHECK(t.benchmark.ratio == doctest::Approx(t.benchmark.difference / t.benchmark.paid_baseline));
    REQUIRE(t.strategies.size() == 4);
    CHECK(t.strategies[0].difference == doctest::Approx(0.0));
}

TEST_CASE("incentive table errors") {
    auto cs = build_weather();
    const auto r = analyze(cs.design);
    cs.design.conversion.reset();
    CHECK_THROWS_AS(incentive_table(cs.design, r), InputError);
    const ConversionRule zero{ConversionKind::Affine, 0.0, 0.0};
    CHECK_THROWS_AS(incentive_table(cs.design, r, zero), InputError);
}

TEST_CASE("monotone conversions keep the incentive non-negative") {
    const auto cs = build_kale();
    const auto r = analyze(cs.design);
    for (const auto kind : {ConversionKind::Affine, ConversionKind::FlooredAffine, ConversionKind::ShiftedAffine}) {
        ConversionRule c{kind, 1.0, 0.08, 42.0, 10.0, 32};
        const auto t = incentive_table(cs.design, r, c);
        CHECK(t.benchmark.difference >= 0.0);
    }
}

TEST_CASE("monte carlo incentives agree with the linearization when the floor rarely binds") {
    const auto cs = build_kale();
    const auto r = analyze(cs.design);
    const auto linear = incentive_table(cs.design, r);
    IncentiveOptions mc{IncentiveMode::MonteCarlo, 20000, 3};
    const auto sim = incentive_table(cs.design, r, mc);
    CHECK(sim.benchmark.paid_optimal == doctest::Approx(linear.benchmark.paid_optimal).epsilon(0.02));
    CHECK(sim.benchmark.paid_baseline >= linear.benchmark.paid_baseline - 0.02);
    const auto again = incentive_table(cs.design, r, mc);
    CHECK(again.benchmark.paid_optimal == sim.benchmark.paid_optimal);
}

TEST_CASE("shifting payments raises the relative incentive on the transit case") {
    for (int scenario = 1; scenario <= 3; ++scenario) {
        const auto cs = build_fernandes({scenario, default_distribution_file()});
        const auto r = analyze(cs.design);
        const auto plain = incentive_table(cs.design, r);
        auto shifted_rule = *cs.design.conversion;
        shifted_rule.kind = ConversionKind::ShiftedAffine;
        const auto sc = transit_scenario(scenario);
        shifted_rule.shift = 40.0 * 30.0 * sc.activity_rate;
        const auto shifted = incentive_table(cs.design, r, shifted_rule);
        REQUIRE(plain.benchmark.difference > 0.0);
        CHECK(shifted.benchmark.difference == doctest::Approx(plain.benchmark.difference));
        CHECK(shifted.benchmark.ratio > plain.benchmark.ratio);
    }
}
