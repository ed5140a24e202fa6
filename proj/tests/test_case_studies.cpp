#include <doctest.h>

#include <cmath>
#include <set>

#include "ratbench/case_studies.hpp"
#include "ratbench/rational.hpp"

using namespace ratbench;

namespace {

std::vector<TrialDistribution> small_set() {
    return {{"a", {8.0, 0.2, 1.0, 10.0}},
            {"b", {8.0, 0.2, 1.0, 10.0}},
            {"c", {14.0, 0.3, 0.5, 6.0}}};
}

double fact(const CaseStudy& cs, const std::string& name) {
    for (const auto& [k, v] : cs.facts) {
        if (k == name) return v;
    }
    FAIL("missing fact " << name);
    return 0.0;
}

}  // namespace

TEST_CASE("weather scores") {
    const auto cs = build_weather();
    const auto r = analyze(cs.design);
    CHECK(std::abs(r.baseline + 7.96) <= 0.005);
    CHECK(std::abs(r.benchmark + 5.69) <= 0.005);
    CHECK(std::abs(r.value_of_information - 2.27) <= 0.01);
    CHECK(*r.strategies[0].information_loss == doctest::Approx(1.0));
    for (std::size_t i = 1; i < r.strategies.size(); ++i) {
        CHECK(*r.strategies[i].information_loss == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (const auto& e : cs.expected) CHECK(e.provenance != Provenance::ReferenceOnly);
}

TEST_CASE("kale model quantities") {
    const auto cs = build_kale();
    CHECK(std::abs(fact(cs, "prior_win_probability") - 0.805) <= 0.005);
    CHECK(std::abs(fact(cs, "hiring_threshold") - 0.8155) <= 0.0005);
    const auto r = analyze(cs.design);
    CHECK(std::abs(r.baseline - 1.575) <= 0.025);
    CHECK(std::abs(r.benchmark - 1.77) <= 0.03);
    CHECK(std::abs(r.value_of_information - 0.2) <= 0.03);
    CHECK(cs.design.strategies.size() == 8);
    std::set<std::string> names;
    for (const auto& s : cs.design.strategies) names.insert(s.name);
    CHECK(names.count("QDP+means") == 1);
    CHECK(cs.design.conversion->kind == ConversionKind::FlooredAffine);
    CHECK(cs.design.conversion->trials == 32);
}

TEST_CASE("kale explicit levels") {
    KaleOptions opts;
    opts.levels = std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99, 0.999};
    const auto cs = build_kale(opts);
    CHECK(analyze(cs.design).value_of_information > 0.0);
    opts.levels = std::vector<double>{0.5, 1.5};
    CHECK_THROWS_AS(build_kale(opts), InputError);
}

TEST_CASE("transit scenarios") {
    CHECK(transit_scenario(1).dollars_per_thousand == doctest::Approx(0.01698));
    CHECK(transit_scenario(2).dollars_per_thousand == doctest::Approx(0.08228));
    CHECK(transit_scenario(3).dollars_per_thousand == doctest::Approx(0.016076));
    CHECK_THROWS_AS(transit_scenario(4), InputError);
    CHECK(text_displays().size() == 3);
}

TEST_CASE("fernandes design from supplied distributions") {
    FernandesOptions opts;
    opts.scenario = 2;
    opts.grid_step = 1.0;
    const auto cs = build_fernandes(opts, small_set());
    CHECK(cs.design.conversion->base == 1.25);
    CHECK(cs.design.conversion->rate == doctest::Approx(0.08228 / 1000));
    CHECK(cs.design.conversion->trials == 40);
    CHECK(cs.design.states.size() == 31);
    CHECK(cs.design.actions.size() == 31);
    CHECK(cs.design.rule.transit()->payoff(10.0, 10.0, 0.0) == doctest::Approx(980.0));
    CHECK(cs.find("payoff(a=10,theta=10)") != nullptr);
    const auto r = analyze(cs.design);
    CHECK(r.value_of_information >= 0.0);
    for (const auto& e : cs.expected) {
        if (e.quantity.rfind("visualization_optimal", 0) == 0 || e.quantity == "baseline") {
            CHECK(e.provenance == Provenance::ReferenceOnly);
        }
    }
}

TEST_CASE("text partitions") {
    FernandesOptions opts;
    opts.grid_step = 1.0;
    const auto identity = build_fernandes(opts, small_set());
    const auto text = *identity.design.strategy_index("text60");
    CHECK(identity.design.strategies[text].structure.num_signals() == 3);

    opts.text_partition.kind = TextPartition::Kind::QuantileRounding;
    const auto quantile = build_fernandes(opts, small_set());
    CHECK(quantile.design.strategies[text].structure.num_signals() == 2);
    const auto rq = analyze(quantile.design);
    CHECK(rq.strategies[text].visualization_optimal <= rq.benchmark + 1e-9);

    opts.text_partition.kind = TextPartition::Kind::Explicit;
    for (const auto& [name, level] : text_displays()) {
        opts.text_partition.labels[name] = {{"a", "x"}, {"b", "x"}, {"c", "x"}};
    }
    const auto pooled = build_fernandes(opts, small_set());
    const auto rp = analyze(pooled.design);
    CHECK(*rp.strategies[text].information_loss == doctest::Approx(1.0));
    opts.text_partition.labels["text85"].erase("c");
    CHECK_THROWS_AS(build_fernandes(opts, small_set()), InputError);
}

TEST_CASE("fernandes input errors") {
    FernandesOptions opts;
    opts.distributions = "/nonexistent/dists.csv";
    CHECK_THROWS_AS(build_fernandes(opts), InputError);
    opts.distributions.clear();
    CHECK_THROWS_AS(build_fernandes(opts, {}), InputError);
    auto dup = small_set();
    dup[1].trial_id = "a";
    CHECK_THROWS_AS(build_fernandes(opts, dup), InputError);
    opts.grid_step = 0.0;
    CHECK_THROWS_AS(build_fernandes(opts, small_set()), InputError);
    CHECK_THROWS_AS(build_case("nope"), InputError);
}

TEST_CASE("default distribution file builds all scenarios") {
    REQUIRE(std::filesystem::exists(default_distribution_file()));
    for (int s = 1; s <= 3; ++s) {
        FernandesOptions opts;
        opts.scenario = s;
        opts.grid_step = 1.0;
        const auto r = analyze(build_fernandes(opts).design);
        CHECK(r.value_of_information > 0.0);
        CHECK(r.baseline <= r.benchmark);
    }
}
