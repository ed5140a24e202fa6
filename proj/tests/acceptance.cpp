// Acceptance suite: one PASS/FAIL line per criterion component.
// Exit status counts failures that are not listed as known deviations.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "oracles.hpp"
#include "ratbench/behavioral.hpp"
#include "ratbench/case_studies.hpp"
#include "ratbench/cli.hpp"
#include "ratbench/generative.hpp"
#include "ratbench/payment.hpp"
#include "ratbench/rational.hpp"
#include "ratbench/report.hpp"
#include "ratbench/simulator.hpp"

using namespace ratbench;
namespace fs = std::filesystem;

namespace {

/// Criterion components that cannot be met by a faithful implementation.
const std::map<std::string, std::string> kKnown = {
    {"2.incentive:difference",
     "published table built from the rounded baseline 1.57; analytic baseline 1.585 gives 0.473"},
    {"2.incentive:ratio",
     "published table built from the rounded baseline 1.57; analytic baseline 1.585 gives 27.9%"},
};

int unexpected = 0;
int known = 0;
int passed = 0;

void report(const std::string& key, const std::string& label, bool ok, const std::string& detail) {
    const auto it = kKnown.find(key);
    std::string status = "PASS";
    if (ok) {
        ++passed;
    } else if (it != kKnown.end()) {
        ++known;
        status = "FAIL (known: " + it->second + ")";
    } else {
        ++unexpected;
        status = "FAIL";
    }
    fmt::print("[{}] {:<74} {:<44} {}\n", key.substr(0, key.find('.')), label, detail, status);
    std::fflush(stdout);
}

void within(const std::string& key, const std::string& label, double got, double want, double tol) {
    report(key, label, std::abs(got - want) <= tol, fmt::format("{:.6g} vs {:.6g} +- {:.3g}", got, want, tol));
}

void within_relative(const std::string& key, const std::string& label, double got, double want,
                     double rel) {
    report(key, label, std::abs(got - want) <= rel * std::abs(want),
           fmt::format("{:.6g} vs {:.6g} +- {:.0f}%", got, want, rel * 100));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void runtime(const std::string& key, const std::string& label, double elapsed, double limit) {
    report(key, label, elapsed < limit, fmt::format("{:.3f} s < {} s", elapsed, limit));
}

double need(const PreResult& r, std::string_view quantity) {
    const auto v = observed(r, quantity);
    if (!v) throw std::runtime_error(fmt::format("no observed value for {}", quantity));
    return *v;
}

// ---------------------------------------------------------------------------

void weather_reproduction() {
    const auto start = std::chrono::steady_clock::now();
    std::ostringstream out, err;
    const int code = run_cli({"pre", "--case", "weather"}, out, err);
    const auto r = run_pre(build_weather(), "weather");
    const double elapsed = seconds_since(start);
    report("1.exit", "pre --case weather exits 0", code == kExitOk, fmt::format("exit {}", code));
    within("1.baseline", "rational baseline", r.rational.baseline, -7.96, 0.005);
    for (const char* s : {"CI", "gradient", "HOPs"}) {
        within(fmt::format("1.vo:{}", s), fmt::format("visualization optimal {}", s),
               need(r, fmt::format("visualization_optimal:{}", s)), -5.69, 0.005);
    }
    within("1.vo:mean", "visualization optimal mean", need(r, "visualization_optimal:mean"), -7.96,
           0.005);
    within("1.delta", "value of information", r.rational.value_of_information, 2.27, 0.01);
    within("1.loss:mean", "mean-strategy information loss", need(r, "information_loss:mean"), 1.0,
           1e-9);
    within("1.paid_baseline", "incentive f(baseline)", need(r, "incentive:paid_baseline"), 0.920, 0.001);
    within("1.paid_optimal", "incentive f(benchmark)", need(r, "incentive:paid_optimal"), 0.943, 0.001);
    within("1.difference", "incentive difference", need(r, "incentive:difference"), 0.023, 0.001);
    within("1.ratio", "incentive ratio (printed 2.5%, half a last digit)", need(r, "incentive:ratio"),
           0.025, 0.0005);
    runtime("1.runtime", "runtime", elapsed, 1.0);
}

void kale_reproduction() {
    const auto start = std::chrono::steady_clock::now();
    const auto cs = build_kale();
    const auto r = run_pre(cs, "kale2020");
    const double elapsed = seconds_since(start);
    within("2.prior", "prior win probability", need(r, "prior_win_probability"), 0.805, 0.005);
    within("2.threshold", "decision threshold", need(r, "hiring_threshold"), 0.8155, 0.0005);
    report("2.baseline", "rational baseline in [1.55, 1.60]",
           r.rational.baseline >= 1.55 && r.rational.baseline <= 1.60,
           fmt::format("{:.6g}", r.rational.baseline));
    within("2.benchmark", "rational benchmark", r.rational.benchmark, 1.77, 0.03);
    within("2.delta", "value of information", r.rational.value_of_information, 0.20, 0.03);
    within_relative("2.incentive:paid_baseline", "incentive f(baseline)",
                    need(r, "incentive:paid_baseline"), 1.66, 0.05);
    within_relative("2.incentive:paid_optimal", "incentive f(benchmark)",
                    need(r, "incentive:paid_optimal"), 2.17, 0.05);
    within_relative("2.incentive:difference", "incentive difference", need(r, "incentive:difference"),
                    0.51, 0.05);
    within_relative("2.incentive:ratio", "incentive ratio", need(r, "incentive:ratio"), 0.3072, 0.05);
    runtime("2.runtime", "runtime", elapsed, 1.0);
}

void transit_properties() {
    const auto start = std::chrono::steady_clock::now();
    const auto dists = read_trial_distributions(default_distribution_file());

    // (a) expected score against brute-force enumeration
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<int> pick_scenario(1, 3);
    std::uniform_int_distribution<std::size_t> pick_dist(0, dists.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_action(0, 30);
    std::map<int, std::array<CaseStudy, 2>> designs;
    for (int s = 1; s <= 3; ++s) {
        FernandesOptions opts;
        opts.scenario = s;
        opts.mode = SecondBusMode::PlugIn;
        auto plug = build_fernandes(opts, dists);
        opts.mode = SecondBusMode::FullExpectation;
        designs.emplace(s, std::array<CaseStudy, 2>{std::move(plug), build_fernandes(opts, dists)});
    }
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const int s = pick_scenario(gen);
        const std::size_t v = pick_dist(gen);
        const std::size_t a = pick_action(gen);
        const auto sc = transit_scenario(s);
        const oracle::Transit t{sc.activity_rate, sc.waiting_rate, sc.destination_rate, sc.horizon};
        for (const auto& cs : designs.at(s)) {
            const auto& d = cs.design;
            const auto belief = posterior(d.strategies[0].structure, v);
            const auto p = belief.probabilities();
            const double want = oracle::transit_expectation(
                t, d.actions.values()[a], d.states.values(), std::vector<double>(p.begin(), p.end()));
            const double got = expected_score(d.rule, a, belief);
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
    }
    report("3.a", "transit expectation vs enumeration, 50 triples x 2 modes", worst <= 1e-6,
           fmt::format("max rel err {:.2e} <= 1e-6", worst));

    // (b) pipeline emits every table analogue with the ordering
    for (const auto partition : {TextPartition::Kind::Identity, TextPartition::Kind::QuantileRounding}) {
        const char* pname = partition == TextPartition::Kind::Identity ? "identity" : "quantile";
        for (int s = 1; s <= 3; ++s) {
            FernandesOptions opts;
            opts.scenario = s;
            opts.text_partition.kind = partition;
            const auto cs = build_fernandes(opts, dists);
            const auto r = run_pre(cs, fmt::format("scenario {}", s));
            std::size_t missing = 0;
            for (const auto& e : r.expected) missing += observed(r, e.quantity) ? 0 : 1;
            const double full = need(r, "visualization_optimal:full");
            bool ordered = true;
            std::string shown;
            for (const auto& [name, level] : text_displays()) {
                const double text = need(r, "visualization_optimal:" + name);
                ordered = ordered && r.rational.baseline <= text + 1e-9 && text <= full + 1e-9;
                shown += fmt::format(" {:.1f}", text);
            }
            report(fmt::format("3.b.{}.{}", pname, s),
                   fmt::format("scenario {} ({} text) tables + R0 <= text <= full", s, pname),
                   missing == 0 && r.incentives.has_value() && ordered,
                   fmt::format("{:.1f} <={} <= {:.1f}", r.rational.baseline, shown, full));
        }
    }

    // (c) incentive constants
    for (int s = 1; s <= 3; ++s) {
        const auto& conv = *designs.at(s)[0].design.conversion;
        const double d = transit_scenario(s).dollars_per_thousand;
        const double expected_pay = 1.25 + 40.0 * 900.0 * d / 1000.0;
        const bool ok = conv.base == 1.25 && conv.rate * 1000.0 == d &&
                        std::abs(convert_expected(conv, 900.0) - expected_pay) <= 1e-12;
        report(fmt::format("3.c.{}", s), fmt::format("scenario {} base $1.25 and d = {}", s, d), ok,
               fmt::format("base {} rate*1000 {}", conv.base, conv.rate * 1000.0));
    }
    runtime("3.runtime", "runtime, 40 trials x 3 scenarios", seconds_since(start), 30.0);
}

struct Recovery {
    LossReport losses;
    double calibrated_se = 0.0;
};

Recovery recover(const ExperimentDesign& d, const RationalReport& r, const AgentSpec& agent,
                 StateWeighting weighting) {
    const std::string strategy = "CI";
    const auto records = simulate(d, strategy, agent, 100000, 7);
    IngestOptions opts;
    opts.weighting = weighting;
    const auto joint = ingest(records, d, opts);
    const auto index = *d.strategy_index(strategy);
    Recovery out;
    out.losses = decompose(joint, d.rule, r.baseline, r.strategies[index].visualization_optimal,
                           r.value_of_information);
    const auto cal = calibrate(joint, d.rule);
    const auto& m = *d.rule.matrix();
    double sum = 0.0, sq = 0.0;
    for (const auto& rec : records) {
        const auto a = *joint.actions.index_of(rec.action);
        const double x = m.scores[*cal.policy[a]][*d.states.index_of(rec.state)];
        sum += x;
        sq += x * x;
    }
    const double n = static_cast<double>(records.size());
    out.calibrated_se = std::sqrt((sq / n - (sum / n) * (sum / n)) / (n - 1));
    return out;
}

void decomposition_recovery() {
    const auto cs = build_weather();
    const auto r = analyze(cs.design);
    for (const auto weighting : {StateWeighting::Realized, StateWeighting::SignalPosterior}) {
        const bool primary = weighting == StateWeighting::Realized;
        const std::string tag = primary ? "" : "posterior.";
        const std::string suffix = primary ? "" : " [posterior weighting, supplementary]";
        auto timed = [&](const AgentSpec& agent) {
            const auto start = std::chrono::steady_clock::now();
            auto rec = recover(cs.design, r, agent, weighting);
            return std::pair{rec, seconds_since(start)};
        };
        const auto [rational, t_rational] = timed(AgentSpec::rational());
        within("4." + tag + "rational.belief", "rational agent belief loss" + suffix,
               *rational.losses.belief_loss, 0.0, 0.02);
        within("4." + tag + "rational.opt", "rational agent optimization loss" + suffix,
               *rational.losses.optimization_loss, 0.0, 0.02);
        runtime("4." + tag + "rational.runtime", "rational agent runtime, n = 1e5" + suffix, t_rational, 10.0);
        const auto [prior, t_prior] = timed(AgentSpec::prior());
        within("4." + tag + "prior.belief", "prior agent belief loss" + suffix,
               *prior.losses.belief_loss, 1.0, 0.02);
        within("4." + tag + "prior.opt", "prior agent optimization loss" + suffix,
               *prior.losses.optimization_loss, 0.0, 0.02);
        runtime("4." + tag + "prior.runtime", "prior agent runtime, n = 1e5" + suffix, t_prior, 10.0);
        const auto [random, t_random] = timed(AgentSpec::uniform_random());
        const double c = random.losses.calibrated;
        report("4." + tag + "random.calibrated", "random agent C within 3 s.e. of R0" + suffix,
               std::abs(c - r.baseline) <= 3.0 * random.calibrated_se,
               fmt::format("{:.5f} vs {:.5f}, 3 s.e. {:.4f}", c, r.baseline, 3.0 * random.calibrated_se));
        runtime("4." + tag + "random.runtime", "random agent runtime, n = 1e5" + suffix, t_random, 10.0);
    }
}

ExperimentDesign design_from(const oracle::Problem& p,
                             const std::vector<std::vector<std::vector<double>>>& joints) {
    ExperimentDesign d;
    d.name = "random";
    std::vector<std::string> states, actions;
    for (std::size_t s = 0; s < p.states; ++s) states.push_back("s" + std::to_string(s));
    for (std::size_t a = 0; a < p.actions; ++a) actions.push_back("a" + std::to_string(a));
    d.states = StateSpace(states);
    d.actions = ActionSpace::list(actions);
    d.rule = MatrixRule{p.scores};
    for (std::size_t i = 0; i < joints.size(); ++i) {
        std::vector<std::string> signals;
        for (std::size_t v = 0; v < joints[i].size(); ++v) signals.push_back("v" + std::to_string(v));
        d.strategies.push_back({"k" + std::to_string(i), InformationStructure(signals, joints[i])});
    }
    return d;
}

void invariant_suite() {
    const auto start = std::chrono::steady_clock::now();
    constexpr int kProblems = 500;
    constexpr double eps = 1e-9;
    std::map<std::string, int> violations;
    std::mt19937_64 gen(77);
    for (int i = 0; i < kProblems; ++i) {
        const auto p = oracle::random_problem(gen);
        const auto garbled = oracle::garble(gen, p.joint, std::uniform_int_distribution<std::size_t>(1, 6)(gen));
        const auto d = design_from(p, {p.joint, garbled});
        const auto r = analyze(d);
        const double rv = r.strategies[0].visualization_optimal;
        const double rg = r.strategies[1].visualization_optimal;
        if (!(r.baseline <= rv + eps && rv <= r.benchmark + eps)) ++violations["R0 <= R_V <= R_V^R"];
        if (!(r.value_of_information >= 0.0)) ++violations["delta >= 0"];
        if (!(rg <= rv + eps)) ++violations["garbling never increases R_V"];

        // behavior: arbitrary signal-respecting kernels and parametric agents
        std::vector<std::vector<std::vector<double>>> kernels;
        std::vector<std::vector<double>> arbitrary;
        for (std::size_t v = 0; v < p.signals; ++v) arbitrary.push_back(oracle::simplex(gen, p.actions, 0.4));
        kernels.push_back(arbitrary);
        for (const auto& agent : {AgentSpec::rational(), AgentSpec::prior(), AgentSpec::uniform_random(),
                                  AgentSpec::lapsing(0.3, AgentSpec::rational())}) {
            kernels.push_back(policy_kernel(d, "k0", agent));
        }
        kernels.push_back(policy_kernel(d, "k0", AgentSpec::noisy(1.0), 200, static_cast<std::uint64_t>(i)));
        for (const auto& k : kernels) {
            const auto j = kernel_joint(d, "k0", k);
            const double c = calibrate(j, d.rule).score;
            const double b = behavioral_score(j, d.rule);
            if (!(c + eps >= std::max(b, r.baseline))) ++violations["C >= max(B, R0)"];
            if (!(c <= rv + eps)) ++violations["C <= R_V for signal-respecting agents"];
        }

        // propriety: truthful reports attain the optimum and beat misreports
        for (std::size_t v = 0; v < p.signals; ++v) {
            const auto truth = posterior(d.strategies[0].structure, v);
            const auto lie = Belief::normalized(oracle::simplex(gen, p.states));
            double truthful = 0.0, misreport = 0.0;
            for (std::size_t s = 0; s < p.states; ++s) {
                truthful += truth[s] * proper_score(d.rule, truth, s);
                misreport += truth[s] * proper_score(d.rule, lie, s);
            }
            if (std::abs(truthful - optimal_action(d.rule, truth).score) > 1e-9 ||
                misreport > truthful + eps) {
                ++violations["propriety of the induced proper score"];
            }
        }
    }
    int total = 0;
    std::string detail;
    for (const auto& [name, count] : violations) {
        total += count;
        detail += fmt::format("{}: {}; ", name, count);
    }
    report("5.violations", fmt::format("{} random problems, zero invariant violations", kProblems),
           total == 0, total == 0 ? "0 violations" : detail);
    runtime("5.runtime", "runtime", seconds_since(start), 60.0);
}

void monte_carlo_consistency() {
    const auto start = std::chrono::steady_clock::now();
    const auto cs = build_weather();
    const auto r = analyze(cs.design);
    const auto ci = *cs.design.strategy_index("CI");
    const auto problem = cs.design.problem(ci);
    const std::vector<std::size_t> constant(problem.structure.num_signals(), r.baseline_action);
    int baseline_hits = 0, optimal_hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto b = monte_carlo_score(problem, constant, 100000, seed);
        const auto o = monte_carlo_score(problem, r.strategies[ci].policy, 100000, seed);
        baseline_hits += std::abs(b.mean - r.baseline) <= 3.0 * b.standard_error;
        optimal_hits += std::abs(o.mean - r.strategies[ci].visualization_optimal) <= 3.0 * o.standard_error;
    }
    report("6.baseline", "MC R0 within 3 s.e. in >= 99 of 100 seeds", baseline_hits >= 99,
           fmt::format("{} / 100", baseline_hits));
    report("6.optimal", "MC R_V(CI) within 3 s.e. in >= 99 of 100 seeds", optimal_hits >= 99,
           fmt::format("{} / 100", optimal_hits));
    fmt::print("    (monte carlo runtime {:.2f} s)\n", seconds_since(start));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism() {
    const auto dir = fs::temp_directory_path() / "ratbench_acceptance";
    fs::create_directories(dir);
    const auto trials = (dir / "trials.csv").string();
    {
        std::ostringstream out, err;
        run_cli({"simulate", "--case", "weather", "--agent", "noisy:k=0.8", "--n", "3000", "--seed",
                 "5", "--task", "belief", "--out", trials},
                out, err);
    }
    struct Command {
        std::string name;
        std::vector<std::string> args;
        std::vector<std::string> files;
    };
    const auto path = [&](const std::string& f) { return (dir / f).string(); };
    const std::vector<Command> commands = {
        {"pre", {"pre", "--case", "kale2020", "--out", path("pre.json")}, {"pre.json"}},
        {"pre monte-carlo",
         {"pre", "--case", "kale2020", "--incentive", "monte-carlo", "--incentive-experiments", "2000",
          "--seed", "3", "--out", path("pre_mc.json")},
         {"pre_mc.json"}},
        {"pre fernandes", {"pre", "--case", "fernandes2018", "--grid-step", "1", "--out", path("pre_f.json")},
         {"pre_f.json"}},
        {"post", {"post", "--case", "weather", "--trials", trials, "--out", path("post.json")}, {"post.json"}},
        {"simulate",
         {"simulate", "--case", "kale2020", "--agent", "lapse:l=0.2:noisy:k=0.5", "--n", "2000", "--seed",
          "11", "--out", path("sim.csv"), "--summary", path("sim.json")},
         {"sim.csv", "sim.json"}},
        {"export", {"export", "--case", "kale2020", "--out", path("export.json")}, {"export.json"}},
    };
    for (const auto& c : commands) {
        std::vector<std::string> runs;
        bool ok = true;
        for (int rep = 0; rep < 2; ++rep) {
            std::ostringstream out, err;
            ok = ok && run_cli(c.args, out, err) == kExitOk;
            std::string bytes;
            for (const auto& f : c.files) bytes += slurp(dir / f);
            runs.push_back(bytes);
            for (const auto& f : c.files) fs::remove(dir / f);
        }
        report("7." + c.name, fmt::format("{}: byte-identical outputs across runs", c.name),
               ok && !runs[0].empty() && runs[0] == runs[1], fmt::format("{} bytes", runs[0].size()));
    }
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
        {"weather exact reproduction", weather_reproduction},
        {"kale pre-experimental", kale_reproduction},
        {"transit property acceptance", transit_properties},
        {"decomposition recovery", decomposition_recovery},
        {"invariant suite", invariant_suite},
        {"monte carlo consistency", monte_carlo_consistency},
        {"determinism", determinism},
    };
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        fmt::print("== {}. {}\n", i + 1, criteria[i].first);
        try {
            criteria[i].second();
        } catch (const std::exception& e) {
            report(fmt::format("{}.error", i + 1), "criterion raised", false, e.what());
        }
    }
    fmt::print("\n{} passed, {} known deviations, {} unexpected failures\n", passed, known, unexpected);
    return unexpected == 0 ? 0 : 1;
}
