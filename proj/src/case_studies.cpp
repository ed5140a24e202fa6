#include "ratbench/case_studies.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace ratbench {

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Published: return "published";
        case Provenance::Analytic: return "analytic";
        case Provenance::ReferenceOnly: return "reference-only";
    }
    return "unknown";
}

bool ExpectedValue::matches(double computed) const {
    const double allowed = relative ? tolerance * std::abs(value) : tolerance;
    return std::abs(computed - value) <= allowed + 1e-12;
}

const ExpectedValue* CaseStudy::find(std::string_view quantity) const {
    for (const auto& e : expected) {
        if (e.quantity == quantity) return &e;
    }
    return nullptr;
}

namespace {

ExpectedValue published(std::string q, double v, double tol, std::string note = {}) {
    return {std::move(q), v, tol, false, Provenance::Published, std::move(note)};
}

ExpectedValue relative(std::string q, double v, double tol, std::string note = {}) {
    return {std::move(q), v, tol, true, Provenance::Published, std::move(note)};
}

ExpectedValue analytic(std::string q, double v, double tol, std::string note = {}) {
    return {std::move(q), v, tol, false, Provenance::Analytic, std::move(note)};
}

ExpectedValue reference(std::string q, double v, std::string note = {}) {
    return {std::move(q), v, 0.0, false, Provenance::ReferenceOnly, std::move(note)};
}

/// Collapses every signal of a structure into one.
InformationStructure uninformative(const InformationStructure& s, std::string signal) {
    std::vector<double> row(s.num_states(), 0.0);
    for (std::size_t v = 0; v < s.num_signals(); ++v) {
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += s.mass(v, k);
    }
    return InformationStructure({std::move(signal)}, s.num_states(), std::move(row));
}

}  // namespace

// ---------------------------------------------------------------------------

CaseStudy build_weather() {
    CaseStudy cs;
    cs.name = "weather";
    auto& d = cs.design;
    d.name = "weather";
    d.states = StateSpace({"not_freezing", "freezing"});
    d.actions = ActionSpace::list({"no_salt", "salt"});
    d.rule = MatrixRule{{{0.0, -100.0}, {-10.0, 0.0}}};

    GaussianThresholdDGM dgm;
    dgm.mean = 5.0;
    dgm.sigmas = {2.0, 3.0, 4.0, 5.0};
    dgm.sigma_probabilities = {0.25, 0.25, 0.25, 0.25};
    dgm.threshold = 0.0;
    dgm.direction = ThresholdDirection::AtOrBelow;
    const auto joint = weather_joint(dgm);

    d.strategies.push_back({"mean", uninformative(joint, "mean=5")});
    for (const char* name : {"CI", "gradient", "HOPs"}) d.strategies.push_back({name, joint});
    d.conversion = ConversionRule{ConversionKind::Affine, 1.0, 0.01, 0.0, 0.0, 1};
    d.report_mapping = ReportMapping{ReportMapping::Kind::BinaryProbability, 1};

    cs.expected = {
        published("baseline", -7.96, 0.005),
        published("visualization_optimal:CI", -5.69, 0.005),
        published("visualization_optimal:gradient", -5.69, 0.005),
        published("visualization_optimal:HOPs", -5.69, 0.005),
        published("visualization_optimal:mean", -7.96, 0.005),
        published("benchmark", -5.69, 0.005),
        published("value_of_information", 2.27, 0.01),
        published("information_loss:mean", 1.0, 1e-9),
        published("information_loss:CI", 0.0, 1e-9),
        published("incentive:paid_baseline", 0.920, 0.001),
        published("incentive:paid_optimal", 0.943, 0.001),
        published("incentive:difference", 0.023, 0.001),
        published("incentive:ratio", 0.025, 0.0005, "printed to one decimal of a percent"),
    };
    return cs;
}

// ---------------------------------------------------------------------------

double hiring_threshold(const MatrixRule& rule, double win_without) {
    // No hire pays on theta0, hire pays on theta1: solve
    // keep(win_without) = hire_lose + (hire_win - hire_lose) * w.
    const auto& keep = rule.scores.at(0);
    const auto& hire = rule.scores.at(1);
    const double keep_value = (1.0 - win_without) * keep.at(0) + win_without * keep.at(2);
    const double lose = hire.at(0);
    const double win = hire.at(1);
    if (win == lose) throw InputError("hiring payoff does not depend on the outcome");
    return (keep_value - lose) / (win - lose);
}

CaseStudy build_kale(const KaleOptions& options) {
    CaseStudy cs;
    cs.name = "kale2020";
    auto& d = cs.design;
    d.name = "kale2020";
    d.states = StateSpace({"lose_lose", "lose_win", "win_lose", "win_win"},
                          {"lose without, lose with", "lose without, win with",
                           "win without, lose with", "win without, win with"});
    d.actions = ActionSpace::list({"no_hire", "hire"});
    const MatrixRule rule{{{0.0, 0.0, 3.17, 3.17}, {-1.0, 2.17, -1.0, 2.17}}};
    d.rule = rule;

    TwoTeamDGM dgm;
    if (options.levels) {
        dgm.pos_levels = *options.levels;
        dgm.target_prior.reset();
    } else {
        dgm.pos_levels = pos_levels(options.spacing, 0.55, 0.95, 8);
    }
    const auto joint = kale_joint(dgm);
    for (const char* vis : {"QDP", "HOPs", "interval", "density"}) {
        d.strategies.push_back({fmt::format("{}", vis), joint});
        d.strategies.push_back({fmt::format("{}+means", vis), joint});
    }
    // Accounts start at 108M and pay $0.08 per 1M above 150M over 32 trials.
    d.conversion = ConversionRule{ConversionKind::FlooredAffine, 1.0, 0.08, 150.0 - 108.0, 0.0, 32};
    d.report_mapping = ReportMapping{ReportMapping::Kind::TwoTeamPos, 1};

    double prior_win = 0.0;
    for (std::size_t v = 0; v < joint.num_signals(); ++v) prior_win += joint.mass(v, 1) + joint.mass(v, 3);
    const double threshold = hiring_threshold(rule, dgm.win_without);
    cs.facts = {{"prior_win_probability", prior_win}, {"hiring_threshold", threshold}};

    cs.expected = {
        published("prior_win_probability", 0.805, 0.005),
        published("hiring_threshold", 0.8155, 0.0005),
        published("baseline", 1.575, 0.025, "band [1.55, 1.60]; printed 1.57, analytic 1.585"),
        analytic("baseline_analytic", 1.585, 1e-9, "3.17 * 0.5"),
        published("benchmark", 1.77, 0.03),
        published("value_of_information", 0.20, 0.03),
        relative("incentive:paid_baseline", 1.66, 0.05),
        relative("incentive:paid_optimal", 2.17, 0.05),
        relative("incentive:difference", 0.51, 0.05),
        relative("incentive:ratio", 0.3072, 0.05),
    };
    return cs;
}

// ---------------------------------------------------------------------------

TransitScenario transit_scenario(int scenario) {
    switch (scenario) {
        case 1: return {8.0, -14.0, 14.0, 90.0, 0.01698};
        case 2: return {14.0, -14.0, 14.0, 60.0, 0.08228};
        case 3: return {8.0, -17.0, 17.0, 120.0, 0.016076};
    }
    throw InputError(fmt::format("transit scenario must be 1, 2 or 3, got {}", scenario));
}

const std::vector<std::pair<std::string, double>>& text_displays() {
    static const std::vector<std::pair<std::string, double>> displays{
        {"text60", 0.60}, {"text85", 0.85}, {"text99", 0.99}};
    return displays;
}

std::filesystem::path default_distribution_file() {
    return std::filesystem::path(RATBENCH_DATA_DIR) / "fernandes_example_dists.csv";
}

namespace {

constexpr const char* kFullInformation[] = {"dot20", "dot50", "cdf", "pdf",
                                            "pdf_interval", "interval", "none"};

struct TransitReference {
    double baseline, full, text60, text85, text99, delta;
    double loss60, loss85, loss99;
    double paid_baseline, paid_optimal, difference, ratio, baseline_share;
};

const TransitReference& transit_reference(int scenario) {
    static const TransitReference refs[] = {
        {1078.7, 1171.8, 1170.3, 1171.0, 1165.0, 93.1, 0.016, 0.009, 0.073, 1.983, 2.046, 0.063,
         0.0312, 0.921},
        {767.5, 852.0, 851.5, 851.6, 848.1, 84.6, 0.007, 0.006, 0.047, 3.776, 4.054, 0.287, 0.0737,
         0.901},
        {1850.2, 1919.4, 1918.7, 1918.3, 1914.9, 69.3, 0.012, 0.016, 0.065, 2.440, 2.484, 0.044,
         0.0182, 0.964},
    };
    return refs[scenario - 1];
}

}  // namespace

CaseStudy build_fernandes(const FernandesOptions& options) {
    const auto path =
        options.distributions.empty() ? default_distribution_file() : options.distributions;
    if (!std::filesystem::exists(path)) {
        throw InputError(fmt::format("arrival distribution file '{}' not found", path.string()));
    }
    return build_fernandes(options, read_trial_distributions(path));
}

CaseStudy build_fernandes(const FernandesOptions& options,
                          const std::vector<TrialDistribution>& distributions) {
    const auto sc = transit_scenario(options.scenario);
    if (distributions.empty()) throw InputError("no arrival distributions supplied");
    if (options.trials < 1) throw InputError("trial count must be at least 1");
    if (!(options.grid_step > 0.0 && options.grid_step <= 30.0)) {
        throw InputError(fmt::format("grid step {} must lie in (0, 30]", options.grid_step));
    }
    {
        std::set<std::string> seen;
        for (const auto& td : distributions) {
            if (!seen.insert(td.trial_id).second) {
                throw InputError(fmt::format("duplicate trial id '{}' in distribution file", td.trial_id));
            }
        }
    }

    CaseStudy cs;
    cs.name = "fernandes2018";
    auto& d = cs.design;
    d.name = fmt::format("fernandes2018-s{}", options.scenario);

    const auto grid = uniform_grid(0.0, 30.0, options.grid_step);
    std::vector<std::string> state_ids;
    for (double g : grid) state_ids.push_back(fmt::format("{}", g));
    d.states = StateSpace(std::move(state_ids), {}, grid);
    d.actions = ActionSpace::grid(0.0, 30.0, 1.0);

    TransitRule rule;
    rule.activity_rate = sc.activity_rate;
    rule.waiting_rate = sc.waiting_rate;
    rule.destination_rate = sc.destination_rate;
    rule.horizon = sc.horizon;
    rule.mode = options.mode;
    rule.miss_delay_includes_offset = options.miss_delay_includes_offset;
    rule.departures = d.actions.values();
    rule.arrivals = grid;
    d.rule = rule;

    const double weight = 1.0 / static_cast<double>(distributions.size());
    std::vector<std::vector<double>> rows;
    std::vector<std::string> trial_ids;
    for (const auto& td : distributions) {
        check_parameters(td.dist);
        const auto cells = discretize([&](double x) { return boxcox_t_cdf(td.dist, x); }, grid);
        auto row = cells.masses;
        for (double& m : row) m *= weight;
        rows.push_back(std::move(row));
        trial_ids.push_back(td.trial_id);
    }
    const InformationStructure full(trial_ids, rows);
    for (const char* name : kFullInformation) d.strategies.push_back({name, full});

    for (const auto& [name, level] : text_displays()) {
        std::vector<std::string> labels;
        switch (options.text_partition.kind) {
            case TextPartition::Kind::Identity:
                labels = trial_ids;
                break;
            case TextPartition::Kind::QuantileRounding:
                for (const auto& td : distributions) {
                    labels.push_back(fmt::format(
                        "q{}<={}min", name.substr(4), std::lround(boxcox_t_quantile(td.dist, level))));
                }
                break;
            case TextPartition::Kind::Explicit: {
                const auto it = options.text_partition.labels.find(name);
                if (it == options.text_partition.labels.end()) {
                    throw InputError(fmt::format("text partition has no labels for '{}'", name));
                }
                for (const auto& id : trial_ids) {
                    const auto label = it->second.find(id);
                    if (label == it->second.end()) {
                        throw InputError(
                            fmt::format("text partition for '{}' has no label for trial '{}'", name, id));
                    }
                    labels.push_back(label->second);
                }
                break;
            }
        }
        std::vector<std::string> signals;
        std::vector<std::vector<double>> merged;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            std::size_t k = 0;
            while (k < signals.size() && signals[k] != labels[i]) ++k;
            if (k == signals.size()) {
                signals.push_back(labels[i]);
                merged.emplace_back(grid.size(), 0.0);
            }
            for (std::size_t s = 0; s < grid.size(); ++s) merged[k][s] += rows[i][s];
        }
        d.strategies.push_back({name, InformationStructure(std::move(signals), merged)});
    }

    d.conversion =
        ConversionRule{ConversionKind::Affine, 1.25, sc.dollars_per_thousand / 1000.0, 0.0, 0.0,
                       options.trials};

    const auto& ref = transit_reference(options.scenario);
    const std::string needs = "needs the original arrival distributions";
    cs.expected = {
        analytic("conversion_base", 1.25, 0.0),
        analytic("dollars_per_thousand_points", sc.dollars_per_thousand, 0.0),
        reference("baseline", ref.baseline, needs),
        reference("visualization_optimal:full", ref.full, needs),
        reference("visualization_optimal:text60", ref.text60, needs),
        reference("visualization_optimal:text85", ref.text85, needs),
        reference("visualization_optimal:text99", ref.text99, needs),
        reference("value_of_information", ref.delta, needs),
        reference("information_loss:text60", ref.loss60, needs),
        reference("information_loss:text85", ref.loss85, needs),
        reference("information_loss:text99", ref.loss99, needs),
        reference("incentive:paid_baseline", ref.paid_baseline, needs),
        reference("incentive:paid_optimal", ref.paid_optimal, needs),
        reference("incentive:difference", ref.difference, needs),
        reference("incentive:ratio", ref.ratio, needs),
        reference("baseline_share_of_benchmark", ref.baseline_share, needs),
    };
    if (options.scenario == 2) {
        cs.expected.push_back(analytic("payoff(a=10,theta=10)", 980.0, 1e-9));
    }
    return cs;
}

CaseStudy build_case(std::string_view name, const FernandesOptions& fernandes) {
    if (name == "weather") return build_weather();
    if (name == "kale2020") return build_kale();
    if (name == "fernandes2018") return build_fernandes(fernandes);
    throw InputError(
        fmt::format("unknown case '{}'; expected weather, kale2020 or fernandes2018", name));
}

}  // namespace ratbench
