#include "ratbench/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ratbench/generative.hpp"

namespace ratbench {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw InputError(fmt::format("config: {} is missing '{}'", where, key));
    }
    return j.at(key);
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
    const auto& value = need(j, key, where);
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw InputError(fmt::format("config: {}.{} has the wrong type", where, key));
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return get<T>(j, key, where);
}

struct Grid {
    double lo, hi, step;
};

Grid read_grid(const json& j, const std::string& where) {
    return {get<double>(j, "lo", where), get<double>(j, "hi", where), get<double>(j, "step", where)};
}

StateSpace read_states(const json& j) {
    if (j.contains("grid")) {
        const auto g = read_grid(j.at("grid"), "states.grid");
        const auto values = uniform_grid(g.lo, g.hi, g.step);
        std::vector<std::string> ids;
        for (double v : values) ids.push_back(fmt::format("{}", v));
        return StateSpace(std::move(ids), {}, values);
    }
    return StateSpace(get<std::vector<std::string>>(j, "ids", "states"),
                      get_or<std::vector<std::string>>(j, "labels", {}, "states"),
                      get_or<std::vector<double>>(j, "values", {}, "states"));
}

ActionSpace read_actions(const json& j) {
    if (j.contains("grid")) {
        const auto g = read_grid(j.at("grid"), "actions.grid");
        return ActionSpace::grid(g.lo, g.hi, g.step);
    }
    if (j.contains("probability_report")) {
        return ActionSpace::probability_report(
            get<double>(j.at("probability_report"), "bin_width", "actions.probability_report"));
    }
    return ActionSpace::list(get<std::vector<std::string>>(j, "ids", "actions"));
}

ScoringRule read_rule(const json& j, const StateSpace& states, const ActionSpace& actions) {
    if (j.contains("matrix")) {
        return MatrixRule{get<std::vector<std::vector<double>>>(j, "matrix", "rule")};
    }
    const auto& t = need(j, "transit", "rule");
    TransitRule rule;
    rule.activity_rate = get<double>(t, "activity_rate", "rule.transit");
    rule.waiting_rate = get<double>(t, "waiting_rate", "rule.transit");
    rule.destination_rate = get<double>(t, "destination_rate", "rule.transit");
    rule.horizon = get<double>(t, "horizon", "rule.transit");
    rule.second_bus_offset = get_or<double>(t, "second_bus_offset", 30.0, "rule.transit");
    rule.miss_delay_includes_offset =
        get_or<bool>(t, "miss_delay_includes_offset", true, "rule.transit");
    const auto mode = get_or<std::string>(t, "mode", "plug_in", "rule.transit");
    if (mode == "plug_in") {
        rule.mode = SecondBusMode::PlugIn;
    } else if (mode == "full_expectation") {
        rule.mode = SecondBusMode::FullExpectation;
    } else {
        throw InputError(fmt::format("config: unknown second-bus mode '{}'", mode));
    }
    if (!states.has_values()) throw InputError("config: transit rules need numeric state values");
    rule.departures = actions.values();
    rule.arrivals = states.values();
    return rule;
}

std::vector<TrialDistribution> read_bct_trials(const json& j, const std::filesystem::path& base) {
    if (j.contains("file")) {
        std::filesystem::path file = get<std::string>(j, "file", "bct_trials");
        if (file.is_relative() && !base.empty()) file = base / file;
        return read_trial_distributions(file);
    }
    std::vector<TrialDistribution> out;
    for (const auto& t : need(j, "trials", "bct_trials")) {
        TrialDistribution td;
        td.trial_id = get<std::string>(t, "trial_id", "bct_trials.trials[]");
        td.dist = {get<double>(t, "mu", "bct_trials.trials[]"), get<double>(t, "sigma", "bct_trials.trials[]"),
                   get<double>(t, "nu", "bct_trials.trials[]"), get<double>(t, "tau", "bct_trials.trials[]")};
        check_parameters(td.dist);
        out.push_back(std::move(td));
    }
    return out;
}

InformationStructure read_structure(const json& j, const StateSpace& states,
                                    const std::filesystem::path& base, const std::string& name) {
    const std::string where = fmt::format("strategy '{}'", name);
    if (j.contains("joint")) {
        const auto& t = j.at("joint");
        return InformationStructure(get<std::vector<std::string>>(t, "signals", where + ".joint"),
                                    get<std::vector<std::vector<double>>>(t, "rows", where + ".joint"));
    }
    if (j.contains("gaussian_threshold")) {
        const auto& g = j.at("gaussian_threshold");
        GaussianThresholdDGM dgm;
        dgm.mean = get<double>(g, "mean", where);
        dgm.sigmas = get<std::vector<double>>(g, "sigmas", where);
        dgm.sigma_probabilities = get<std::vector<double>>(g, "sigma_probabilities", where);
        dgm.threshold = get<double>(g, "threshold", where);
        const auto dir = get_or<std::string>(g, "direction", "at_or_below", where);
        if (dir == "at_or_below") {
            dgm.direction = ThresholdDirection::AtOrBelow;
        } else if (dir == "at_or_above") {
            dgm.direction = ThresholdDirection::AtOrAbove;
        } else {
            throw InputError(fmt::format("config: {} has unknown direction '{}'", where, dir));
        }
        return weather_joint(dgm);
    }
    if (j.contains("two_team_pos")) {
        const auto& g = j.at("two_team_pos");
        TwoTeamDGM dgm;
        dgm.win_without = get_or<double>(g, "win_without", 0.5, where);
        if (g.contains("levels")) {
            dgm.pos_levels = get<std::vector<double>>(g, "levels", where);
            dgm.target_prior.reset();
        } else {
            const auto& sp = need(g, "spacing", where);
            const auto kind = get<std::string>(sp, "kind", where);
            PosSpacing spacing = PosSpacing::Linear;
            if (kind == "geometric") {
                spacing = PosSpacing::Geometric;
            } else if (kind == "log_odds") {
                spacing = PosSpacing::LogOdds;
            } else if (kind != "linear") {
                throw InputError(fmt::format("config: {} has unknown spacing '{}'", where, kind));
            }
            dgm.pos_levels = pos_levels(spacing, get<double>(sp, "lo", where), get<double>(sp, "hi", where),
                                        get<std::size_t>(sp, "n", where));
        }
        if (g.contains("target_prior")) {
            dgm.target_prior = g.at("target_prior").is_null()
                                   ? std::nullopt
                                   : std::optional<double>(get<double>(g, "target_prior", where));
        }
        return kale_joint(dgm);
    }
    if (j.contains("bct_trials")) {
        if (!states.has_values()) {
            throw InputError(fmt::format("config: {} needs numeric state values", where));
        }
        const auto trials = read_bct_trials(j.at("bct_trials"), base);
        if (trials.empty()) throw InputError(fmt::format("config: {} has no trials", where));
        const double weight = 1.0 / static_cast<double>(trials.size());
        std::vector<std::string> ids;
        std::vector<std::vector<double>> rows;
        for (const auto& td : trials) {
            auto cells = discretize([&](double x) { return boxcox_t_cdf(td.dist, x); }, states.values());
            for (double& m : cells.masses) m *= weight;
            ids.push_back(td.trial_id);
            rows.push_back(std::move(cells.masses));
        }
        return InformationStructure(std::move(ids), rows);
    }
    throw InputError(fmt::format(
        "config: {} needs one of joint, gaussian_threshold, two_team_pos, bct_trials", where));
}

ConversionRule read_conversion(const json& j) {
    ConversionRule c;
    const auto kind = get<std::string>(j, "kind", "conversion");
    if (kind == "affine") {
        c.kind = ConversionKind::Affine;
    } else if (kind == "floored_affine") {
        c.kind = ConversionKind::FlooredAffine;
    } else if (kind == "shifted_affine") {
        c.kind = ConversionKind::ShiftedAffine;
    } else {
        throw InputError(fmt::format("config: unknown conversion kind '{}'", kind));
    }
    c.base = get_or<double>(j, "base", 0.0, "conversion");
    c.rate = get<double>(j, "rate", "conversion");
    c.floor = get_or<double>(j, "floor", 0.0, "conversion");
    c.shift = get_or<double>(j, "shift", 0.0, "conversion");
    c.trials = get_or<int>(j, "trials", 1, "conversion");
    return c;
}

ReportMapping read_mapping(const json& j, const StateSpace& states) {
    ReportMapping m;
    const auto kind = get<std::string>(j, "kind", "report_mapping");
    if (kind == "binary_probability") {
        m.kind = ReportMapping::Kind::BinaryProbability;
    } else if (kind == "two_team_pos") {
        m.kind = ReportMapping::Kind::TwoTeamPos;
    } else {
        throw InputError(fmt::format("config: unknown report mapping '{}'", kind));
    }
    if (j.contains("target_state")) {
        const auto id = get<std::string>(j, "target_state", "report_mapping");
        const auto index = states.index_of(id);
        if (!index) throw InputError(fmt::format("config: unknown target state '{}'", id));
        m.target_state = *index;
    }
    return m;
}

}  // namespace

ExperimentDesign parse_design(std::string_view json_text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!root.is_object()) throw InputError("config must be a JSON object");
    const int version = get<int>(root, "schema_version", "config");
    if (version != kConfigSchemaVersion) {
        throw InputError(fmt::format("config schema_version {} is not supported (expected {})", version,
                                     kConfigSchemaVersion));
    }
    ExperimentDesign d;
    d.name = get_or<std::string>(root, "name", "config", "config");
    d.states = read_states(need(root, "states", "config"));
    d.actions = read_actions(need(root, "actions", "config"));
    d.rule = read_rule(need(root, "rule", "config"), d.states, d.actions);
    const auto& strategies = need(root, "strategies", "config");
    if (!strategies.is_array() || strategies.empty()) {
        throw InputError("config: strategies must be a non-empty array");
    }
    for (const auto& s : strategies) {
        const auto name = get<std::string>(s, "name", "strategy");
        d.strategies.push_back({name, read_structure(s, d.states, base_dir, name)});
    }
    if (root.contains("conversion") && !root.at("conversion").is_null()) {
        d.conversion = read_conversion(root.at("conversion"));
    }
    if (root.contains("report_mapping") && !root.at("report_mapping").is_null()) {
        d.report_mapping = read_mapping(root.at("report_mapping"), d.states);
    }
    require_valid(d);
    return d;
}

ExperimentDesign load_design(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open config '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_design(buffer.str(), path.parent_path());
}

std::string export_design(const ExperimentDesign& d) {
    json root;
    root["schema_version"] = kConfigSchemaVersion;
    root["name"] = d.name;

    json states;
    states["ids"] = d.states.ids();
    if (!d.states.labels().empty()) states["labels"] = d.states.labels();
    if (d.states.has_values()) states["values"] = d.states.values();
    root["states"] = states;

    json actions;
    switch (d.actions.kind()) {
        case ActionKind::List: actions["ids"] = d.actions.ids(); break;
        case ActionKind::Grid:
            actions["grid"] = {{"lo", d.actions.grid_lo()}, {"hi", d.actions.grid_hi()},
                               {"step", d.actions.grid_step()}};
            break;
        case ActionKind::ProbabilityReport:
            actions["probability_report"] = {{"bin_width", d.actions.bin_width()}};
            break;
    }
    root["actions"] = actions;

    if (const auto* m = d.rule.matrix()) {
        root["rule"] = {{"matrix", m->scores}};
    } else {
        const auto& t = *d.rule.transit();
        root["rule"] = {{"transit",
                         {{"activity_rate", t.activity_rate},
                          {"waiting_rate", t.waiting_rate},
                          {"destination_rate", t.destination_rate},
                          {"horizon", t.horizon},
                          {"second_bus_offset", t.second_bus_offset},
                          {"miss_delay_includes_offset", t.miss_delay_includes_offset},
                          {"mode", t.mode == SecondBusMode::PlugIn ? "plug_in" : "full_expectation"}}}};
    }

    json strategies = json::array();
    for (const auto& s : d.strategies) {
        std::vector<std::vector<double>> rows;
        for (std::size_t v = 0; v < s.structure.num_signals(); ++v) {
            const auto row = s.structure.row(v);
            rows.emplace_back(row.begin(), row.end());
        }
        strategies.push_back(
            {{"name", s.name}, {"joint", {{"signals", s.structure.signals()}, {"rows", rows}}}});
    }
    root["strategies"] = strategies;

    if (d.conversion) {
        const auto& c = *d.conversion;
        const char* kind = c.kind == ConversionKind::Affine          ? "affine"
                           : c.kind == ConversionKind::FlooredAffine ? "floored_affine"
                                                                     : "shifted_affine";
        root["conversion"] = {{"kind", kind},     {"base", c.base},   {"rate", c.rate},
                              {"floor", c.floor}, {"shift", c.shift}, {"trials", c.trials}};
    }
    if (d.report_mapping) {
        const auto& m = *d.report_mapping;
        json mapping;
        mapping["kind"] = m.kind == ReportMapping::Kind::BinaryProbability ? "binary_probability"
                                                                           : "two_team_pos";
        if (m.target_state < d.states.size()) mapping["target_state"] = d.states.ids()[m.target_state];
        root["report_mapping"] = mapping;
    }
    return root.dump(2) + "\n";
}

}  // namespace ratbench
