#include "ratbench/behavioral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"

namespace ratbench {

namespace {

constexpr std::size_t kMaxListedIds = 20;

std::string list_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < kMaxListedIds; ++i) {
        if (i) out += ", ";
        out += ids[i];
    }
    if (ids.size() > kMaxListedIds) out += fmt::format(", ... ({} total)", ids.size());
    return out;
}

std::optional<double> parse_double(const std::string& text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

const char* kind_name(ResponseKind kind) {
    return kind == ResponseKind::Action ? "action" : "probability";
}

}  // namespace

// ---------------------------------------------------------------------------
// Trial CSV

std::vector<TrialRecord> parse_trials(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("trial CSV is empty");
    detail::strip_bom(line);
    const auto header = detail::split_csv_line(line);
    const std::vector<std::string> expected{"trial_id", "strategy",      "signal",
                                            "state",    "response_kind", "response"};
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
    for (const auto& name : expected) {
        if (!column.count(name)) {
            throw InputError(fmt::format("trial CSV header is missing column '{}'", name));
        }
    }

    std::vector<TrialRecord> records;
    std::vector<std::string> problems;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::is_blank(line)) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            problems.push_back(fmt::format("line {}: expected {} fields, found {}", line_number,
                                           header.size(), fields.size()));
            continue;
        }
        TrialRecord r;
        r.trial_id = fields[column["trial_id"]];
        r.strategy = fields[column["strategy"]];
        r.signal = fields[column["signal"]];
        r.state = fields[column["state"]];
        const auto& kind = fields[column["response_kind"]];
        const auto& response = fields[column["response"]];
        if (kind == "action") {
            r.kind = ResponseKind::Action;
            r.action = response;
        } else if (kind == "probability") {
            r.kind = ResponseKind::Probability;
            const auto value = parse_double(response);
            if (!value || *value < 0.0 || *value > 1.0) {
                problems.push_back(fmt::format("line {} (trial {}): probability report '{}' is "
                                               "not a number in [0, 1]",
                                               line_number, r.trial_id, response));
                continue;
            }
            r.report = *value;
        } else {
            problems.push_back(fmt::format("line {} (trial {}): unknown response_kind '{}'",
                                           line_number, r.trial_id, kind));
            continue;
        }
        records.push_back(std::move(r));
    }
    if (!problems.empty()) {
        std::string message = "malformed trial CSV:";
        for (const auto& p : problems) message += "\n  " + p;
        throw InputError(message);
    }
    if (records.empty()) throw InputError("trial CSV has no records");
    return records;
}

std::vector<TrialRecord> read_trials(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open trial file '{}'", path.string()));
    return parse_trials(in);
}

void write_trials(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << "trial_id,strategy,signal,state,response_kind,response\n";
    for (const auto& r : records) {
        const std::string response =
            r.kind == ResponseKind::Action ? r.action : fmt::format("{}", r.report);
        out << r.trial_id << ',' << r.strategy << ',' << r.signal << ',' << r.state << ','
            << kind_name(r.kind) << ',' << response << '\n';
    }
}

// ---------------------------------------------------------------------------
// Empirical joint

double EmpiricalJoint::action_mass(std::size_t a) const {
    double total = 0.0;
    for (double m : masses[a]) total += m;
    return total;
}

std::optional<Belief> EmpiricalJoint::conditional(std::size_t a) const {
    if (!(action_mass(a) > 0.0)) return std::nullopt;
    return Belief::from_weights(masses[a]);
}

namespace {

void normalize(EmpiricalJoint& joint) {
    double total = 0.0;
    for (const auto& row : joint.counts) {
        for (double c : row) total += c;
    }
    if (!(total > 0.0)) throw InputError("empirical joint has no mass");
    joint.masses = joint.counts;
    for (auto& row : joint.masses) {
        for (double& m : row) m /= total;
    }
}

}  // namespace

EmpiricalJoint ingest(const std::vector<TrialRecord>& records, const ExperimentDesign& design,
                      const IngestOptions& options) {
    if (records.empty()) throw InputError("no trial records to ingest");
    if (!(options.smoothing_alpha >= 0.0) || !std::isfinite(options.smoothing_alpha)) {
        throw InputError("smoothing alpha must be a non-negative number");
    }
    const ResponseKind kind = records.front().kind;
    const std::size_t num_states = design.states.size();

    EmpiricalJoint joint;
    joint.num_states = num_states;
    joint.trials = records.size();
    if (kind == ResponseKind::Action) {
        joint.actions = design.actions;
        joint.provenance = JointProvenance::RawCounts;
        for (std::size_t a = 0; a < joint.actions.size(); ++a) joint.decision_action.push_back(a);
        joint.reported_belief.assign(joint.actions.size(), std::nullopt);
    } else {
        if (!design.report_mapping) {
            throw InputError(fmt::format("design '{}' has no report mapping for probability reports",
                                         design.name));
        }
        joint.actions = ActionSpace::probability_report(options.bin_width);
        joint.provenance = JointProvenance::BinnedReports;
        joint.bin_width = options.bin_width;
        for (double mid : joint.actions.values()) {
            auto belief = report_to_belief(*design.report_mapping, mid, num_states);
            joint.decision_action.push_back(optimal_action(design.rule, belief).action);
            joint.reported_belief.emplace_back(std::move(belief));
        }
    }
    joint.counts.assign(joint.actions.size(), std::vector<double>(num_states, 0.0));

    std::vector<std::string> mixed, bad_strategy, bad_signal, bad_state, bad_action;
    std::map<std::pair<std::size_t, std::size_t>, Belief> posteriors;
    for (const auto& r : records) {
        if (r.kind != kind) {
            mixed.push_back(r.trial_id);
            continue;
        }
        const auto strategy = design.strategy_index(r.strategy);
        if (!strategy) {
            bad_strategy.push_back(r.trial_id);
            continue;
        }
        const auto& structure = design.strategies[*strategy].structure;
        const auto signal = structure.signal_index(r.signal);
        if (!signal) bad_signal.push_back(r.trial_id);
        const auto state = design.states.index_of(r.state);
        if (!state) bad_state.push_back(r.trial_id);
        std::optional<std::size_t> action;
        if (kind == ResponseKind::Action) {
            action = design.actions.index_of(r.action);
            if (!action) bad_action.push_back(r.trial_id);
        } else if (r.report >= 0.0 && r.report <= 1.0) {
            action = joint.actions.bin_of(r.report);
        } else {
            bad_action.push_back(r.trial_id);
        }
        if (!signal || !state || !action) continue;

        if (options.weighting == StateWeighting::Realized) {
            joint.counts[*action][*state] += 1.0;
        } else {
            const auto key = std::make_pair(*strategy, *signal);
            auto it = posteriors.find(key);
            if (it == posteriors.end()) {
                it = posteriors.emplace(key, posterior(structure, *signal)).first;
            }
            for (std::size_t s = 0; s < num_states; ++s) joint.counts[*action][s] += it->second[s];
        }
    }

    std::vector<std::string> problems;
    if (!mixed.empty()) {
        problems.push_back(fmt::format("response kind differs from the first record ({}) in "
                                       "trials: {}",
                                       kind_name(kind), list_ids(mixed)));
    }
    if (!bad_strategy.empty()) {
        problems.push_back("unknown strategy in trials: " + list_ids(bad_strategy));
    }
    if (!bad_signal.empty()) problems.push_back("unknown signal in trials: " + list_ids(bad_signal));
    if (!bad_state.empty()) problems.push_back("unknown state in trials: " + list_ids(bad_state));
    if (!bad_action.empty()) {
        problems.push_back(fmt::format("invalid {} in trials: {}",
                                       kind == ResponseKind::Action ? "action" : "report",
                                       list_ids(bad_action)));
    }
    if (!problems.empty()) {
        std::string message = "trial records do not match the design:";
        for (const auto& p : problems) message += "\n  " + p;
        throw InputError(message);
    }

    if (options.smoothing_alpha > 0.0) {
        for (auto& row : joint.counts) {
            const bool observed = std::any_of(row.begin(), row.end(), [](double c) { return c > 0.0; });
            if (!observed) continue;
            for (double& c : row) c += options.smoothing_alpha;
        }
    }
    normalize(joint);
    return joint;
}

EmpiricalJoint joint_from_masses(const std::vector<std::vector<double>>& masses,
                                 std::size_t num_states) {
    EmpiricalJoint joint;
    joint.num_states = num_states;
    std::vector<std::string> ids;
    for (std::size_t a = 0; a < masses.size(); ++a) {
        if (masses[a].size() != num_states) {
            throw InputError(fmt::format("dimension: joint row {} has {} states, expected {}", a,
                                         masses[a].size(), num_states));
        }
        for (double m : masses[a]) {
            if (!(m >= 0.0)) throw InputError("joint masses must be non-negative");
        }
        ids.push_back(fmt::format("a{}", a));
        joint.decision_action.push_back(a);
    }
    joint.actions = ActionSpace::list(std::move(ids));
    joint.reported_belief.assign(masses.size(), std::nullopt);
    joint.counts = masses;
    normalize(joint);
    return joint;
}

// ---------------------------------------------------------------------------
// Scores and losses

double behavioral_score(const EmpiricalJoint& joint, const ScoringRule& rule) {
    double total = 0.0;
    for (std::size_t a = 0; a < joint.masses.size(); ++a) {
        const auto conditional = joint.conditional(a);
        if (!conditional) continue;
        const Belief& context = joint.reported_belief[a] ? *joint.reported_belief[a] : *conditional;
        const std::size_t played = joint.decision_action[a];
        for (std::size_t s = 0; s < joint.num_states; ++s) {
            const double m = joint.masses[a][s];
            if (m > 0.0) total += m * rule.payoff(played, s, context);
        }
    }
    return total;
}

Calibration calibrate(const EmpiricalJoint& joint, const ScoringRule& rule) {
    Calibration result;
    result.policy.assign(joint.masses.size(), std::nullopt);
    for (std::size_t a = 0; a < joint.masses.size(); ++a) {
        const auto conditional = joint.conditional(a);
        if (!conditional) continue;
        const auto choice = optimal_action(rule, *conditional);
        result.policy[a] = choice.action;
        result.score += joint.action_mass(a) * choice.score;
    }
    return result;
}

double behavioral_value_of_information(double behavioral, double baseline) {
    return std::max(behavioral - baseline, 0.0);
}

double belief_loss(double visualization_optimal, double calibrated, double delta) {
    if (!(delta > 0.0)) throw InputError("no information value to normalize by");
    return (visualization_optimal - calibrated) / delta;
}

double optimization_loss(double calibrated, double behavioral, double delta) {
    if (!(delta > 0.0)) throw InputError("no information value to normalize by");
    return (calibrated - behavioral) / delta;
}

std::vector<TrialRecord> decisions_from_beliefs(const std::vector<TrialRecord>& records,
                                                const ExperimentDesign& design) {
    if (!design.report_mapping) {
        throw InputError(fmt::format("design '{}' has no report mapping", design.name));
    }
    std::vector<TrialRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.kind != ResponseKind::Probability) {
            throw InputError(fmt::format("trial {} is not a probability report", r.trial_id));
        }
        const auto belief = report_to_belief(*design.report_mapping, r.report, design.states.size());
        TrialRecord d = r;
        d.kind = ResponseKind::Action;
        d.action = design.actions.ids()[optimal_action(design.rule, belief).action];
        d.report = 0.0;
        out.push_back(std::move(d));
    }
    return out;
}

LossReport decompose(const EmpiricalJoint& joint, const ScoringRule& rule, double baseline,
                     double visualization_optimal, double delta) {
    LossReport report;
    report.behavioral = behavioral_score(joint, rule);
    report.calibrated = calibrate(joint, rule).score;
    report.behavioral_value_of_information =
        behavioral_value_of_information(report.behavioral, baseline);
    if (delta > 0.0) {
        report.belief_loss = belief_loss(visualization_optimal, report.calibrated, delta);
        report.optimization_loss = optimization_loss(report.calibrated, report.behavioral, delta);
    }
    return report;
}

namespace {

constexpr double kLossSlack = 1e-9;

void flag(StrategyLoss& row, double baseline) {
    const auto& l = row.losses;
    if (l.behavioral < baseline) {
        row.warnings.push_back(fmt::format(
            "behavioral score {:.6g} is below the rational baseline {:.6g}: the data cannot reject "
            "that participants extracted no useful information",
            l.behavioral, baseline));
    }
    if (l.belief_loss && (*l.belief_loss < -kLossSlack || *l.belief_loss > 1.0 + kLossSlack)) {
        row.warnings.push_back(fmt::format("belief loss {:.6g} lies outside [0, 1]", *l.belief_loss));
    }
    if (l.optimization_loss &&
        (*l.optimization_loss < -kLossSlack || *l.optimization_loss > 1.0 + kLossSlack)) {
        row.warnings.push_back(
            fmt::format("optimization loss {:.6g} lies outside [0, 1]", *l.optimization_loss));
    }
    if (!l.belief_loss) {
        row.warnings.push_back("value of information is zero; losses are undefined");
    }
}

}  // namespace

std::vector<StrategyLoss> analyze_trials(const std::vector<TrialRecord>& records,
                                         const ExperimentDesign& design,
                                         const RationalReport& rational,
                                         const IngestOptions& options) {
    if (records.empty()) throw InputError("no trial records to analyze");
    // Validate everything up front so the error lists every offending trial.
    std::vector<TrialRecord> actions, reports;
    for (const auto& r : records) (r.kind == ResponseKind::Action ? actions : reports).push_back(r);
    if (!actions.empty()) ingest(actions, design, options);
    if (!reports.empty()) ingest(reports, design, options);

    std::map<std::pair<std::size_t, int>, std::vector<TrialRecord>> groups;
    for (const auto& r : records) {
        const auto index = *design.strategy_index(r.strategy);
        groups[{index, static_cast<int>(r.kind)}].push_back(r);
    }

    std::vector<StrategyLoss> rows;
    double n_total = 0.0, b_sum = 0.0, c_sum = 0.0, rv_sum = 0.0;
    for (const auto& [key, group] : groups) {
        StrategyLoss row;
        row.strategy = design.strategies[key.first].name;
        row.kind = static_cast<ResponseKind>(key.second);
        row.trials = group.size();
        row.visualization_optimal = rational.strategies[key.first].visualization_optimal;
        const auto joint = ingest(group, design, options);
        row.losses = decompose(joint, design.rule, rational.baseline, row.visualization_optimal,
                               rational.value_of_information);
        flag(row, rational.baseline);
        const double n = static_cast<double>(row.trials);
        n_total += n;
        b_sum += n * row.losses.behavioral;
        c_sum += n * row.losses.calibrated;
        rv_sum += n * row.visualization_optimal;
        rows.push_back(std::move(row));
    }

    if (rows.size() > 1) {
        StrategyLoss pooled;
        pooled.strategy = "pooled";
        pooled.kind = rows.front().kind;
        pooled.trials = records.size();
        pooled.visualization_optimal = rv_sum / n_total;
        auto& l = pooled.losses;
        l.behavioral = b_sum / n_total;
        l.calibrated = c_sum / n_total;
        l.behavioral_value_of_information =
            behavioral_value_of_information(l.behavioral, rational.baseline);
        if (rational.value_of_information > 0.0) {
            l.belief_loss =
                belief_loss(pooled.visualization_optimal, l.calibrated, rational.value_of_information);
            l.optimization_loss =
                optimization_loss(l.calibrated, l.behavioral, rational.value_of_information);
        }
        flag(pooled, rational.baseline);
        rows.push_back(std::move(pooled));
    }
    return rows;
}

}  // namespace ratbench
