#include "ratbench/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "ratbench/generative.hpp"

namespace ratbench {

namespace {

std::optional<std::size_t> find_id(const std::vector<std::string>& ids, std::string_view id) {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

std::string format_number(double x) { return fmt::format("{}", x); }

}  // namespace

// ---------------------------------------------------------------------------
// StateSpace / ActionSpace

StateSpace::StateSpace(std::vector<std::string> ids, std::vector<std::string> labels,
                       std::vector<double> values)
    : ids_(std::move(ids)), labels_(std::move(labels)), values_(std::move(values)) {
    if (labels_.empty()) labels_ = ids_;
}

std::optional<std::size_t> StateSpace::index_of(std::string_view id) const {
    return find_id(ids_, id);
}

ActionSpace ActionSpace::list(std::vector<std::string> ids) {
    ActionSpace space;
    space.kind_ = ActionKind::List;
    space.values_.resize(ids.size());
    std::iota(space.values_.begin(), space.values_.end(), 0.0);
    space.ids_ = std::move(ids);
    return space;
}

ActionSpace ActionSpace::grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
        throw InputError(fmt::format("action grid [{}, {}] step {} is invalid", lo, hi, step));
    }
    ActionSpace space;
    space.kind_ = ActionKind::Grid;
    space.lo_ = lo;
    space.hi_ = hi;
    space.step_ = step;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = lo + step * static_cast<double>(i);
        space.values_.push_back(v);
        space.ids_.push_back(format_number(v));
    }
    return space;
}

ActionSpace ActionSpace::probability_report(double bin_width) {
    if (!(bin_width > 0.0 && bin_width <= 1.0)) {
        throw InputError(fmt::format("bin width {} must lie in (0, 1]", bin_width));
    }
    ActionSpace space;
    space.kind_ = ActionKind::ProbabilityReport;
    space.lo_ = 0.0;
    space.hi_ = 1.0;
    space.step_ = bin_width;
    const auto n = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
    for (std::size_t i = 0; i < n; ++i) {
        const double lower = space.bin_lower(i);
        const double upper = space.bin_upper(i);
        space.values_.push_back(0.5 * (lower + upper));
        space.ids_.push_back(i + 1 == n ? fmt::format("[{},{}]", lower, upper)
                                        : fmt::format("[{},{})", lower, upper));
    }
    return space;
}

double ActionSpace::bin_lower(std::size_t bin) const {
    return std::round(static_cast<double>(bin) * step_ * 1e12) / 1e12;
}

double ActionSpace::bin_upper(std::size_t bin) const {
    return std::min(1.0, bin_lower(bin + 1));
}

std::size_t ActionSpace::bin_of(double report) const {
    if (!(report >= 0.0 && report <= 1.0)) {
        throw InputError(fmt::format("probability report {} outside [0, 1]", report));
    }
    const auto bin = static_cast<std::size_t>(std::floor(report / step_ + 1e-9));
    return std::min(bin, ids_.size() - 1);
}

std::optional<std::size_t> ActionSpace::index_of(std::string_view id) const {
    return find_id(ids_, id);
}

// ---------------------------------------------------------------------------
// Belief

Belief Belief::normalized(std::vector<double> probabilities) {
    if (probabilities.empty()) throw InputError("belief is empty");
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InputError(fmt::format("belief entry {} is not a probability", p));
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw InputError(fmt::format("belief sums to {:.12g}, not 1", total));
    }
    for (double& p : probabilities) p /= total;
    return Belief(std::move(probabilities));
}

Belief Belief::from_weights(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InputError(fmt::format("weight {} is negative or not finite", w));
        }
        total += w;
    }
    if (!(total > 0.0)) throw InputError("weights have zero total mass");
    for (double& w : weights) w /= total;
    return Belief(std::move(weights));
}

Belief Belief::point_mass(std::size_t size, std::size_t index) {
    std::vector<double> p(size, 0.0);
    p.at(index) = 1.0;
    return Belief(std::move(p));
}

double Belief::mean(std::span<const double> values) const {
    double m = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) m += p_[i] * values[i];
    return m;
}

// ---------------------------------------------------------------------------
// Scoring rules

double TransitRule::payoff(double departure, double arrival, double second_arrival) const {
    if (departure <= arrival) {
        return activity_rate * departure + waiting_rate * (arrival - departure) +
               destination_rate * horizon;
    }
    const double delay =
        second_arrival - arrival + (miss_delay_includes_offset ? second_bus_offset : 0.0);
    return activity_rate * departure +
           waiting_rate * (second_arrival + second_bus_offset - departure) +
           destination_rate * (horizon - delay);
}

std::size_t ScoringRule::num_actions() const {
    if (const auto* m = matrix()) return m->scores.size();
    return transit()->departures.size();
}

std::size_t ScoringRule::num_states() const {
    if (const auto* m = matrix()) return m->scores.empty() ? 0 : m->scores.front().size();
    return transit()->arrivals.size();
}

double ScoringRule::payoff(std::size_t action, std::size_t state, const Belief& context) const {
    if (const auto* m = matrix()) return m->scores[action][state];
    const auto& t = *transit();
    return t.payoff(t.departures[action], t.arrivals[state], context.mean(t.arrivals));
}

double ScoringRule::realized_payoff(std::size_t action, std::size_t state,
                                    double second_arrival) const {
    if (const auto* m = matrix()) return m->scores[action][state];
    const auto& t = *transit();
    return t.payoff(t.departures[action], t.arrivals[state], second_arrival);
}

namespace {

void check_dimensions(const ScoringRule& rule, std::size_t action, const Belief& belief) {
    if (belief.size() != rule.num_states()) {
        throw InputError(fmt::format("belief has {} states but the rule expects {}",
                                     belief.size(), rule.num_states()));
    }
    if (action >= rule.num_actions()) {
        throw InputError(fmt::format("action index {} out of range ({} actions)", action,
                                     rule.num_actions()));
    }
}

double transit_expected(const TransitRule& t, std::size_t action, const Belief& belief) {
    const double a = t.departures[action];
    const auto& theta = t.arrivals;
    double total = 0.0;
    if (t.mode == SecondBusMode::PlugIn) {
        const double second = belief.mean(theta);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (belief[i] > 0.0) total += belief[i] * t.payoff(a, theta[i], second);
        }
        return total;
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (belief[i] == 0.0) continue;
        if (a <= theta[i]) {
            total += belief[i] * t.payoff(a, theta[i], 0.0);
            continue;
        }
        double inner = 0.0;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            if (belief[j] > 0.0) inner += belief[j] * t.payoff(a, theta[i], theta[j]);
        }
        total += belief[i] * inner;
    }
    return total;
}

}  // namespace

double expected_score(const ScoringRule& rule, std::size_t action, const Belief& belief) {
    check_dimensions(rule, action, belief);
    if (const auto* t = rule.transit()) return transit_expected(*t, action, belief);
    const auto& row = rule.matrix()->scores[action];
    double total = 0.0;
    for (std::size_t s = 0; s < row.size(); ++s) total += belief[s] * row[s];
    return total;
}

Choice optimal_action(const ScoringRule& rule, const Belief& belief) {
    if (rule.num_actions() == 0) throw InputError("action space is empty");
    Choice best{0, expected_score(rule, 0, belief)};
    for (std::size_t a = 1; a < rule.num_actions(); ++a) {
        const double score = expected_score(rule, a, belief);
        if (score > best.score) best = {a, score};
    }
    return best;
}

double proper_score(const ScoringRule& rule, const Belief& reported, std::size_t state) {
    if (state >= rule.num_states()) {
        throw InputError(fmt::format("state index {} out of range", state));
    }
    return rule.payoff(optimal_action(rule, reported).action, state, reported);
}

MatrixRule tabulate(const TransitRule& rule, double second_arrival) {
    MatrixRule m;
    m.scores.resize(rule.departures.size());
    for (std::size_t a = 0; a < rule.departures.size(); ++a) {
        for (double theta : rule.arrivals) {
            m.scores[a].push_back(rule.payoff(rule.departures[a], theta, second_arrival));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Information structures

InformationStructure::InformationStructure(std::vector<std::string> signals,
                                           std::size_t num_states, std::vector<double> joint)
    : signals_(std::move(signals)), num_states_(num_states), joint_(std::move(joint)) {
    if (joint_.size() != signals_.size() * num_states_) {
        throw InputError(fmt::format("joint has {} entries, expected {} signals x {} states",
                                     joint_.size(), signals_.size(), num_states_));
    }
}

InformationStructure::InformationStructure(std::vector<std::string> signals,
                                           const std::vector<std::vector<double>>& rows) {
    if (rows.size() != signals.size()) {
        throw InputError(fmt::format("joint has {} rows for {} signals", rows.size(),
                                     signals.size()));
    }
    num_states_ = rows.empty() ? 0 : rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != num_states_) throw InputError("joint rows have unequal lengths");
        joint_.insert(joint_.end(), r.begin(), r.end());
    }
    signals_ = std::move(signals);
}

std::optional<std::size_t> InformationStructure::signal_index(std::string_view id) const {
    return find_id(signals_, id);
}

std::span<const double> InformationStructure::row(std::size_t signal) const {
    return std::span<const double>(joint_).subspan(signal * num_states_, num_states_);
}

double InformationStructure::signal_mass(std::size_t signal) const {
    const auto r = row(signal);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

double InformationStructure::total_mass() const {
    return std::accumulate(joint_.begin(), joint_.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Report mappings

Belief report_to_belief(const ReportMapping& mapping, double report, std::size_t num_states) {
    if (!(report >= 0.0 && report <= 1.0)) {
        throw InputError(fmt::format("probability report {} outside [0, 1]", report));
    }
    switch (mapping.kind) {
        case ReportMapping::Kind::BinaryProbability: {
            if (num_states != 2 || mapping.target_state > 1) {
                throw InputError("binary report mapping needs a two-state space");
            }
            std::vector<double> p(2);
            p[mapping.target_state] = report;
            p[1 - mapping.target_state] = 1.0 - report;
            return Belief::normalized(std::move(p));
        }
        case ReportMapping::Kind::TwoTeamPos: {
            if (num_states != 4) throw InputError("two-team report mapping needs four states");
            const double w = pos_to_win_probability(report);
            return Belief::normalized({0.5 * (1 - w), 0.5 * w, 0.5 * (1 - w), 0.5 * w});
        }
    }
    throw InputError("unknown report mapping");
}

double belief_to_report(const ReportMapping& mapping, const Belief& belief) {
    switch (mapping.kind) {
        case ReportMapping::Kind::BinaryProbability:
            return belief[mapping.target_state];
        case ReportMapping::Kind::TwoTeamPos:
            return win_probability_to_pos(belief[1] + belief[3]);
    }
    throw InputError("unknown report mapping");
}

// ---------------------------------------------------------------------------
// Designs and validation

DecisionProblem ExperimentDesign::problem(std::size_t strategy) const {
    return {states, actions, rule, strategies.at(strategy).structure};
}

std::optional<std::size_t> ExperimentDesign::strategy_index(std::string_view wanted) const {
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        if (strategies[i].name == wanted) return i;
    }
    return std::nullopt;
}

namespace {

void validate_states(const StateSpace& states, std::vector<std::string>& out) {
    if (states.size() == 0) out.push_back("state space is empty");
    std::unordered_set<std::string> seen;
    for (const auto& id : states.ids()) {
        if (!seen.insert(id).second) out.push_back(fmt::format("duplicate state id '{}'", id));
    }
    if (states.labels().size() != states.size()) out.push_back("state labels do not match ids");
    if (states.has_values() && states.values().size() != states.size()) {
        out.push_back("state values do not match ids");
    }
}

void validate_rule(const ScoringRule& rule, const StateSpace& states, const ActionSpace& actions,
                   std::vector<std::string>& out) {
    if (const auto* m = rule.matrix()) {
        if (m->scores.size() != actions.size()) {
            out.push_back(fmt::format("dimension: matrix has {} action rows, action space has {}",
                                      m->scores.size(), actions.size()));
        }
        for (std::size_t a = 0; a < m->scores.size(); ++a) {
            if (m->scores[a].size() != states.size()) {
                out.push_back(fmt::format("dimension: matrix row {} has {} columns, state space has {}",
                                          a, m->scores[a].size(), states.size()));
                break;
            }
        }
        for (const auto& row : m->scores) {
            if (std::any_of(row.begin(), row.end(), [](double x) { return !std::isfinite(x); })) {
                out.push_back("matrix contains non-finite scores");
                break;
            }
        }
        return;
    }
    const auto& t = *rule.transit();
    for (double x : {t.activity_rate, t.waiting_rate, t.destination_rate, t.horizon,
                     t.second_bus_offset}) {
        if (!std::isfinite(x)) {
            out.push_back("transit parameters must be finite");
            break;
        }
    }
    if (!(t.horizon > 0.0)) out.push_back("transit horizon T must be positive");
    if (t.arrivals.size() != states.size()) {
        out.push_back(fmt::format("dimension: transit rule has {} arrival values, state space has {}",
                                  t.arrivals.size(), states.size()));
    }
    if (t.departures.size() != actions.size()) {
        out.push_back(fmt::format("dimension: transit rule has {} departures, action space has {}",
                                  t.departures.size(), actions.size()));
    }
}

void validate_structure(const InformationStructure& s, std::size_t num_states,
                        const std::string& where, std::vector<std::string>& out) {
    if (s.num_states() != num_states) {
        out.push_back(fmt::format("dimension: {} joint has {} state columns, state space has {}",
                                  where, s.num_states(), num_states));
        return;
    }
    if (s.num_signals() == 0) out.push_back(fmt::format("{} has no signals", where));
    std::unordered_set<std::string> seen;
    for (const auto& id : s.signals()) {
        if (!seen.insert(id).second) out.push_back(fmt::format("{}: duplicate signal '{}'", where, id));
    }
    const auto joint = s.joint();
    if (std::any_of(joint.begin(), joint.end(), [](double x) { return !(x >= 0.0) || !std::isfinite(x); })) {
        out.push_back(fmt::format("{}: joint has negative or non-finite entries", where));
    }
    const double total = s.total_mass();
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        out.push_back(fmt::format("{}: joint mass {:.12g} != 1", where, total));
    }
    for (std::size_t v = 0; v < s.num_signals(); ++v) {
        if (!(s.signal_mass(v) > 0.0)) {
            out.push_back(fmt::format("{}: signal '{}' has zero mass", where, s.signals()[v]));
        }
    }
}

}  // namespace

std::vector<std::string> validate(const DecisionProblem& problem) {
    std::vector<std::string> out;
    validate_states(problem.states, out);
    if (problem.actions.size() == 0) out.push_back("action space is empty");
    validate_rule(problem.rule, problem.states, problem.actions, out);
    validate_structure(problem.structure, problem.states.size(), "structure", out);
    return out;
}

std::vector<std::string> validate(const ExperimentDesign& design) {
    std::vector<std::string> out;
    validate_states(design.states, out);
    if (design.actions.size() == 0) out.push_back("action space is empty");
    validate_rule(design.rule, design.states, design.actions, out);
    if (design.strategies.empty()) out.push_back("design has no strategies");
    std::unordered_set<std::string> names;
    for (const auto& s : design.strategies) {
        if (!names.insert(s.name).second) {
            out.push_back(fmt::format("duplicate strategy '{}'", s.name));
        }
        validate_structure(s.structure, design.states.size(), fmt::format("strategy '{}'", s.name), out);
    }
    if (!out.empty()) return out;

    // Every strategy must be a different view of the same data-generating process.
    const auto& first = design.strategies.front().structure;
    std::vector<double> reference(design.states.size(), 0.0);
    for (std::size_t v = 0; v < first.num_signals(); ++v) {
        for (std::size_t s = 0; s < reference.size(); ++s) reference[s] += first.mass(v, s);
    }
    for (const auto& strategy : design.strategies) {
        std::vector<double> marginal(reference.size(), 0.0);
        for (std::size_t v = 0; v < strategy.structure.num_signals(); ++v) {
            for (std::size_t s = 0; s < marginal.size(); ++s) marginal[s] += strategy.structure.mass(v, s);
        }
        for (std::size_t s = 0; s < marginal.size(); ++s) {
            if (std::abs(marginal[s] - reference[s]) > 1e-6) {
                out.push_back(fmt::format("strategy '{}' has a different state prior", strategy.name));
                break;
            }
        }
    }
    if (design.conversion && !std::isfinite(design.conversion->rate)) {
        out.push_back("conversion rate must be finite");
    }
    if (design.conversion && design.conversion->rate < 0.0) {
        out.push_back("conversion must be nondecreasing in score");
    }
    return out;
}

void require_valid(const ExperimentDesign& design) {
    const auto violations = validate(design);
    if (violations.empty()) return;
    std::string message = "invalid design:";
    for (const auto& v : violations) message += "\n  - " + v;
    throw InputError(message);
}

}  // namespace ratbench
