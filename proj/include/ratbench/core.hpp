#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ratbench {

/// Tolerance applied to every probability vector and joint table.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Malformed user input: configs, CSV files, arguments, invalid designs.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computed quantity violated one of the framework's mathematical invariants.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite, ordered set of payoff-relevant states.
///
/// `values` is optional and only required by rules that read the numeric
/// value of a state (the transit rule reads arrival minutes).
class StateSpace {
public:
    StateSpace() = default;
    StateSpace(std::vector<std::string> ids, std::vector<std::string> labels = {},
               std::vector<double> values = {});

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<double>& values() const { return values_; }
    bool has_values() const { return !values_.empty(); }
    std::optional<std::size_t> index_of(std::string_view id) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::string> labels_;
    std::vector<double> values_;
};

enum class ActionKind { List, Grid, ProbabilityReport };

/// Finite action set. Grids and probability-report bins are expanded at
/// construction so every action has an index, an id and a numeric value.
class ActionSpace {
public:
    ActionSpace() = default;

    static ActionSpace list(std::vector<std::string> ids);
    static ActionSpace grid(double lo, double hi, double step);
    /// Half-open bins [k*w, (k+1)*w) over [0, 1]; the last bin is closed at 1.
    static ActionSpace probability_report(double bin_width);

    ActionKind kind() const { return kind_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<double>& values() const { return values_; }
    std::optional<std::size_t> index_of(std::string_view id) const;

    double grid_lo() const { return lo_; }
    double grid_hi() const { return hi_; }
    double grid_step() const { return step_; }
    double bin_width() const { return step_; }
    double bin_lower(std::size_t bin) const;
    double bin_upper(std::size_t bin) const;
    /// Bin holding a report in [0, 1].
    std::size_t bin_of(double report) const;

private:
    ActionKind kind_ = ActionKind::List;
    std::vector<std::string> ids_;
    std::vector<double> values_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    double step_ = 0.0;
};

/// Probability vector over a StateSpace.
class Belief {
public:
    Belief() = default;

    /// Accepts vectors that sum to 1 within kProbabilityTolerance and
    /// renormalizes them; anything further off, or negative, is rejected.
    static Belief normalized(std::vector<double> probabilities);
    /// Normalizes arbitrary non-negative weights with positive total.
    static Belief from_weights(std::vector<double> weights);
    static Belief point_mass(std::size_t size, std::size_t index);

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    std::span<const double> probabilities() const { return p_; }
    double mean(std::span<const double> values) const;

private:
    explicit Belief(std::vector<double> p) : p_(std::move(p)) {}
    std::vector<double> p_;
};

/// Score table S(a, theta), indexed [action][state].
struct MatrixRule {
    std::vector<std::vector<double>> scores;
};

enum class SecondBusMode {
    PlugIn,          ///< second arrival replaced by its mean under the belief
    FullExpectation  ///< explicit sum over the second arrival
};

/// Bus-catching payoff. Departure and arrival grids are the numeric values of
/// the action and state spaces the rule is evaluated on.
struct TransitRule {
    double activity_rate = 0.0;     ///< points per minute before leaving
    double waiting_rate = 0.0;      ///< points per minute at the stop, <= 0
    double destination_rate = 0.0;  ///< points per minute at the destination
    double horizon = 0.0;           ///< minutes available at the destination
    double second_bus_offset = 30.0;
    /// Missing the first bus delays arrival at the destination by
    /// second + offset - arrival; when false the offset is left out of the
    /// destination term.
    bool miss_delay_includes_offset = true;
    SecondBusMode mode = SecondBusMode::PlugIn;
    std::vector<double> departures;
    std::vector<double> arrivals;

    /// Realized payoff: the bus is caught iff departure <= arrival.
    double payoff(double departure, double arrival, double second_arrival) const;
};

class ScoringRule {
public:
    ScoringRule() = default;
    ScoringRule(MatrixRule rule) : rule_(std::move(rule)) {}
    ScoringRule(TransitRule rule) : rule_(std::move(rule)) {}

    std::size_t num_actions() const;
    std::size_t num_states() const;

    const MatrixRule* matrix() const { return std::get_if<MatrixRule>(&rule_); }
    const TransitRule* transit() const { return std::get_if<TransitRule>(&rule_); }

    /// S(a, theta) given the belief that determines the second-bus term.
    /// Matrix rules ignore the context belief.
    double payoff(std::size_t action, std::size_t state, const Belief& context) const;
    /// Realized payoff with an explicit second arrival (ignored by matrices).
    double realized_payoff(std::size_t action, std::size_t state, double second_arrival) const;

private:
    std::variant<MatrixRule, TransitRule> rule_;
};

struct Choice {
    std::size_t action = 0;
    double score = 0.0;
};

double expected_score(const ScoringRule& rule, std::size_t action, const Belief& belief);

/// Ties resolve to the lowest action index.
Choice optimal_action(const ScoringRule& rule, const Belief& belief);

/// Score of the action that is optimal under `reported`, in state `state`.
/// For transit rules the second-bus term uses the reported belief's mean.
double proper_score(const ScoringRule& rule, const Belief& reported, std::size_t state);

/// Transit rule frozen into a matrix for a fixed second arrival.
MatrixRule tabulate(const TransitRule& rule, double second_arrival);

/// Joint distribution over signals x states, stored row-major.
class InformationStructure {
public:
    InformationStructure() = default;
    InformationStructure(std::vector<std::string> signals, std::size_t num_states,
                         std::vector<double> joint);
    InformationStructure(std::vector<std::string> signals,
                         const std::vector<std::vector<double>>& rows);

    std::size_t num_signals() const { return signals_.size(); }
    std::size_t num_states() const { return num_states_; }
    const std::vector<std::string>& signals() const { return signals_; }
    std::optional<std::size_t> signal_index(std::string_view id) const;

    double mass(std::size_t signal, std::size_t state) const {
        return joint_[signal * num_states_ + state];
    }
    std::span<const double> row(std::size_t signal) const;
    std::span<const double> joint() const { return joint_; }
    double signal_mass(std::size_t signal) const;
    double total_mass() const;

private:
    std::vector<std::string> signals_;
    std::size_t num_states_ = 0;
    std::vector<double> joint_;
};

struct DecisionProblem {
    StateSpace states;
    ActionSpace actions;
    ScoringRule rule;
    InformationStructure structure;
};

enum class ConversionKind { Affine, FlooredAffine, ShiftedAffine };

/// Score-to-currency conversion. `trials` is the number of trials whose
/// scores accumulate before conversion.
struct ConversionRule {
    ConversionKind kind = ConversionKind::Affine;
    double base = 0.0;
    double rate = 0.0;
    double floor = 0.0;  ///< FlooredAffine threshold on the cumulative score
    double shift = 0.0;  ///< ShiftedAffine f0, in cumulative score units
    int trials = 1;
};

/// How a probability report in [0, 1] maps to a belief over the states.
struct ReportMapping {
    enum class Kind {
        BinaryProbability,  ///< report = P(target_state) on a two-state space
        TwoTeamPos          ///< probability of superiority on the four two-team states
    };
    Kind kind = Kind::BinaryProbability;
    std::size_t target_state = 1;
};

Belief report_to_belief(const ReportMapping& mapping, double report, std::size_t num_states);
double belief_to_report(const ReportMapping& mapping, const Belief& belief);

struct Strategy {
    std::string name;
    InformationStructure structure;
};

struct ExperimentDesign {
    std::string name;
    StateSpace states;
    ActionSpace actions;
    ScoringRule rule;
    std::vector<Strategy> strategies;
    std::optional<ConversionRule> conversion;
    std::optional<ReportMapping> report_mapping;

    DecisionProblem problem(std::size_t strategy) const;
    std::optional<std::size_t> strategy_index(std::string_view name) const;
};

/// All invariant violations, not just the first. Empty means valid.
std::vector<std::string> validate(const DecisionProblem& problem);
std::vector<std::string> validate(const ExperimentDesign& design);

/// Throws InputError listing every violation.
void require_valid(const ExperimentDesign& design);

}  // namespace ratbench
