#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ratbench/core.hpp"
#include "ratbench/rational.hpp"

namespace ratbench {

enum class ResponseKind { Action, Probability };

struct TrialRecord {
    std::string trial_id;
    std::string strategy;
    std::string signal;
    std::string state;
    ResponseKind kind = ResponseKind::Action;
    std::string action;   ///< decision tasks
    double report = 0.0;  ///< belief tasks, in [0, 1]
};

/// Trial CSV: trial_id,strategy,signal,state,response_kind,response
std::vector<TrialRecord> read_trials(const std::filesystem::path& path);
std::vector<TrialRecord> parse_trials(std::istream& in);
void write_trials(std::ostream& out, const std::vector<TrialRecord>& records);

enum class StateWeighting {
    Realized,        ///< each record counts its realized state
    SignalPosterior  ///< each record spreads over the posterior of its signal
};

struct IngestOptions {
    double bin_width = 0.02;
    double smoothing_alpha = 0.0;
    StateWeighting weighting = StateWeighting::Realized;
};

enum class JointProvenance { RawCounts, BinnedReports };

/// Empirical joint over (behavioral action, state).
struct EmpiricalJoint {
    ActionSpace actions;  ///< decision actions, or report bins
    std::size_t num_states = 0;
    std::vector<std::vector<double>> counts;  ///< [action][state], after smoothing
    std::vector<std::vector<double>> masses;  ///< counts normalized to 1
    /// Decision action played by each behavioral action. Bins map to the
    /// action that is optimal under the belief at the bin midpoint.
    std::vector<std::size_t> decision_action;
    /// Belief under which a bin's midpoint report is scored (belief tasks).
    std::vector<std::optional<Belief>> reported_belief;
    JointProvenance provenance = JointProvenance::RawCounts;
    double bin_width = 0.0;
    std::size_t trials = 0;

    double action_mass(std::size_t a) const;
    /// pi(theta | a); empty when the row has no mass.
    std::optional<Belief> conditional(std::size_t a) const;
};

/// Builds the empirical joint. Records must share one response kind.
/// Unknown strategies, signals, states or actions raise InputError listing
/// the offending trial ids.
EmpiricalJoint ingest(const std::vector<TrialRecord>& records, const ExperimentDesign& design,
                      const IngestOptions& options = {});

/// Exact joint from a mass table over the design's decision actions.
EmpiricalJoint joint_from_masses(const std::vector<std::vector<double>>& masses,
                                 std::size_t num_states);

double behavioral_score(const EmpiricalJoint& joint, const ScoringRule& rule);

struct Calibration {
    std::vector<std::optional<std::size_t>> policy;  ///< empty for zero-mass actions
    double score = 0.0;
};

Calibration calibrate(const EmpiricalJoint& joint, const ScoringRule& rule);

double behavioral_value_of_information(double behavioral, double baseline);
/// (visualization optimal - calibrated) / value of information
double belief_loss(double visualization_optimal, double calibrated, double delta);
/// (calibrated - behavioral) / value of information
double optimization_loss(double calibrated, double behavioral, double delta);

/// Replaces each probability report by the action optimal under the mapped
/// belief.
std::vector<TrialRecord> decisions_from_beliefs(const std::vector<TrialRecord>& records,
                                                const ExperimentDesign& design);

struct LossReport {
    double behavioral = 0.0;
    double calibrated = 0.0;
    double behavioral_value_of_information = 0.0;
    std::optional<double> belief_loss;
    std::optional<double> optimization_loss;
};

LossReport decompose(const EmpiricalJoint& joint, const ScoringRule& rule, double baseline,
                     double visualization_optimal, double delta);

struct StrategyLoss {
    std::string strategy;  ///< "pooled" for the trial-weighted aggregate
    ResponseKind kind = ResponseKind::Action;
    std::size_t trials = 0;
    double visualization_optimal = 0.0;
    LossReport losses;
    std::vector<std::string> warnings;
};

/// Post-experimental analysis. Records are grouped by (strategy, response
/// kind); a pooled row weights each group by its trial count.
std::vector<StrategyLoss> analyze_trials(const std::vector<TrialRecord>& records,
                                         const ExperimentDesign& design,
                                         const RationalReport& rational,
                                         const IngestOptions& options = {});

}  // namespace ratbench
