#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratbench/core.hpp"

namespace ratbench {

/// p(theta) = sum_v pi(v, theta)
Belief prior(const InformationStructure& structure);

/// q(theta) = pi(v, theta) / sum_theta pi(v, theta). Zero-mass signals throw.
Belief posterior(const InformationStructure& structure, std::size_t signal);
Belief posterior(const InformationStructure& structure, std::string_view signal);

/// Expected score of the prior-optimal action, scored under the prior.
double rational_baseline(const DecisionProblem& problem);

/// Optimal action for every signal's posterior.
std::vector<std::size_t> rational_policy(const DecisionProblem& problem);

/// sum_v Pr[v] max_a E[S(a, theta) | v]
double visualization_optimal(const DecisionProblem& problem);

/// Best visualization optimal across the design's strategies.
double rational_benchmark(const ExperimentDesign& design);

/// Benchmark minus baseline.
double value_of_information(const ExperimentDesign& design);

/// (benchmark - visualization optimal) / value of information. Throws
/// InputError when the value of information is zero.
double information_loss(const ExperimentDesign& design, std::string_view strategy);

struct StrategyAnalysis {
    std::string name;
    double visualization_optimal = 0.0;
    std::optional<double> information_loss;  ///< empty when the design has no information value
    std::vector<std::size_t> policy;         ///< optimal action per signal
    std::vector<Belief> posteriors;
};

struct RationalReport {
    std::string design;
    Belief prior;
    double baseline = 0.0;
    std::size_t baseline_action = 0;
    std::vector<StrategyAnalysis> strategies;
    double benchmark = 0.0;
    std::string benchmark_strategy;
    double value_of_information = 0.0;
    /// Ordering problems that are not guaranteed invariants for the rule
    /// (the plug-in transit expectation is not affine in the belief).
    std::vector<std::string> warnings;
};

/// Full pre-experimental analysis. Validates the design first (InputError).
/// For matrix rules baseline <= visualization optimal is an invariant and a
/// violation throws InvariantError; for transit rules it becomes a warning.
RationalReport analyze(const ExperimentDesign& design);

}  // namespace ratbench
