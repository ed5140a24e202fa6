#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratbench/core.hpp"
#include "ratbench/rational.hpp"

namespace ratbench {

/// Applies the conversion formula to a score already accumulated over the
/// rule's trial count.
double convert(const ConversionRule& rule, double cumulative_score);

/// Per-trial expected score scaled by the trial count, then converted.
double convert_expected(const ConversionRule& rule, double per_trial_score);

enum class IncentiveMode {
    Linearized,  ///< f applied to the expected cumulative score
    MonteCarlo   ///< E[f(cumulative score)] over simulated experiments
};

struct IncentiveRow {
    std::string strategy;
    double paid_baseline = 0.0;  ///< f(R0)
    double paid_optimal = 0.0;   ///< f(R_V)
    double difference = 0.0;     ///< f(R_V) - f(R0)
    double ratio = 0.0;          ///< difference / f(R0)
};

struct IncentiveTable {
    std::vector<IncentiveRow> strategies;
    IncentiveRow benchmark;
    IncentiveMode mode = IncentiveMode::Linearized;
    std::string note;
};

struct IncentiveOptions {
    IncentiveMode mode = IncentiveMode::Linearized;
    std::size_t experiments = 20000;
    std::uint64_t seed = 0;
};

/// Incentive to consult each visualization. Throws InputError when the
/// design has no conversion rule or f(R0) is zero.
IncentiveTable incentive_table(const ExperimentDesign& design, const RationalReport& rational,
                               const IncentiveOptions& options = {});
IncentiveTable incentive_table(const ExperimentDesign& design, const RationalReport& rational,
                               const ConversionRule& rule, const IncentiveOptions& options = {});

/// Mean payment of an agent following `policy` (signal -> action) over
/// simulated experiments of rule.trials trials each.
double simulated_payment(const ConversionRule& rule, const DecisionProblem& problem,
                         const std::vector<std::size_t>& policy, std::size_t experiments,
                         std::uint64_t seed);

}  // namespace ratbench
