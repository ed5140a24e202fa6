#include "ratbench/rational.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace ratbench {

namespace {

constexpr double kOrderingSlack = 1e-9;

/// Summation order can leave -1e-16 where the value is mathematically zero.
double clamp_rounding(double delta) {
    return delta < 0.0 && delta > -kOrderingSlack ? 0.0 : delta;
}

double loss_ratio(double benchmark, double optimal, double delta) {
    return (benchmark - optimal) / delta;
}

}  // namespace

Belief prior(const InformationStructure& structure) {
    std::vector<double> p(structure.num_states(), 0.0);
    for (std::size_t v = 0; v < structure.num_signals(); ++v) {
        const auto row = structure.row(v);
        for (std::size_t s = 0; s < p.size(); ++s) p[s] += row[s];
    }
    return Belief::normalized(std::move(p));
}

Belief posterior(const InformationStructure& structure, std::size_t signal) {
    if (signal >= structure.num_signals()) {
        throw InputError(fmt::format("signal index {} out of range", signal));
    }
    if (!(structure.signal_mass(signal) > 0.0)) {
        throw InputError(fmt::format("signal '{}' has zero mass; its posterior is undefined",
                                     structure.signals()[signal]));
    }
    const auto row = structure.row(signal);
    return Belief::from_weights({row.begin(), row.end()});
}

Belief posterior(const InformationStructure& structure, std::string_view signal) {
    const auto index = structure.signal_index(signal);
    if (!index) throw InputError(fmt::format("unknown signal '{}'", signal));
    return posterior(structure, *index);
}

double rational_baseline(const DecisionProblem& problem) {
    return optimal_action(problem.rule, prior(problem.structure)).score;
}

std::vector<std::size_t> rational_policy(const DecisionProblem& problem) {
    std::vector<std::size_t> policy;
    policy.reserve(problem.structure.num_signals());
    for (std::size_t v = 0; v < problem.structure.num_signals(); ++v) {
        policy.push_back(optimal_action(problem.rule, posterior(problem.structure, v)).action);
    }
    return policy;
}

double visualization_optimal(const DecisionProblem& problem) {
    double total = 0.0;
    for (std::size_t v = 0; v < problem.structure.num_signals(); ++v) {
        const double weight = problem.structure.signal_mass(v);
        total += weight * optimal_action(problem.rule, posterior(problem.structure, v)).score;
    }
    return total;
}

double rational_benchmark(const ExperimentDesign& design) {
    if (design.strategies.empty()) throw InputError("design has no strategies");
    double best = visualization_optimal(design.problem(0));
    for (std::size_t i = 1; i < design.strategies.size(); ++i) {
        best = std::max(best, visualization_optimal(design.problem(i)));
    }
    return best;
}

double value_of_information(const ExperimentDesign& design) {
    const double benchmark = rational_benchmark(design);
    return clamp_rounding(benchmark - rational_baseline(design.problem(0)));
}

double information_loss(const ExperimentDesign& design, std::string_view strategy) {
    const auto index = design.strategy_index(strategy);
    if (!index) throw InputError(fmt::format("unknown strategy '{}'", strategy));
    const double benchmark = rational_benchmark(design);
    const double delta = clamp_rounding(benchmark - rational_baseline(design.problem(0)));
    if (!(delta > 0.0)) throw InputError("no information value to normalize by");
    return loss_ratio(benchmark, visualization_optimal(design.problem(*index)), delta);
}

RationalReport analyze(const ExperimentDesign& design) {
    require_valid(design);
    RationalReport report;
    report.design = design.name;
    const auto base_problem = design.problem(0);
    report.prior = prior(base_problem.structure);
    const auto base_choice = optimal_action(design.rule, report.prior);
    report.baseline = base_choice.score;
    report.baseline_action = base_choice.action;

    report.benchmark = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < design.strategies.size(); ++i) {
        const auto& structure = design.strategies[i].structure;
        StrategyAnalysis sa;
        sa.name = design.strategies[i].name;
        for (std::size_t v = 0; v < structure.num_signals(); ++v) {
            auto q = posterior(structure, v);
            const auto choice = optimal_action(design.rule, q);
            sa.visualization_optimal += structure.signal_mass(v) * choice.score;
            sa.policy.push_back(choice.action);
            sa.posteriors.push_back(std::move(q));
        }
        if (sa.visualization_optimal > report.benchmark) {
            report.benchmark = sa.visualization_optimal;
            report.benchmark_strategy = sa.name;
        }
        report.strategies.push_back(std::move(sa));
    }
    report.value_of_information = clamp_rounding(report.benchmark - report.baseline);

    for (auto& sa : report.strategies) {
        if (sa.visualization_optimal < report.baseline - kOrderingSlack) {
            const auto message = fmt::format("strategy '{}' scores {} below the rational baseline {}",
                                             sa.name, sa.visualization_optimal, report.baseline);
            if (design.rule.matrix()) throw InvariantError(message);
            report.warnings.push_back(message);
        }
        if (report.value_of_information > 0.0) {
            sa.information_loss =
                loss_ratio(report.benchmark, sa.visualization_optimal, report.value_of_information);
        }
    }
    return report;
}

}  // namespace ratbench
