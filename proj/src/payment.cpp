#include "ratbench/payment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ratbench/generative.hpp"

namespace ratbench {

double convert(const ConversionRule& rule, double cumulative_score) {
    switch (rule.kind) {
        case ConversionKind::Affine:
            return rule.base + rule.rate * cumulative_score;
        case ConversionKind::FlooredAffine:
            return rule.base + rule.rate * std::max(0.0, cumulative_score - rule.floor);
        case ConversionKind::ShiftedAffine:
            return rule.rate * (cumulative_score - rule.shift) + rule.base;
    }
    throw InputError("unknown conversion kind");
}

double convert_expected(const ConversionRule& rule, double per_trial_score) {
    return convert(rule, static_cast<double>(rule.trials) * per_trial_score);
}

double simulated_payment(const ConversionRule& rule, const DecisionProblem& problem,
                         const std::vector<std::size_t>& policy, std::size_t experiments,
                         std::uint64_t seed) {
    if (experiments == 0) throw InputError("need at least one simulated experiment");
    if (rule.trials < 1) throw InputError("conversion needs at least one trial");
    const auto& structure = problem.structure;
    if (policy.size() != structure.num_signals()) {
        throw InputError("policy must assign one action to every signal");
    }
    const std::size_t ns = structure.num_states();
    const auto joint_cdf = cumulative_sums(structure.joint());
    std::vector<std::vector<double>> posterior_cdf;
    const auto* transit = problem.rule.transit();
    if (transit) {
        for (std::size_t v = 0; v < structure.num_signals(); ++v) {
            posterior_cdf.push_back(cumulative_sums(structure.row(v)));
        }
    }
    Rng rng(seed);
    double total = 0.0;
    for (std::size_t e = 0; e < experiments; ++e) {
        double cumulative = 0.0;
        for (int t = 0; t < rule.trials; ++t) {
            const std::size_t cell = rng.categorical(joint_cdf);
            const std::size_t v = cell / ns;
            double second = 0.0;
            if (transit) second = transit->arrivals[rng.categorical(posterior_cdf[v])];
            cumulative += problem.rule.realized_payoff(policy[v], cell % ns, second);
        }
        total += convert(rule, cumulative);
    }
    return total / static_cast<double>(experiments);
}

namespace {

IncentiveRow make_row(std::string name, double paid_baseline, double paid_optimal) {
    if (paid_baseline == 0.0) {
        throw InputError("payment at the rational baseline is zero; the incentive ratio is undefined");
    }
    IncentiveRow row;
    row.strategy = std::move(name);
    row.paid_baseline = paid_baseline;
    row.paid_optimal = paid_optimal;
    row.difference = paid_optimal - paid_baseline;
    row.ratio = row.difference / paid_baseline;
    return row;
}

}  // namespace

IncentiveTable incentive_table(const ExperimentDesign& design, const RationalReport& rational,
                               const IncentiveOptions& options) {
    if (!design.conversion) {
        throw InputError(fmt::format("design '{}' has no conversion rule", design.name));
    }
    return incentive_table(design, rational, *design.conversion, options);
}

IncentiveTable incentive_table(const ExperimentDesign& design, const RationalReport& rational,
                               const ConversionRule& rule, const IncentiveOptions& options) {
    if (rule.trials < 1) throw InputError("conversion needs at least one trial");
    IncentiveTable table;
    table.mode = options.mode;
    const bool linear = rule.kind != ConversionKind::FlooredAffine;
    if (options.mode == IncentiveMode::Linearized) {
        const double base = convert_expected(rule, rational.baseline);
        for (const auto& sa : rational.strategies) {
            table.strategies.push_back(
                make_row(sa.name, base, convert_expected(rule, sa.visualization_optimal)));
        }
        table.benchmark = make_row(rational.benchmark_strategy, base,
                                   convert_expected(rule, rational.benchmark));
        table.note = linear ? "exact: the conversion is affine in the cumulative score"
                            : "conversion evaluated at the expected cumulative score";
        return table;
    }

    // Every strategy shares the prior, so the baseline agent is simulated once.
    const auto base_problem = design.problem(0);
    const std::vector<std::size_t> prior_policy(base_problem.structure.num_signals(),
                                                rational.baseline_action);
    const double base = simulated_payment(rule, base_problem, prior_policy, options.experiments,
                                          Rng::derive(options.seed, 0));
    std::optional<IncentiveRow> best;
    for (std::size_t i = 0; i < rational.strategies.size(); ++i) {
        const auto& sa = rational.strategies[i];
        const double paid = simulated_payment(rule, design.problem(i), sa.policy,
                                              options.experiments, Rng::derive(options.seed, i + 1));
        table.strategies.push_back(make_row(sa.name, base, paid));
        if (sa.name == rational.benchmark_strategy) best = table.strategies.back();
    }
    if (best) table.benchmark = *best;
    table.note = fmt::format("Monte Carlo over {} simulated experiments of {} trials",
                             options.experiments, rule.trials);
    return table;
}

}  // namespace ratbench
