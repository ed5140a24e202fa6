#include "ratbench/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ratbench/generative.hpp"
#include "ratbench/rational.hpp"

namespace ratbench {

AgentSpec AgentSpec::noisy(double kappa) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw InputError(fmt::format("noise sd {} must be finite and non-negative", kappa));
    }
    AgentSpec spec{AgentKind::NoisyBelief};
    spec.noise = kappa;
    return spec;
}

AgentSpec AgentSpec::lapsing(double rate, AgentSpec inner) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw InputError(fmt::format("lapse rate {} must lie in [0, 1]", rate));
    }
    AgentSpec spec{AgentKind::Lapse};
    spec.lapse = rate;
    spec.inner = std::make_shared<const AgentSpec>(std::move(inner));
    return spec;
}

namespace {

double parse_parameter(std::string_view text, std::string_view key) {
    const std::string prefix = std::string(key) + "=";
    if (text.substr(0, prefix.size()) != prefix) {
        throw InputError(fmt::format("expected '{}<value>' in agent spec, got '{}'", prefix, text));
    }
    text.remove_prefix(prefix.size());
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(fmt::format("'{}' is not a number in agent spec", text));
    }
    return value;
}

}  // namespace

AgentSpec parse_agent(std::string_view text) {
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const auto rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (head == "rational" || head == "prior" || head == "random") {
        if (!rest.empty()) throw InputError(fmt::format("agent '{}' takes no parameters", head));
        if (head == "rational") return AgentSpec::rational();
        if (head == "prior") return AgentSpec::prior();
        return AgentSpec::uniform_random();
    }
    if (head == "noisy") {
        if (rest.empty()) return AgentSpec::noisy(0.5);
        return AgentSpec::noisy(parse_parameter(rest, "k"));
    }
    if (head == "lapse") {
        if (rest.empty()) throw InputError("lapse agent needs l=<rate>");
        const auto next = rest.find(':');
        const double rate = parse_parameter(rest.substr(0, next), "l");
        const auto inner =
            next == std::string_view::npos ? AgentSpec::rational() : parse_agent(rest.substr(next + 1));
        return AgentSpec::lapsing(rate, inner);
    }
    throw InputError(fmt::format(
        "unknown agent '{}'; expected rational, prior, random, noisy[:k=K] or lapse:l=L[:INNER]",
        text));
}

std::string describe(const AgentSpec& agent) {
    switch (agent.kind) {
        case AgentKind::Rational: return "rational";
        case AgentKind::Prior: return "prior";
        case AgentKind::UniformRandom: return "random";
        case AgentKind::NoisyBelief: return fmt::format("noisy:k={}", agent.noise);
        case AgentKind::Lapse: return fmt::format("lapse:l={}:{}", agent.lapse, describe(*agent.inner));
    }
    return "unknown";
}

namespace {

/// Posterior with N(0, kappa^2) noise added to each log-odds against the
/// first state with positive probability. Zero-probability states stay zero.
Belief perturb(const Belief& q, double kappa, Rng& rng) {
    std::size_t ref = 0;
    while (ref < q.size() && !(q[ref] > 0.0)) ++ref;
    std::vector<double> logs(q.size(), -std::numeric_limits<double>::infinity());
    double top = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(q[i] > 0.0)) continue;
        logs[i] = std::log(q[i]) - std::log(q[ref]);
        if (i != ref) logs[i] += kappa * rng.normal();
        top = std::max(top, logs[i]);
    }
    std::vector<double> w(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) w[i] = std::exp(logs[i] - top);
    }
    return Belief::from_weights(std::move(w));
}

struct Context {
    const ExperimentDesign& design;
    const InformationStructure& structure;
    std::vector<Belief> posteriors;
    std::vector<std::size_t> rational_actions;
    Belief prior;
    std::size_t prior_action = 0;
    Task task = Task::Decision;
};

struct Response {
    std::size_t action = 0;
    double report = 0.0;
};

Response respond_to(const Context& ctx, const Belief& belief) {
    Response r;
    if (ctx.task == Task::Decision) {
        r.action = optimal_action(ctx.design.rule, belief).action;
    } else {
        r.report = belief_to_report(*ctx.design.report_mapping, belief);
    }
    return r;
}

Response act(const Context& ctx, const AgentSpec& agent, std::size_t signal, Rng& rng) {
    switch (agent.kind) {
        case AgentKind::Rational:
            if (ctx.task == Task::Decision) return {ctx.rational_actions[signal], 0.0};
            return respond_to(ctx, ctx.posteriors[signal]);
        case AgentKind::Prior:
            if (ctx.task == Task::Decision) return {ctx.prior_action, 0.0};
            return respond_to(ctx, ctx.prior);
        case AgentKind::UniformRandom:
            if (ctx.task == Task::Decision) return {rng.below(ctx.design.actions.size()), 0.0};
            return {0, rng.uniform()};
        case AgentKind::NoisyBelief:
            if (agent.noise == 0.0) return act(ctx, AgentSpec::rational(), signal, rng);
            return respond_to(ctx, perturb(ctx.posteriors[signal], agent.noise, rng));
        case AgentKind::Lapse:
            if (rng.uniform() < agent.lapse) return act(ctx, AgentSpec::uniform_random(), signal, rng);
            return act(ctx, *agent.inner, signal, rng);
    }
    throw InputError("unknown agent kind");
}

Context make_context(const ExperimentDesign& design, std::string_view strategy, Task task) {
    const auto index = design.strategy_index(strategy);
    if (!index) throw InputError(fmt::format("unknown strategy '{}'", strategy));
    require_valid(design);
    if (task == Task::BeliefReport && !design.report_mapping) {
        throw InputError(fmt::format("design '{}' has no report mapping for belief tasks", design.name));
    }
    const auto& structure = design.strategies[*index].structure;
    Context ctx{design, structure, {}, {}, prior(structure), 0, task};
    for (std::size_t v = 0; v < structure.num_signals(); ++v) {
        if (structure.signal_mass(v) > 0.0) {
            ctx.posteriors.push_back(posterior(structure, v));
        } else {
            ctx.posteriors.push_back(ctx.prior);
        }
        ctx.rational_actions.push_back(optimal_action(design.rule, ctx.posteriors.back()).action);
    }
    ctx.prior_action = optimal_action(design.rule, ctx.prior).action;
    return ctx;
}

void check_balanced(const InformationStructure& structure) {
    const double expected = 1.0 / static_cast<double>(structure.num_signals());
    for (std::size_t v = 0; v < structure.num_signals(); ++v) {
        if (std::abs(structure.signal_mass(v) - expected) > 1e-9) {
            throw InputError("balanced blocks need a uniform signal distribution");
        }
    }
}

}  // namespace

std::vector<TrialRecord> simulate(const ExperimentDesign& design, std::string_view strategy,
                                  const AgentSpec& agent, std::size_t n_trials, std::uint64_t seed,
                                  const SimulationOptions& options) {
    if (n_trials < 1) throw InputError("simulation needs at least one trial");
    const auto ctx = make_context(design, strategy, options.task);
    const auto& structure = ctx.structure;
    const std::size_t ns = structure.num_states();
    if (options.allocation == Allocation::BalancedBlocks) check_balanced(structure);

    Rng env(Rng::derive(seed, 0));
    Rng mind(Rng::derive(seed, 1));
    const auto joint_cdf = cumulative_sums(structure.joint());
    std::vector<std::vector<double>> posterior_cdf;
    for (const auto& q : ctx.posteriors) posterior_cdf.push_back(cumulative_sums(q.probabilities()));

    std::vector<std::size_t> block(structure.num_signals());
    std::size_t cursor = block.size();

    std::vector<TrialRecord> records;
    records.reserve(n_trials);
    const std::string strategy_name(strategy);
    for (std::size_t t = 0; t < n_trials; ++t) {
        std::size_t v = 0, s = 0;
        if (options.allocation == Allocation::Iid) {
            const std::size_t cell = env.categorical(joint_cdf);
            v = cell / ns;
            s = cell % ns;
        } else {
            if (cursor == block.size()) {
                std::iota(block.begin(), block.end(), std::size_t{0});
                for (std::size_t i = block.size(); i > 1; --i) std::swap(block[i - 1], block[env.below(i)]);
                cursor = 0;
            }
            v = block[cursor++];
            s = env.categorical(posterior_cdf[v]);
        }
        const auto response = act(ctx, agent, v, mind);
        TrialRecord r;
        r.trial_id = fmt::format("{}", t + 1);
        r.strategy = strategy_name;
        r.signal = structure.signals()[v];
        r.state = design.states.ids()[s];
        if (options.task == Task::Decision) {
            r.kind = ResponseKind::Action;
            r.action = design.actions.ids()[response.action];
        } else {
            r.kind = ResponseKind::Probability;
            r.report = response.report;
        }
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

std::vector<double> kernel_row(const Context& ctx, const AgentSpec& agent, std::size_t signal,
                               std::size_t samples, Rng& rng) {
    const std::size_t na = ctx.design.actions.size();
    std::vector<double> row(na, 0.0);
    switch (agent.kind) {
        case AgentKind::Rational:
            row[ctx.rational_actions[signal]] = 1.0;
            return row;
        case AgentKind::Prior:
            row[ctx.prior_action] = 1.0;
            return row;
        case AgentKind::UniformRandom:
            std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(na));
            return row;
        case AgentKind::NoisyBelief: {
            if (agent.noise == 0.0) return kernel_row(ctx, AgentSpec::rational(), signal, samples, rng);
            for (std::size_t i = 0; i < samples; ++i) {
                row[act(ctx, agent, signal, rng).action] += 1.0 / static_cast<double>(samples);
            }
            return row;
        }
        case AgentKind::Lapse: {
            const auto inner = kernel_row(ctx, *agent.inner, signal, samples, rng);
            for (std::size_t a = 0; a < na; ++a) {
                row[a] = (1.0 - agent.lapse) * inner[a] + agent.lapse / static_cast<double>(na);
            }
            return row;
        }
    }
    throw InputError("unknown agent kind");
}

}  // namespace

std::vector<std::vector<double>> policy_kernel(const ExperimentDesign& design,
                                               std::string_view strategy, const AgentSpec& agent,
                                               std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw InputError("policy kernel needs at least one sample");
    const auto ctx = make_context(design, strategy, Task::Decision);
    Rng rng(seed);
    std::vector<std::vector<double>> kernel;
    for (std::size_t v = 0; v < ctx.structure.num_signals(); ++v) {
        kernel.push_back(kernel_row(ctx, agent, v, samples, rng));
    }
    return kernel;
}

EmpiricalJoint kernel_joint(const ExperimentDesign& design, std::string_view strategy,
                            const std::vector<std::vector<double>>& kernel) {
    const auto index = design.strategy_index(strategy);
    if (!index) throw InputError(fmt::format("unknown strategy '{}'", strategy));
    const auto& structure = design.strategies[*index].structure;
    const std::size_t na = design.actions.size();
    const std::size_t ns = structure.num_states();
    if (kernel.size() != structure.num_signals()) {
        throw InputError("dimension: kernel needs one row per signal");
    }
    std::vector<std::vector<double>> masses(na, std::vector<double>(ns, 0.0));
    for (std::size_t v = 0; v < kernel.size(); ++v) {
        if (kernel[v].size() != na) throw InputError("dimension: kernel row has the wrong length");
        for (std::size_t a = 0; a < na; ++a) {
            if (kernel[v][a] == 0.0) continue;
            for (std::size_t s = 0; s < ns; ++s) masses[a][s] += kernel[v][a] * structure.mass(v, s);
        }
    }
    auto joint = joint_from_masses(masses, ns);
    joint.actions = design.actions;
    return joint;
}

}  // namespace ratbench
