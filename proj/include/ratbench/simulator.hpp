#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ratbench/behavioral.hpp"
#include "ratbench/core.hpp"

namespace ratbench {

enum class AgentKind { Rational, Prior, UniformRandom, NoisyBelief, Lapse };

struct AgentSpec {
    AgentKind kind = AgentKind::Rational;
    double noise = 0.5;  ///< log-odds noise sd for NoisyBelief
    double lapse = 0.0;  ///< probability of acting uniformly at random
    std::shared_ptr<const AgentSpec> inner;  ///< Lapse only

    static AgentSpec rational() { return {}; }
    static AgentSpec prior() { return {AgentKind::Prior}; }
    static AgentSpec uniform_random() { return {AgentKind::UniformRandom}; }
    static AgentSpec noisy(double kappa);
    static AgentSpec lapsing(double rate, AgentSpec inner);
};

/// rational | prior | random | noisy[:k=K] | lapse:l=L[:INNER]
AgentSpec parse_agent(std::string_view text);
std::string describe(const AgentSpec& agent);

enum class Task { Decision, BeliefReport };
enum class Allocation {
    Iid,            ///< (signal, state) drawn from the joint each trial
    BalancedBlocks  ///< every signal once per block in shuffled order
};

struct SimulationOptions {
    Task task = Task::Decision;
    Allocation allocation = Allocation::Iid;
};

/// Synthetic trial records, deterministic given the seed. The environment and
/// the agent draw from separate streams, so agents that ignore their stream
/// see identical stimuli.
std::vector<TrialRecord> simulate(const ExperimentDesign& design, std::string_view strategy,
                                  const AgentSpec& agent, std::size_t n_trials,
                                  std::uint64_t seed, const SimulationOptions& options = {});

/// P(action | signal) of a decision-task agent, indexed [signal][action].
/// Noisy agents are approximated from `samples` draws per signal.
std::vector<std::vector<double>> policy_kernel(const ExperimentDesign& design,
                                               std::string_view strategy, const AgentSpec& agent,
                                               std::size_t samples = 4000, std::uint64_t seed = 0);

/// Exact joint over (action, state) implied by a policy kernel.
EmpiricalJoint kernel_joint(const ExperimentDesign& design, std::string_view strategy,
                            const std::vector<std::vector<double>>& kernel);

}  // namespace ratbench
