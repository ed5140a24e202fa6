#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratbench/behavioral.hpp"
#include "ratbench/case_studies.hpp"
#include "ratbench/payment.hpp"
#include "ratbench/rational.hpp"

namespace ratbench {

/// Pre-experimental results for one design; several of them form the columns
/// of a report (one per scenario).
struct PreResult {
    std::string column;
    ExperimentDesign design;
    RationalReport rational;
    std::optional<IncentiveTable> incentives;
    std::vector<ExpectedValue> expected;
    std::vector<std::pair<std::string, double>> facts;
};

PreResult run_pre(const CaseStudy& study, std::string column, const IncentiveOptions& options = {});
PreResult run_pre(const ExperimentDesign& design, std::string column,
                  const IncentiveOptions& options = {});

/// Computed counterpart of a named expected quantity, when the report has one.
std::optional<double> observed(const PreResult& result, std::string_view quantity);

std::string render_pre_text(const std::vector<PreResult>& results);
std::string pre_summary_json(const std::vector<PreResult>& results);

struct PostResult {
    std::string design;
    RationalReport rational;
    std::vector<StrategyLoss> rows;
    IngestOptions options;
    bool beliefs_as_decisions = false;
};

std::string render_post_text(const PostResult& result);
std::string post_summary_json(const PostResult& result);

struct SimulationSummary {
    std::string design;
    std::string strategy;
    std::string agent;
    std::string task;
    std::string allocation;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::string output;
};

std::string simulation_summary_json(const SimulationSummary& summary);

}  // namespace ratbench
