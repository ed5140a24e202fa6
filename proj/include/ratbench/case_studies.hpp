#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ratbench/core.hpp"
#include "ratbench/generative.hpp"

namespace ratbench {

enum class Provenance {
    Published,     ///< value printed in the source study, reproducible from its inputs
    Analytic,      ///< closed-form value of the model
    ReferenceOnly  ///< printed value whose inputs are not available
};

const char* provenance_name(Provenance p);

struct ExpectedValue {
    std::string quantity;
    double value = 0.0;
    double tolerance = 0.0;
    bool relative = false;  ///< tolerance is a fraction of |value|
    Provenance provenance = Provenance::Published;
    std::string note;

    bool matches(double computed) const;
};

struct CaseStudy {
    std::string name;
    ExperimentDesign design;
    std::vector<ExpectedValue> expected;
    /// Model quantities computed at construction (e.g. decision thresholds).
    std::vector<std::pair<std::string, double>> facts;

    const ExpectedValue* find(std::string_view quantity) const;
};

CaseStudy build_weather();

struct KaleOptions {
    std::optional<std::vector<double>> levels;  ///< explicit PoS levels skip the marginal check
    PosSpacing spacing = PosSpacing::Linear;
};

/// Win probability at which hiring and not hiring tie.
double hiring_threshold(const MatrixRule& rule, double win_without);

CaseStudy build_kale(const KaleOptions& options = {});

struct TextPartition {
    enum class Kind {
        Identity,          ///< text displays reveal the full distribution
        QuantileRounding,  ///< distributions sharing the rounded quantile share a signal
        Explicit           ///< labels supplied per strategy and trial
    };
    Kind kind = Kind::Identity;
    /// strategy name -> (trial_id -> text label), Explicit only
    std::map<std::string, std::map<std::string, std::string>> labels;
};

struct FernandesOptions {
    int scenario = 1;
    std::filesystem::path distributions;
    int trials = 40;
    double grid_step = 0.25;
    TextPartition text_partition;
    SecondBusMode mode = SecondBusMode::PlugIn;
    bool miss_delay_includes_offset = true;
};

struct TransitScenario {
    double activity_rate;
    double waiting_rate;
    double destination_rate;
    double horizon;
    double dollars_per_thousand;
};

TransitScenario transit_scenario(int scenario);

/// Text displays and the quantile each one states.
const std::vector<std::pair<std::string, double>>& text_displays();

CaseStudy build_fernandes(const FernandesOptions& options);
CaseStudy build_fernandes(const FernandesOptions& options,
                          const std::vector<TrialDistribution>& distributions);

std::filesystem::path default_distribution_file();

/// Builtin case by name: weather, kale2020, fernandes2018 (scenario from options).
CaseStudy build_case(std::string_view name, const FernandesOptions& fernandes = {});

}  // namespace ratbench
