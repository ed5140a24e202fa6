#include "ratbench/cli.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ratbench/behavioral.hpp"
#include "ratbench/case_studies.hpp"
#include "ratbench/io.hpp"
#include "ratbench/payment.hpp"
#include "ratbench/rational.hpp"
#include "ratbench/report.hpp"
#include "ratbench/simulator.hpp"
#include "csv.hpp"

namespace ratbench {

namespace {

struct Options {
    std::string case_name;
    std::string config;
    std::string trials_path;
    std::uint64_t seed = 0;
    std::size_t n = 1000;
    double bin_width = 0.02;
    double grid_step = 0.25;
    double smoothing_alpha = 0.0;
    std::string out;
    std::string summary;
    std::string dists;
    int scenario = 0;  // 0: every scenario where a command allows it
    std::string text_partition = "identity";
    std::string second_bus = "plug-in";
    std::string kale_spacing = "linear";
    std::vector<double> kale_levels;
    std::string incentive = "linearized";
    std::size_t incentive_experiments = 20000;
    std::string agent = "rational";
    std::string strategy;
    std::string task = "decision";
    std::string allocation = "iid";
    std::string state_weighting = "realized";
    bool beliefs_as_decisions = false;
    bool literal_miss_delay = false;
};

TextPartition read_partition(const std::string& spec) {
    TextPartition p;
    if (spec == "identity") return p;
    if (spec == "quantile") {
        p.kind = TextPartition::Kind::QuantileRounding;
        return p;
    }
    std::ifstream in(spec);
    if (!in) {
        throw InputError(fmt::format(
            "--text-partition must be identity, quantile or a CSV file (strategy,trial_id,label); "
            "cannot open '{}'",
            spec));
    }
    p.kind = TextPartition::Kind::Explicit;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (detail::is_blank(line)) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 3) throw InputError(fmt::format("text partition row '{}' needs 3 fields", line));
        p.labels[f[0]][f[1]] = f[2];
    }
    return p;
}

FernandesOptions fernandes_options(const Options& o, int scenario) {
    FernandesOptions f;
    f.scenario = scenario;
    f.distributions = o.dists;
    f.grid_step = o.grid_step;
    f.text_partition = read_partition(o.text_partition);
    f.miss_delay_includes_offset = !o.literal_miss_delay;
    if (o.second_bus == "plug-in") {
        f.mode = SecondBusMode::PlugIn;
    } else if (o.second_bus == "full") {
        f.mode = SecondBusMode::FullExpectation;
    } else {
        throw InputError("--second-bus must be plug-in or full");
    }
    return f;
}

KaleOptions kale_options(const Options& o) {
    KaleOptions k;
    if (!o.kale_levels.empty()) k.levels = o.kale_levels;
    if (o.kale_spacing == "linear") {
        k.spacing = PosSpacing::Linear;
    } else if (o.kale_spacing == "geometric") {
        k.spacing = PosSpacing::Geometric;
    } else if (o.kale_spacing == "log-odds") {
        k.spacing = PosSpacing::LogOdds;
    } else {
        throw InputError("--kale-spacing must be linear, geometric or log-odds");
    }
    return k;
}

/// Builtin cases or the config file, one entry per report column.
std::vector<std::pair<std::string, CaseStudy>> designs(const Options& o, bool allow_all_scenarios) {
    if (o.case_name.empty() == o.config.empty()) {
        throw InputError("give exactly one design source: --case or --config");
    }
    std::vector<std::pair<std::string, CaseStudy>> out;
    if (!o.config.empty()) {
        CaseStudy cs;
        cs.design = load_design(o.config);
        cs.name = cs.design.name;
        out.emplace_back(cs.name, std::move(cs));
        return out;
    }
    if (o.case_name == "weather") {
        out.emplace_back("weather", build_weather());
    } else if (o.case_name == "kale2020") {
        out.emplace_back("kale2020", build_kale(kale_options(o)));
    } else if (o.case_name == "fernandes2018") {
        if (o.scenario < 0 || o.scenario > 3) throw InputError("--scenario must be 1, 2 or 3");
        if (o.scenario == 0 && !allow_all_scenarios) {
            throw InputError("this command needs a single --scenario for fernandes2018");
        }
        for (int s = 1; s <= 3; ++s) {
            if (o.scenario != 0 && o.scenario != s) continue;
            out.emplace_back(fmt::format("scenario {}", s), build_fernandes(fernandes_options(o, s)));
        }
    } else {
        throw InputError(fmt::format("unknown case '{}'; expected weather, kale2020 or fernandes2018",
                                     o.case_name));
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path));
    f << content;
}

void check_ranges(const Options& o) {
    if (!(o.bin_width > 0.0 && o.bin_width <= 1.0)) throw InputError("--bin-width must lie in (0, 1]");
    if (!(o.grid_step > 0.0 && o.grid_step <= 30.0)) throw InputError("--grid-step must lie in (0, 30]");
    if (!(o.smoothing_alpha >= 0.0)) throw InputError("--smoothing-alpha must be non-negative");
    if (o.n < 1) throw InputError("--n must be at least 1");
}

int cmd_pre(const Options& o, std::ostream& out) {
    IncentiveOptions inc;
    if (o.incentive == "monte-carlo") {
        inc.mode = IncentiveMode::MonteCarlo;
    } else if (o.incentive != "linearized") {
        throw InputError("--incentive must be linearized or monte-carlo");
    }
    inc.experiments = o.incentive_experiments;
    inc.seed = o.seed;
    std::vector<PreResult> results;
    for (const auto& [column, cs] : designs(o, true)) results.push_back(run_pre(cs, column, inc));
    out << render_pre_text(results);
    if (!o.out.empty()) write_file(o.out, pre_summary_json(results));
    return kExitOk;
}

int cmd_post(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.trials_path.empty()) throw InputError("post needs --trials");
    const auto list = designs(o, false);
    const auto& design = list.front().second.design;
    IngestOptions ingest_options;
    ingest_options.bin_width = o.bin_width;
    ingest_options.smoothing_alpha = o.smoothing_alpha;
    if (o.state_weighting == "posterior") {
        ingest_options.weighting = StateWeighting::SignalPosterior;
    } else if (o.state_weighting != "realized") {
        throw InputError("--state-weighting must be realized or posterior");
    }
    auto records = read_trials(o.trials_path);
    if (o.beliefs_as_decisions) {
        std::vector<TrialRecord> converted;
        std::vector<TrialRecord> reports;
        for (auto& r : records) (r.kind == ResponseKind::Probability ? reports : converted).push_back(r);
        if (!reports.empty()) {
            auto decided = decisions_from_beliefs(reports, design);
            converted.insert(converted.end(), decided.begin(), decided.end());
        }
        records = std::move(converted);
    }
    PostResult result;
    result.design = design.name;
    result.rational = analyze(design);
    result.rows = analyze_trials(records, design, result.rational, ingest_options);
    result.options = ingest_options;
    result.beliefs_as_decisions = o.beliefs_as_decisions;
    out << render_post_text(result);
    for (const auto& row : result.rows) {
        for (const auto& w : row.warnings) err << fmt::format("warning [{}]: {}\n", row.strategy, w);
    }
    if (!o.out.empty()) write_file(o.out, post_summary_json(result));
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const auto list = designs(o, false);
    const auto& design = list.front().second.design;
    const auto agent = parse_agent(o.agent);
    SimulationOptions sim;
    if (o.task == "belief") {
        sim.task = Task::BeliefReport;
    } else if (o.task != "decision") {
        throw InputError("--task must be decision or belief");
    }
    if (o.allocation == "balanced") {
        sim.allocation = Allocation::BalancedBlocks;
    } else if (o.allocation != "iid") {
        throw InputError("--allocation must be iid or balanced");
    }
    std::string strategy = o.strategy;
    if (strategy.empty()) strategy = analyze(design).benchmark_strategy;
    const auto records = simulate(design, strategy, agent, o.n, o.seed, sim);
    std::ostringstream csv;
    write_trials(csv, records);
    if (o.out.empty()) {
        out << csv.str();
    } else {
        write_file(o.out, csv.str());
        out << fmt::format("wrote {} trials to {}\n", records.size(), o.out);
    }
    if (!o.summary.empty()) {
        write_file(o.summary, simulation_summary_json({design.name, strategy, describe(agent), o.task,
                                                       o.allocation, o.seed, records.size(), o.out}));
    }
    return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out) {
    const auto list = designs(o, false);
    const auto text = export_design(list.front().second.design);
    if (o.out.empty()) {
        out << text;
    } else {
        write_file(o.out, text);
    }
    return kExitOk;
}

void add_design_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--case", o.case_name, "Builtin case: weather, kale2020, fernandes2018");
    cmd->add_option("--config", o.config, "Design config JSON");
    cmd->add_option("--dists", o.dists, "Arrival distribution CSV for fernandes2018");
    cmd->add_option("--scenario", o.scenario, "fernandes2018 scenario (1-3)");
    cmd->add_option("--grid-step", o.grid_step, "Arrival grid resolution in minutes")->capture_default_str();
    cmd->add_option("--text-partition", o.text_partition,
                    "Text display signals: identity, quantile, or a CSV strategy,trial_id,label")
        ->capture_default_str();
    cmd->add_option("--second-bus", o.second_bus, "Second-bus expectation: plug-in or full")
        ->capture_default_str();
    cmd->add_flag("--literal-miss-delay", o.literal_miss_delay,
                  "Leave the 30-minute offset out of the missed-bus destination delay");
    cmd->add_option("--kale-spacing", o.kale_spacing, "PoS spacing: linear, geometric, log-odds")
        ->capture_default_str();
    cmd->add_option("--kale-levels", o.kale_levels, "Explicit PoS levels")->delimiter(',');
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", o.out, "Output path");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Rational-agent benchmarks for visualization experiments", "ratbench"};
    app.require_subcommand(1);

    auto* pre = app.add_subcommand("pre", "Pre-experimental analysis");
    add_design_flags(pre, o);
    pre->add_option("--incentive", o.incentive, "linearized or monte-carlo")->capture_default_str();
    pre->add_option("--incentive-experiments", o.incentive_experiments,
                    "Simulated experiments for monte-carlo incentives")
        ->capture_default_str();

    auto* post = app.add_subcommand("post", "Behavioral loss decomposition of trial data");
    add_design_flags(post, o);
    post->add_option("--trials", o.trials_path, "Trial CSV")->required();
    post->add_option("--bin-width", o.bin_width, "Probability report bin width")->capture_default_str();
    post->add_option("--smoothing-alpha", o.smoothing_alpha, "Additive smoothing")->capture_default_str();
    post->add_option("--state-weighting", o.state_weighting, "realized or posterior")->capture_default_str();
    post->add_flag("--as-decisions", o.beliefs_as_decisions,
                   "Score probability reports through the decisions they imply");

    auto* sim = app.add_subcommand("simulate", "Synthetic trial records");
    add_design_flags(sim, o);
    sim->add_option("--agent", o.agent, "rational|prior|random|noisy[:k=K]|lapse:l=L[:INNER]")
        ->capture_default_str();
    sim->add_option("--strategy", o.strategy, "Strategy (default: rational benchmark)");
    sim->add_option("--n", o.n, "Number of trials")->capture_default_str();
    sim->add_option("--task", o.task, "decision or belief")->capture_default_str();
    sim->add_option("--allocation", o.allocation, "iid or balanced")->capture_default_str();
    sim->add_option("--summary", o.summary, "JSON summary path");

    auto* exp = app.add_subcommand("export", "Write a design as config JSON");
    add_design_flags(exp, o);

    std::vector<std::string> storage{"ratbench"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    try {
        check_ranges(o);
        if (pre->parsed()) return cmd_pre(o, out);
        if (post->parsed()) return cmd_post(o, out, err);
        if (sim->parsed()) return cmd_simulate(o, out);
        return cmd_export(o, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const InvariantError& e) {
        err << "invariant violation: " << e.what() << "\n";
        return kExitInvariantError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInvariantError;
    }
}

}  // namespace ratbench
