#include "ratbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

namespace ratbench {

using nlohmann::json;

PreResult run_pre(const ExperimentDesign& design, std::string column, const IncentiveOptions& options) {
    PreResult r;
    r.column = std::move(column);
    r.design = design;
    r.rational = analyze(design);
    if (design.conversion) r.incentives = incentive_table(design, r.rational, options);
    return r;
}

PreResult run_pre(const CaseStudy& study, std::string column, const IncentiveOptions& options) {
    auto r = run_pre(study.design, std::move(column), options);
    r.expected = study.expected;
    r.facts = study.facts;
    return r;
}

namespace {

const StrategyAnalysis* strategy(const PreResult& r, std::string_view name) {
    for (const auto& s : r.rational.strategies) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

}  // namespace

std::optional<double> observed(const PreResult& r, std::string_view quantity) {
    const auto& rat = r.rational;
    if (quantity == "baseline" || quantity == "baseline_analytic") return rat.baseline;
    if (quantity == "benchmark") return rat.benchmark;
    if (quantity == "value_of_information") return rat.value_of_information;
    if (quantity == "baseline_share_of_benchmark") {
        if (rat.benchmark == 0.0) return std::nullopt;
        return rat.baseline / rat.benchmark;
    }
    for (const auto& [name, value] : r.facts) {
        if (name == quantity) return value;
    }
    const auto suffix = [&](std::string_view prefix) -> std::optional<std::string_view> {
        if (quantity.substr(0, prefix.size()) == prefix) return quantity.substr(prefix.size());
        return std::nullopt;
    };
    if (const auto name = suffix("visualization_optimal:")) {
        // "full" is any strategy whose display identifies the distribution.
        const auto* s = strategy(r, *name == "full" ? std::string_view("none") : *name);
        if (s) return s->visualization_optimal;
        return std::nullopt;
    }
    if (const auto name = suffix("information_loss:")) {
        const auto* s = strategy(r, *name);
        if (s) return s->information_loss;
        return std::nullopt;
    }
    if (const auto field = suffix("incentive:")) {
        if (!r.incentives) return std::nullopt;
        const auto& b = r.incentives->benchmark;
        if (*field == "paid_baseline") return b.paid_baseline;
        if (*field == "paid_optimal") return b.paid_optimal;
        if (*field == "difference") return b.difference;
        if (*field == "ratio") return b.ratio;
        return std::nullopt;
    }
    if (quantity == "conversion_base" && r.design.conversion) return r.design.conversion->base;
    if (quantity == "dollars_per_thousand_points" && r.design.conversion) {
        return r.design.conversion->rate * 1000.0;
    }
    if (quantity == "payoff(a=10,theta=10)") {
        const auto* t = r.design.rule.transit();
        if (!t) return std::nullopt;
        return t->payoff(10.0, 10.0, 0.0);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text tables

namespace {

std::string table(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size(), 0);
    const auto widen = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
            width[i] = std::max(width[i], row[i].size());
        }
    };
    widen(header);
    for (const auto& row : rows) widen(row);
    std::string out;
    const auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < width.size(); ++i) {
            const std::string cell = i < row.size() ? row[i] : "";
            out += i == 0 ? fmt::format("{:<{}}", cell, width[i]) : fmt::format("  {:>{}}", cell, width[i]);
        }
        out += '\n';
    };
    line(header);
    std::size_t total = 0;
    for (std::size_t w : width) total += w + 2;
    out += std::string(total - 2, '-') + '\n';
    for (const auto& row : rows) line(row);
    return out;
}

std::string score(double x) {
    return std::abs(x) >= 100.0 ? fmt::format("{:.1f}", x) : fmt::format("{:.2f}", x);
}

std::string percent(std::optional<double> x) {
    if (!x) return "n/a";
    return fmt::format("{:.2f}%", 100.0 * *x);
}

std::string dollars(double x) { return fmt::format("${:.3f}", x); }

std::vector<std::string> header_for(const std::vector<PreResult>& results, const char* first) {
    std::vector<std::string> header{first};
    for (const auto& r : results) header.push_back(r.column);
    return header;
}

}  // namespace

std::string render_pre_text(const std::vector<PreResult>& results) {
    if (results.empty()) return {};
    std::string out;
    const auto& names = results.front().rational.strategies;

    std::vector<std::vector<std::string>> rows;
    const auto add = [&](std::string label, auto value) {
        std::vector<std::string> row{std::move(label)};
        for (const auto& r : results) row.push_back(value(r));
        rows.push_back(std::move(row));
    };
    add("rational baseline", [](const PreResult& r) { return score(r.rational.baseline); });
    for (std::size_t i = 0; i < names.size(); ++i) {
        add("R_V " + names[i].name, [i](const PreResult& r) {
            return i < r.rational.strategies.size() ? score(r.rational.strategies[i].visualization_optimal)
                                                    : std::string("n/a");
        });
    }
    add("rational benchmark", [](const PreResult& r) { return score(r.rational.benchmark); });
    add("value of information", [](const PreResult& r) { return score(r.rational.value_of_information); });
    out += "Rational agent scores (per trial)\n" + table(header_for(results, "quantity"), rows) + "\n";

    rows.clear();
    for (std::size_t i = 0; i < names.size(); ++i) {
        add(names[i].name, [i](const PreResult& r) {
            return i < r.rational.strategies.size() ? percent(r.rational.strategies[i].information_loss)
                                                    : std::string("n/a");
        });
    }
    out += "Information loss\n" + table(header_for(results, "strategy"), rows) + "\n";

    const bool any_incentives =
        std::any_of(results.begin(), results.end(), [](const PreResult& r) { return r.incentives.has_value(); });
    if (any_incentives) {
        rows.clear();
        const auto money = [](auto field) {
            return [field](const PreResult& r) {
                return r.incentives ? field(r.incentives->benchmark) : std::string("n/a");
            };
        };
        add("f(baseline)", money([](const IncentiveRow& b) { return dollars(b.paid_baseline); }));
        add("f(benchmark)", money([](const IncentiveRow& b) { return dollars(b.paid_optimal); }));
        add("incentive", money([](const IncentiveRow& b) { return dollars(b.difference); }));
        add("incentive / f(baseline)",
            money([](const IncentiveRow& b) { return percent(std::optional<double>(b.ratio)); }));
        out += "Incentive to consult the visualization\n" + table(header_for(results, "quantity"), rows);
        for (const auto& r : results) {
            if (r.incentives) out += fmt::format("  [{}] {}\n", r.column, r.incentives->note);
        }
        out += '\n';
    }

    bool any_facts = false;
    for (const auto& r : results) any_facts = any_facts || !r.facts.empty();
    if (any_facts) {
        out += "Model quantities\n";
        for (const auto& r : results) {
            for (const auto& [name, value] : r.facts) {
                out += fmt::format("  [{}] {} = {:.6g}\n", r.column, name, value);
            }
        }
        out += '\n';
    }

    rows.clear();
    for (const auto& r : results) {
        for (const auto& e : r.expected) {
            const auto got = observed(r, e.quantity);
            std::string status;
            if (!got) {
                status = "not computed";
            } else if (e.provenance == Provenance::ReferenceOnly) {
                status = "reference";
            } else {
                status = e.matches(*got) ? "ok" : "MISMATCH";
            }
            const std::string tol = e.provenance == Provenance::ReferenceOnly
                                        ? "-"
                                        : (e.relative ? fmt::format("{:g}%", 100.0 * e.tolerance)
                                                      : fmt::format("{:g}", e.tolerance));
            rows.push_back({r.column, e.quantity, fmt::format("{:.6g}", e.value), tol,
                            got ? fmt::format("{:.6g}", *got) : "n/a", provenance_name(e.provenance),
                            status});
        }
    }
    if (!rows.empty()) {
        out += "Pinned values\n" +
               table({"design", "quantity", "expected", "tolerance", "computed", "provenance", "status"},
                     rows);
    }
    for (const auto& r : results) {
        for (const auto& w : r.rational.warnings) out += fmt::format("warning [{}]: {}\n", r.column, w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON summaries

namespace {

json optional_number(std::optional<double> x) { return x ? json(*x) : json(nullptr); }

json incentive_row(const IncentiveRow& row) {
    return {{"strategy", row.strategy},
            {"paid_baseline", row.paid_baseline},
            {"paid_optimal", row.paid_optimal},
            {"difference", row.difference},
            {"ratio", row.ratio}};
}

constexpr std::size_t kMaxPosteriorStates = 16;

}  // namespace

std::string pre_summary_json(const std::vector<PreResult>& results) {
    json root;
    root["command"] = "pre";
    json designs = json::array();
    for (const auto& r : results) {
        const auto& rat = r.rational;
        json d;
        d["column"] = r.column;
        d["design"] = rat.design;
        d["prior"] = std::vector<double>(rat.prior.probabilities().begin(), rat.prior.probabilities().end());
        d["baseline"] = rat.baseline;
        d["baseline_action"] = r.design.actions.ids()[rat.baseline_action];
        d["benchmark"] = rat.benchmark;
        d["benchmark_strategy"] = rat.benchmark_strategy;
        d["value_of_information"] = rat.value_of_information;
        json strategies = json::array();
        for (const auto& s : rat.strategies) {
            const auto index = *r.design.strategy_index(s.name);
            const auto& signals = r.design.strategies[index].structure.signals();
            json js;
            js["name"] = s.name;
            js["visualization_optimal"] = s.visualization_optimal;
            js["information_loss"] = optional_number(s.information_loss);
            json policy = json::object();
            for (std::size_t v = 0; v < s.policy.size(); ++v) {
                policy[signals[v]] = r.design.actions.ids()[s.policy[v]];
            }
            js["policy"] = policy;
            if (r.design.states.size() <= kMaxPosteriorStates) {
                json post = json::object();
                for (std::size_t v = 0; v < s.posteriors.size(); ++v) {
                    const auto p = s.posteriors[v].probabilities();
                    post[signals[v]] = std::vector<double>(p.begin(), p.end());
                }
                js["posteriors"] = post;
            }
            strategies.push_back(js);
        }
        d["strategies"] = strategies;
        if (r.incentives) {
            json inc;
            inc["mode"] = r.incentives->mode == IncentiveMode::Linearized ? "linearized" : "monte_carlo";
            inc["note"] = r.incentives->note;
            inc["benchmark"] = incentive_row(r.incentives->benchmark);
            json rows = json::array();
            for (const auto& row : r.incentives->strategies) rows.push_back(incentive_row(row));
            inc["strategies"] = rows;
            d["incentives"] = inc;
        }
        json facts = json::object();
        for (const auto& [name, value] : r.facts) facts[name] = value;
        d["facts"] = facts;
        json expected = json::array();
        for (const auto& e : r.expected) {
            const auto got = observed(r, e.quantity);
            json je{{"quantity", e.quantity},
                    {"expected", e.value},
                    {"tolerance", e.tolerance},
                    {"tolerance_kind", e.relative ? "relative" : "absolute"},
                    {"provenance", provenance_name(e.provenance)},
                    {"computed", optional_number(got)}};
            if (!e.note.empty()) je["note"] = e.note;
            if (got && e.provenance != Provenance::ReferenceOnly) je["within_tolerance"] = e.matches(*got);
            expected.push_back(je);
        }
        d["expected"] = expected;
        d["warnings"] = rat.warnings;
        designs.push_back(d);
    }
    root["designs"] = designs;
    return root.dump(2) + "\n";
}

std::string render_post_text(const PostResult& result) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : result.rows) {
        const auto& l = row.losses;
        rows.push_back({row.strategy, row.kind == ResponseKind::Action ? "decision" : "report",
                        fmt::format("{}", row.trials), score(row.visualization_optimal), score(l.behavioral),
                        score(l.calibrated), score(l.behavioral_value_of_information),
                        percent(l.belief_loss), percent(l.optimization_loss)});
    }
    std::string out = fmt::format("Behavioral analysis for {} (baseline {}, benchmark {}, value of "
                                  "information {})\n",
                                  result.design, score(result.rational.baseline),
                                  score(result.rational.benchmark),
                                  score(result.rational.value_of_information));
    out += table({"strategy", "task", "trials", "R_V", "behavioral", "calibrated", "behavioral VoI",
                  "belief loss", "optimization loss"},
                 rows);
    for (const auto& row : result.rows) {
        for (const auto& w : row.warnings) out += fmt::format("warning [{}]: {}\n", row.strategy, w);
    }
    return out;
}

std::string post_summary_json(const PostResult& result) {
    json root;
    root["command"] = "post";
    root["design"] = result.design;
    root["baseline"] = result.rational.baseline;
    root["benchmark"] = result.rational.benchmark;
    root["value_of_information"] = result.rational.value_of_information;
    root["options"] = {{"bin_width", result.options.bin_width},
                       {"smoothing_alpha", result.options.smoothing_alpha},
                       {"state_weighting", result.options.weighting == StateWeighting::Realized
                                               ? "realized"
                                               : "signal_posterior"},
                       {"beliefs_as_decisions", result.beliefs_as_decisions}};
    json rows = json::array();
    for (const auto& row : result.rows) {
        const auto& l = row.losses;
        rows.push_back({{"strategy", row.strategy},
                        {"task", row.kind == ResponseKind::Action ? "decision" : "report"},
                        {"trials", row.trials},
                        {"visualization_optimal", row.visualization_optimal},
                        {"behavioral", l.behavioral},
                        {"calibrated", l.calibrated},
                        {"behavioral_value_of_information", l.behavioral_value_of_information},
                        {"belief_loss", optional_number(l.belief_loss)},
                        {"optimization_loss", optional_number(l.optimization_loss)},
                        {"warnings", row.warnings}});
    }
    root["strategies"] = rows;
    return root.dump(2) + "\n";
}

std::string simulation_summary_json(const SimulationSummary& s) {
    json root{{"command", "simulate"}, {"design", s.design},       {"strategy", s.strategy},
              {"agent", s.agent},      {"task", s.task},           {"allocation", s.allocation},
              {"seed", s.seed},        {"trials", s.trials},       {"output", s.output}};
    return root.dump(2) + "\n";
}

}  // namespace ratbench
