#include "ratbench/generative.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "csv.hpp"

namespace ratbench {

// ---------------------------------------------------------------------------
// Rng

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform()); }

std::size_t Rng::below(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

std::size_t Rng::categorical(std::span<const double> cumulative) {
    const double u = uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulative_sums(std::span<const double> weights) {
    std::vector<double> out(weights.size());
    std::partial_sum(weights.begin(), weights.end(), out.begin());
    return out;
}

double normal_cdf(double x) {
    return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// ---------------------------------------------------------------------------
// Threshold model

InformationStructure weather_joint(const GaussianThresholdDGM& dgm) {
    if (dgm.sigmas.empty() || dgm.sigmas.size() != dgm.sigma_probabilities.size()) {
        throw InputError("sigma levels and their probabilities must be non-empty and aligned");
    }
    const double total = std::accumulate(dgm.sigma_probabilities.begin(),
                                         dgm.sigma_probabilities.end(), 0.0);
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw InputError(fmt::format("sigma probabilities sum to {}", total));
    }
    std::vector<std::string> signals;
    std::vector<double> joint;
    for (std::size_t i = 0; i < dgm.sigmas.size(); ++i) {
        const double sigma = dgm.sigmas[i];
        if (!(sigma > 0.0)) throw InputError(fmt::format("sigma {} must be positive", sigma));
        const double below = normal_cdf((dgm.threshold - dgm.mean) / sigma);
        const double hit = dgm.direction == ThresholdDirection::AtOrBelow ? below : 1.0 - below;
        const double w = dgm.sigma_probabilities[i];
        signals.push_back(fmt::format("sigma={}", sigma));
        joint.push_back(w * (1.0 - hit));
        joint.push_back(w * hit);
    }
    return InformationStructure(std::move(signals), 2, std::move(joint));
}

// ---------------------------------------------------------------------------
// Two-team model

double pos_to_win_probability(double pos) {
    if (!(pos > 0.0 && pos < 1.0)) {
        throw InputError(fmt::format("probability of superiority {} must lie strictly in (0, 1)", pos));
    }
    return normal_cdf(std::sqrt(2.0) * normal_quantile(pos));
}

double win_probability_to_pos(double win_probability) {
    if (win_probability <= 0.0) return 0.0;
    if (win_probability >= 1.0) return 1.0;
    return normal_cdf(normal_quantile(win_probability) / std::sqrt(2.0));
}

std::vector<double> pos_levels(PosSpacing spacing, double lo, double hi, std::size_t n) {
    if (n == 0 || !(lo > 0.0 && hi < 1.0 && lo <= hi)) {
        throw InputError(fmt::format("cannot space {} levels over [{}, {}]", n, lo, hi));
    }
    std::vector<double> levels(n);
    const auto logit = [](double p) { return std::log(p / (1.0 - p)); };
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        switch (spacing) {
            case PosSpacing::Linear: levels[i] = lo + t * (hi - lo); break;
            case PosSpacing::Geometric: levels[i] = lo * std::pow(hi / lo, t); break;
            case PosSpacing::LogOdds: {
                const double x = logit(lo) + t * (logit(hi) - logit(lo));
                levels[i] = 1.0 / (1.0 + std::exp(-x));
                break;
            }
        }
    }
    return levels;
}

InformationStructure kale_joint(const TwoTeamDGM& dgm) {
    if (dgm.pos_levels.empty()) throw InputError("two-team model needs at least one PoS level");
    if (!(dgm.win_without > 0.0 && dgm.win_without < 1.0)) {
        throw InputError("win probability without the new player must lie in (0, 1)");
    }
    const double weight = 1.0 / static_cast<double>(dgm.pos_levels.size());
    const double q = dgm.win_without;
    std::vector<std::string> signals;
    std::vector<double> joint;
    double marginal = 0.0;
    for (double pos : dgm.pos_levels) {
        const double w = pos_to_win_probability(pos);
        marginal += weight * w;
        signals.push_back(fmt::format("pos={:.6g}", pos));
        joint.insert(joint.end(), {weight * (1 - q) * (1 - w), weight * (1 - q) * w,
                                   weight * q * (1 - w), weight * q * w});
    }
    if (dgm.target_prior && std::abs(marginal - *dgm.target_prior) > 0.005) {
        throw InputError(fmt::format(
            "PoS levels imply a prior win probability of {:.4f}, expected {:.3f} +/- 0.005",
            marginal, *dgm.target_prior));
    }
    return InformationStructure(std::move(signals), 4, std::move(joint));
}

// ---------------------------------------------------------------------------
// Box-Cox t

void check_parameters(const BoxCoxT& d) {
    if (!(d.mu > 0.0) || !(d.sigma > 0.0) || !(d.tau > 0.0) || !std::isfinite(d.nu) ||
        !std::isfinite(d.mu) || !std::isfinite(d.sigma)) {
        throw InputError(fmt::format("invalid Box-Cox t parameters mu={} sigma={} nu={} tau={}",
                                     d.mu, d.sigma, d.nu, d.tau));
    }
}

namespace {

// Mass of the untruncated t that maps onto x > 0.
double truncation_mass(const boost::math::students_t_distribution<double>& t, const BoxCoxT& d) {
    if (d.nu == 0.0) return 1.0;
    return boost::math::cdf(t, 1.0 / (d.sigma * std::abs(d.nu)));
}

}  // namespace

double boxcox_t_cdf(const BoxCoxT& d, double x) {
    check_parameters(d);
    if (x <= 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    const boost::math::students_t_distribution<double> t(d.tau);
    const double z = d.nu == 0.0 ? std::log(x / d.mu) / d.sigma
                                 : (std::pow(x / d.mu, d.nu) - 1.0) / (d.nu * d.sigma);
    const double lower = d.nu > 0.0 ? boost::math::cdf(t, -1.0 / (d.sigma * d.nu)) : 0.0;
    const double p = (boost::math::cdf(t, z) - lower) / truncation_mass(t, d);
    return std::clamp(p, 0.0, 1.0);
}

double boxcox_t_quantile(const BoxCoxT& d, double p) {
    check_parameters(d);
    if (!(p > 0.0 && p < 1.0)) throw InputError(fmt::format("quantile level {} outside (0, 1)", p));
    const boost::math::students_t_distribution<double> t(d.tau);
    const double mass = truncation_mass(t, d);
    const double z = d.nu <= 0.0 ? boost::math::quantile(t, p * mass)
                                 : boost::math::quantile(t, 1.0 - (1.0 - p) * mass);
    if (d.nu == 0.0) return d.mu * std::exp(d.sigma * z);
    return d.mu * std::pow(d.nu * d.sigma * z + 1.0, 1.0 / d.nu);
}

double boxcox_t_sample(const BoxCoxT& d, Rng& rng) { return boxcox_t_quantile(d, rng.uniform()); }

std::vector<TrialDistribution> parse_trial_distributions(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("distribution file is empty");
    detail::strip_bom(line);
    const auto header = detail::split_csv_line(line);
    const std::vector<std::string> expected{"trial_id", "mu", "sigma", "nu", "tau"};
    std::vector<std::size_t> column(expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto it = std::find(header.begin(), header.end(), expected[i]);
        if (it == header.end()) {
            throw InputError(fmt::format("distribution file lacks column '{}'", expected[i]));
        }
        column[i] = static_cast<std::size_t>(it - header.begin());
    }
    std::vector<TrialDistribution> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank(line)) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw InputError(fmt::format("distribution file line {}: expected {} fields, got {}",
                                         line_no, header.size(), fields.size()));
        }
        TrialDistribution td;
        td.trial_id = fields[column[0]];
        try {
            td.dist = {std::stod(fields[column[1]]), std::stod(fields[column[2]]),
                       std::stod(fields[column[3]]), std::stod(fields[column[4]])};
        } catch (const std::logic_error&) {
            throw InputError(fmt::format("distribution file line {}: non-numeric parameter", line_no));
        }
        check_parameters(td.dist);
        out.push_back(std::move(td));
    }
    if (out.empty()) throw InputError("distribution file has no trials");
    return out;
}

std::vector<TrialDistribution> read_trial_distributions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open distribution file '{}'", path.string()));
    return parse_trial_distributions(in);
}

// ---------------------------------------------------------------------------
// Discretization

DiscretizedDistribution discretize(const std::function<double(double)>& cdf,
                                   std::span<const double> grid) {
    if (grid.empty()) throw InputError("discretization grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end()) ||
        std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
        throw InputError("discretization grid must be strictly ascending");
    }
    DiscretizedDistribution out;
    out.grid.assign(grid.begin(), grid.end());
    out.masses.resize(grid.size());
    double previous = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double edge = 0.5 * (grid[i] + grid[i + 1]);
        const double c = cdf(edge);
        out.masses[i] = std::max(0.0, c - previous);
        previous = std::max(previous, c);
    }
    out.masses.back() = std::max(0.0, 1.0 - previous);
    return out;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw InputError("grid step must be positive and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = lo + step * static_cast<double>(i);
    return grid;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

constexpr std::size_t kBatches = 8;

struct BatchSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
};

}  // namespace

McEstimate monte_carlo_score(const DecisionProblem& problem, std::span<const std::size_t> policy,
                             std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InputError("Monte Carlo needs at least one draw");
    const auto& structure = problem.structure;
    if (policy.size() != structure.num_signals()) {
        throw InputError("policy must assign one action to every signal");
    }
    for (std::size_t a : policy) {
        if (a >= problem.rule.num_actions()) throw InputError("policy action out of range");
    }
    const std::size_t ns = structure.num_states();
    const auto joint_cdf = cumulative_sums(structure.joint());
    std::vector<std::vector<double>> posterior_cdf;
    std::vector<double> arrivals;
    if (const auto* t = problem.rule.transit()) {
        arrivals = t->arrivals;
        for (std::size_t v = 0; v < structure.num_signals(); ++v) {
            posterior_cdf.push_back(cumulative_sums(structure.row(v)));
        }
    }

    std::vector<BatchSums> sums(kBatches);
    auto run_batch = [&](std::size_t b) {
        const std::size_t count = n / kBatches + (b < n % kBatches ? 1 : 0);
        Rng rng(Rng::derive(seed, b));
        BatchSums& out = sums[b];
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t cell = rng.categorical(joint_cdf);
            const std::size_t v = cell / ns;
            const std::size_t s = cell % ns;
            double second = 0.0;
            if (!posterior_cdf.empty()) second = arrivals[rng.categorical(posterior_cdf[v])];
            const double score = problem.rule.realized_payoff(policy[v], s, second);
            out.sum += score;
            out.sum_sq += score * score;
            ++out.n;
        }
    };
    {
        std::vector<std::jthread> workers;
        const std::size_t threads =
            std::max<std::size_t>(1, std::min<std::size_t>(kBatches, std::thread::hardware_concurrency()));
        for (std::size_t w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t b = w; b < kBatches; b += threads) run_batch(b);
            });
        }
    }
    BatchSums total;
    for (const auto& b : sums) {
        total.sum += b.sum;
        total.sum_sq += b.sum_sq;
        total.n += b.n;
    }
    McEstimate est;
    est.n = total.n;
    est.mean = total.sum / static_cast<double>(total.n);
    if (total.n > 1) {
        const double var = std::max(0.0, (total.sum_sq - total.sum * est.mean) /
                                             static_cast<double>(total.n - 1));
        est.standard_error = std::sqrt(var / static_cast<double>(total.n));
    }
    return est;
}

}  // namespace ratbench
