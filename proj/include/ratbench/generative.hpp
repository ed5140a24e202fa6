#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ratbench/core.hpp"

namespace ratbench {

/// Seedable generator. Draw conversions are written out explicitly so a seed
/// reproduces the same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream derived from (seed, stream) by SplitMix64 mixing.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next() { return engine_(); }
    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    std::size_t below(std::size_t n);
    /// Index i with cumulative[i-1] <= u < cumulative[i]; cumulative ends at ~1.
    std::size_t categorical(std::span<const double> cumulative);

private:
    std::mt19937_64 engine_;
};

std::vector<double> cumulative_sums(std::span<const double> weights);

double normal_cdf(double x);
double normal_quantile(double p);

// --- weather-style threshold model ------------------------------------------

enum class ThresholdDirection { AtOrBelow, AtOrAbove };

/// x ~ N(mean, sigma^2) with sigma drawn from a finite set; the payoff-relevant
/// state is 1 when x falls on the chosen side of the threshold.
struct GaussianThresholdDGM {
    double mean = 0.0;
    std::vector<double> sigmas;
    std::vector<double> sigma_probabilities;
    double threshold = 0.0;
    ThresholdDirection direction = ThresholdDirection::AtOrBelow;
};

/// One signal per sigma level; states are {0, 1}.
InformationStructure weather_joint(const GaussianThresholdDGM& dgm);

// --- two-team probability-of-superiority model ------------------------------

/// Win probability with the new player implied by a probability of
/// superiority, when both scores share sigma and the baseline mean sits on the
/// win threshold: Phi(sqrt(2) * Phi^-1(pos)).
double pos_to_win_probability(double pos);
double win_probability_to_pos(double win_probability);

enum class PosSpacing { Linear, Geometric, LogOdds };

/// n levels from lo to hi inclusive under the given spacing.
std::vector<double> pos_levels(PosSpacing spacing, double lo, double hi, std::size_t n);

struct TwoTeamDGM {
    std::vector<double> pos_levels;
    double win_without = 0.5;
    /// When set, the marginal win probability must land within 0.005 of it.
    std::optional<double> target_prior = 0.805;
};

/// Signals are the PoS levels (uniform); states are the four (theta0, theta1)
/// outcomes ordered lose-lose, lose-win, win-lose, win-win with theta0
/// independent of the signal.
InformationStructure kale_joint(const TwoTeamDGM& dgm);

// --- Box-Cox t -----------------------------------------------------------------

/// Box-Cox t in the GAMLSS parameterization (truncated so the support is x > 0).
struct BoxCoxT {
    double mu = 1.0;
    double sigma = 0.1;
    double nu = 1.0;
    double tau = 10.0;
};

void check_parameters(const BoxCoxT& d);
double boxcox_t_cdf(const BoxCoxT& d, double x);
double boxcox_t_quantile(const BoxCoxT& d, double p);
double boxcox_t_sample(const BoxCoxT& d, Rng& rng);

struct TrialDistribution {
    std::string trial_id;
    BoxCoxT dist;
};

/// CSV with header trial_id,mu,sigma,nu,tau.
std::vector<TrialDistribution> read_trial_distributions(const std::filesystem::path& path);
std::vector<TrialDistribution> parse_trial_distributions(std::istream& in);

// --- discretization ------------------------------------------------------------

struct DiscretizedDistribution {
    std::vector<double> grid;
    std::vector<double> masses;
};

/// Cells are centred on the grid points with edges at midpoints; the tails
/// beyond the first and last edge fold into the end cells.
DiscretizedDistribution discretize(const std::function<double(double)>& cdf,
                                   std::span<const double> grid);

std::vector<double> uniform_grid(double lo, double hi, double step);

// --- Monte Carlo ----------------------------------------------------------------

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n = 0;
};

/// Average realized score of a signal -> action policy over n draws of
/// (signal, state) from the joint. For transit rules the second arrival is
/// drawn from the signal's posterior. Deterministic given the seed; batches
/// run in parallel and merge in a fixed order.
McEstimate monte_carlo_score(const DecisionProblem& problem, std::span<const std::size_t> policy,
                             std::size_t n, std::uint64_t seed);

}  // namespace ratbench
