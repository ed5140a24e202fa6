#pragma once

// Independent reference computations. Nothing here calls into the library's
// numerics; distributions use std::erfc and explicit enumeration.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Inverse standard normal by bisection on phi.
inline double phi_inv(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct WeatherNumbers {
    std::vector<double> freeze;  // P(freezing | sigma)
    double prior_freeze = 0.0;
    double baseline = 0.0;
    double optimal = 0.0;
};

/// Salting problem: no salt costs 100 on a freeze, salting costs 10 when it
/// does not freeze.
inline WeatherNumbers weather() {
    WeatherNumbers w;
    for (double sigma : {2.0, 3.0, 4.0, 5.0}) w.freeze.push_back(phi((0.0 - 5.0) / sigma));
    for (double q : w.freeze) w.prior_freeze += q / 4.0;
    const auto best = [](double q) { return std::max(-100.0 * q, -10.0 * (1.0 - q)); };
    w.baseline = best(w.prior_freeze);
    for (double q : w.freeze) w.optimal += best(q) / 4.0;
    return w;
}

/// Bus payoff written out from the catch / miss description.
struct Transit {
    double r0, rw, rd, T;
    double payoff(double a, double theta, double second) const {
        if (a <= theta) return r0 * a + rw * (theta - a) + rd * T;
        const double arrival_delay = (second + 30.0) - theta;
        return r0 * a + rw * (second + 30.0 - a) + rd * (T - arrival_delay);
    }
};

/// E over theta and an independent second arrival, both from p on grid.
inline double transit_expectation(const Transit& t, double a, const std::vector<double>& grid,
                                  const std::vector<double>& p) {
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            total += p[i] * p[j] * t.payoff(a, grid[i], grid[j]);
        }
    }
    return total;
}

/// Random small decision problem.
struct Problem {
    std::size_t states, actions, signals;
    std::vector<std::vector<double>> scores;  // [action][state]
    std::vector<std::vector<double>> joint;   // [signal][state], sums to 1
};

inline std::vector<double> simplex(std::mt19937_64& gen, std::size_t n, double sparsity = 0.0) {
    std::exponential_distribution<double> e(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        x = u(gen) < sparsity ? 0.0 : e(gen);
        total += x;
    }
    if (total == 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (auto& x : w) x /= total;
    return w;
}

inline Problem random_problem(std::mt19937_64& gen) {
    std::uniform_int_distribution<std::size_t> ns(2, 5), na(2, 5), nv(1, 6);
    std::uniform_real_distribution<double> score(-10.0, 10.0);
    Problem p{ns(gen), na(gen), nv(gen), {}, {}};
    p.scores.assign(p.actions, std::vector<double>(p.states));
    for (auto& row : p.scores) {
        for (auto& x : row) x = score(gen);
    }
    // Every signal keeps positive mass; individual cells may be zero.
    const auto weights = simplex(gen, p.signals);
    for (std::size_t v = 0; v < p.signals; ++v) {
        auto row = simplex(gen, p.states, 0.3);
        for (auto& x : row) x *= weights[v];
        p.joint.push_back(std::move(row));
    }
    return p;
}

/// Sum over signals of max over actions of the unnormalized posterior score.
inline double visualization_optimal(const Problem& p, const std::vector<std::vector<double>>& joint) {
    double total = 0.0;
    for (const auto& row : joint) {
        double best = -1e300;
        for (const auto& s : p.scores) {
            double e = 0.0;
            for (std::size_t k = 0; k < row.size(); ++k) e += row[k] * s[k];
            best = std::max(best, e);
        }
        bool any = std::any_of(row.begin(), row.end(), [](double x) { return x > 0.0; });
        if (any) total += best;
    }
    return total;
}

/// Joint of a garbled signal: each signal is remapped through a random kernel.
inline std::vector<std::vector<double>> garble(std::mt19937_64& gen,
                                               const std::vector<std::vector<double>>& joint,
                                               std::size_t outputs) {
    std::vector<std::vector<double>> out(outputs, std::vector<double>(joint.front().size(), 0.0));
    for (const auto& row : joint) {
        const auto k = simplex(gen, outputs);
        for (std::size_t o = 0; o < outputs; ++o) {
            for (std::size_t s = 0; s < row.size(); ++s) out[o][s] += k[o] * row[s];
        }
    }
    return out;
}

}  // namespace oracle
