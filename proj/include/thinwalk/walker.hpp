#pragma once

// Uniform random walk on Cay(Gamma, A) started at the identity: Monte Carlo
// trajectories and an exact convolution oracle for small n.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <unordered_map>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "matgroup.hpp"
#include "rng.hpp"
#include "verdict.hpp"

namespace thinwalk {

inline constexpr std::size_t kDefaultExactBudget = 5'000'000;

template <class E>
struct WalkConfig {
    GeneratorMultiset<E> generators;
    std::uint64_t length = 0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    std::size_t exact_budget = kDefaultExactBudget;

    void validate() const {
        if (trials < 1) throw ConfigError("trial count must be at least 1");
        if (exact_budget < 1) throw ConfigError("exact budget must be at least 1");
        if (generators.size() == 0) throw ConfigError("walk needs a generator multiset");
    }
};

/// Calls visit(k, state) for every grid index k once the walk reaches step grid[k].
/// The grid must be sorted ascending.
template <class E, class Visit>
void observe_walk(const GeneratorMultiset<E>& gens, const CounterRng& rng, std::uint64_t trial,
                  const std::vector<std::uint64_t>& grid, Visit&& visit) {
    const auto& steps = gens.expanded();
    E state = gens.identity();
    E scratch = state;
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (; t < grid[k]; ++t) {
            const auto pick = rng.uniform(trial, t, steps.size());
            E::multiply_into(scratch, state, steps[pick]);
            std::swap(state, scratch);
        }
        visit(k, state);
    }
}

/// The full trajectory omega_0 = identity, ..., omega_n of one trial.
template <class E>
std::vector<E> run_walk(const WalkConfig<E>& config, std::uint64_t trial_index) {
    config.validate();
    if (trial_index >= config.trials) throw ConfigError("trial index out of range");
    std::vector<std::uint64_t> grid(config.length + 1);
    for (std::uint64_t i = 0; i <= config.length; ++i) grid[i] = i;
    std::vector<E> path;
    path.reserve(grid.size());
    const CounterRng rng(config.seed);
    observe_walk(config.generators, rng, trial_index, grid,
                 [&](std::size_t, const E& state) { path.push_back(state); });
    return path;
}

/// Law of omega_n as integer path counts over a common denominator |A|^n.
template <class E>
struct WalkDistribution {
    std::unordered_map<E, BigInt, ElementHash> counts;
    BigInt denominator = 1;
    std::uint64_t steps = 0;

    Rational probability(const E& g) const {
        auto it = counts.find(g);
        if (it == counts.end()) return Rational(0);
        return Rational(it->second, denominator);
    }

    Rational total_mass() const {
        BigInt s = 0;
        for (const auto& [g, c] : counts) s += c;
        return Rational(s, denominator);
    }

    /// Sorted by canonical key so the output is stable.
    nlohmann::json to_json() const {
        std::vector<std::pair<std::string, const E*>> rows;
        for (const auto& [g, c] : counts) rows.emplace_back(g.key(), &g);
        std::sort(rows.begin(), rows.end());
        nlohmann::json support = nlohmann::json::array();
        for (const auto& [key, g] : rows) {
            support.push_back({{"element", g->to_json()}, {"probability", rational_to_string(probability(*g))}});
        }
        return {{"steps", steps}, {"denominator", denominator.str()}, {"support", support}};
    }
};

template <class E>
WalkDistribution<E> exact_distribution(const GeneratorMultiset<E>& gens, std::uint64_t n,
                                       std::size_t budget = kDefaultExactBudget) {
    if (budget < 1) throw ConfigError("exact budget must be at least 1");
    WalkDistribution<E> dist;
    dist.counts.emplace(gens.identity(), BigInt(1));
    const auto& distinct = gens.distinct();
    const auto& mult = gens.multiplicities();
    for (std::uint64_t step = 0; step < n; ++step) {
        std::unordered_map<E, BigInt, ElementHash> next;
        next.reserve(dist.counts.size() * distinct.size());
        for (const auto& [g, c] : dist.counts) {
            for (std::size_t a = 0; a < distinct.size(); ++a) {
                next[compose(g, distinct[a])] += c * mult[a];
                if (next.size() > budget) {
                    throw BudgetExceeded("exact distribution exceeds " + std::to_string(budget) + " states at step " +
                                         std::to_string(step + 1));
                }
            }
        }
        dist.counts = std::move(next);
        dist.denominator *= gens.size();
    }
    dist.steps = n;
    return dist;
}

/// P(omega_n in Z) exactly; any UNKNOWN verdict on the support is an error.
template <class E, class Oracle>
Rational hit_probability_exact(const GeneratorMultiset<E>& gens, std::uint64_t n, const Oracle& oracle,
                               std::size_t budget = kDefaultExactBudget) {
    const WalkDistribution<E> dist = exact_distribution(gens, n, budget);
    BigInt hits = 0;
    for (const auto& [g, c] : dist.counts) {
        const OracleVerdict v = oracle(g);
        if (v.is_unknown()) throw UndecidedMembership("oracle undecided on " + g.key() + ": " + v.certificate);
        if (v.is_in()) hits += c;
    }
    return Rational(hits, dist.denominator);
}

/// Exact hit probabilities at every (ascending) grid point from a single convolution pass.
template <class E, class Oracle>
std::vector<Rational> hit_probability_exact_grid(const GeneratorMultiset<E>& gens, const std::vector<std::uint64_t>& grid,
                                                 const Oracle& oracle, std::size_t budget = kDefaultExactBudget) {
    if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("grid must be ascending");
    std::vector<Rational> out;
    std::unordered_map<E, BigInt, ElementHash> cur{{gens.identity(), BigInt(1)}};
    BigInt denominator = 1;
    const auto& distinct = gens.distinct();
    const auto& mult = gens.multiplicities();
    std::uint64_t step = 0;
    for (std::uint64_t target : grid) {
        for (; step < target; ++step) {
            std::unordered_map<E, BigInt, ElementHash> next;
            next.reserve(cur.size() * distinct.size());
            for (const auto& [g, c] : cur) {
                for (std::size_t a = 0; a < distinct.size(); ++a) {
                    next[compose(g, distinct[a])] += c * mult[a];
                    if (next.size() > budget) {
                        throw BudgetExceeded("exact distribution exceeds " + std::to_string(budget) + " states");
                    }
                }
            }
            cur = std::move(next);
            denominator *= gens.size();
        }
        BigInt hits = 0;
        for (const auto& [g, c] : cur) {
            const OracleVerdict v = oracle(g);
            if (v.is_unknown()) throw UndecidedMembership("oracle undecided on " + g.key() + ": " + v.certificate);
            if (v.is_in()) hits += c;
        }
        out.emplace_back(hits, denominator);
    }
    return out;
}

/// Dense variant for walks on Z: the support after n steps lies in [-n*r, n*r].
template <class Oracle>
std::vector<Rational> line_hit_probability_exact_grid(const GeneratorMultiset<AbelianElement>& gens,
                                                      const std::vector<std::uint64_t>& grid, const Oracle& oracle,
                                                      std::size_t budget = kDefaultExactBudget) {
    if (gens.identity().rank() != 1) throw ConfigError("line walk needs rank 1");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("grid must be ascending");
    std::vector<long long> steps;
    long long reach = 0;
    for (const auto& a : gens.distinct()) {
        if (boost::multiprecision::abs(a[0]) > 1'000'000) throw ConfigError("line walk steps too large");
        steps.push_back(a[0].convert_to<long long>());
        reach = std::max(reach, std::abs(steps.back()));
    }
    const std::uint64_t n_max = grid.empty() ? 0 : grid.back();
    const long long offset = reach * static_cast<long long>(n_max);
    const auto width = static_cast<std::size_t>(2 * offset + 1);
    if (width > budget) throw BudgetExceeded("line walk needs " + std::to_string(width) + " cells");
    const auto& mult = gens.multiplicities();
    std::vector<BigInt> cur(width, BigInt(0)), next(width, BigInt(0));
    cur[static_cast<std::size_t>(offset)] = 1;
    BigInt denominator = 1;
    std::vector<Rational> out;
    std::uint64_t step = 0;
    long long lo = offset, hi = offset;  // occupied window
    for (std::uint64_t target : grid) {
        for (; step < target; ++step) {
            const long long nlo = lo - reach, nhi = hi + reach;
            for (long long i = nlo; i <= nhi; ++i) next[static_cast<std::size_t>(i)] = 0;
            for (long long i = lo; i <= hi; ++i) {
                const BigInt& c = cur[static_cast<std::size_t>(i)];
                if (c == 0) continue;
                for (std::size_t a = 0; a < steps.size(); ++a) {
                    BigInt& dst = next[static_cast<std::size_t>(i + steps[a])];
                    if (mult[a] == 1) dst += c;
                    else dst += c * mult[a];
                }
            }
            cur.swap(next);
            lo = nlo;
            hi = nhi;
            denominator *= gens.size();
        }
        BigInt hits = 0;
        for (long long i = lo; i <= hi; ++i) {
            const BigInt& c = cur[static_cast<std::size_t>(i)];
            if (c == 0) continue;
            const OracleVerdict v = oracle(AbelianElement{i - offset});
            if (v.is_unknown()) throw UndecidedMembership("oracle undecided at " + std::to_string(i - offset));
            if (v.is_in()) hits += c;
        }
        out.emplace_back(hits, denominator);
    }
    return out;
}

struct McEstimate {
    std::uint64_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    std::uint64_t unknown = 0;
    double estimate = 0.0;
    double half_width = 0.0;

    double unknown_rate() const { return trials ? static_cast<double>(unknown) / static_cast<double>(trials) : 0.0; }
};

inline McEstimate make_estimate(std::uint64_t n, std::uint64_t trials, std::uint64_t hits, std::uint64_t unknown) {
    McEstimate e{n, trials, hits, unknown, 0.0, 0.0};
    const double m = static_cast<double>(trials);
    e.estimate = static_cast<double>(hits) / m;
    e.half_width = 1.96 * std::sqrt(e.estimate * (1.0 - e.estimate) / m);
    return e;
}

inline unsigned default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1U : hw;
}

/// Monte Carlo hit counts at every grid point; trial i's walk is shared across the grid.
/// Trials are split into contiguous chunks and the integer counts are summed, so the
/// result is independent of the thread count.
template <class E, class Oracle>
std::vector<McEstimate> hit_probability_mc_grid(const GeneratorMultiset<E>& gens, std::vector<std::uint64_t> grid,
                                                const Oracle& oracle, std::uint64_t trials, std::uint64_t seed,
                                                unsigned threads = 0) {
    if (trials < 1) throw ConfigError("trial count must be at least 1");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("grid must be ascending");
    if (threads == 0) threads = default_threads();
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
    const CounterRng rng(seed);
    struct Tally {
        std::vector<std::uint64_t> hits, unknown;
    };
    std::vector<Tally> tallies(threads, Tally{std::vector<std::uint64_t>(grid.size(), 0),
                                              std::vector<std::uint64_t>(grid.size(), 0)});
    auto work = [&](unsigned w) {
        const std::uint64_t begin = trials * w / threads;
        const std::uint64_t end = trials * (w + 1) / threads;
        Tally& tally = tallies[w];
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            observe_walk(gens, rng, trial, grid, [&](std::size_t k, const E& state) {
                const OracleVerdict v = oracle(state);
                if (v.is_in()) ++tally.hits[k];
                else if (v.is_unknown()) ++tally.unknown[k];
            });
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    std::vector<McEstimate> out;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::uint64_t hits = 0, unknown = 0;
        for (const auto& t : tallies) {
            hits += t.hits[k];
            unknown += t.unknown[k];
        }
        out.push_back(make_estimate(grid[k], trials, hits, unknown));
    }
    return out;
}

template <class E, class Oracle>
McEstimate hit_probability_mc(const GeneratorMultiset<E>& gens, std::uint64_t n, const Oracle& oracle,
                              std::uint64_t trials, std::uint64_t seed, unsigned threads = 0) {
    return hit_probability_mc_grid(gens, {n}, oracle, trials, seed, threads).front();
}

}  // namespace thinwalk
