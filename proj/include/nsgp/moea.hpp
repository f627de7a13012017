#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "nsgp/data.hpp"
#include "nsgp/expr.hpp"
#include "nsgp/objectives.hpp"

namespace nsgp {

struct Individual {
    Tree tree;
    ObjectiveVector obj;
    ScalingCoeffs scaling;
    // Valid only after a sort pass over the containing population.
    std::size_t rank = 0;
    double crowd = 0.0;
};

struct EvolutionConfig {
    std::size_t pop_size = 1000;
    std::size_t generations = 100;
    double crossover_prob = 0.9;
    std::size_t tournament_size = 2;
    int min_init_depth = 1;
    int max_init_depth = 6;
    ObjectiveContext objectives;
    std::uint64_t seed = 0;
    // Threads used for fitness evaluation. Results do not depend on it.
    std::size_t workers = 1;

    // Throws ConfigError.
    void validate() const;
};

// Minimization: a <= b everywhere and a < b somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) noexcept;

using Fronts = std::vector<std::vector<std::size_t>>;

// Deb's fast non-dominated sort. Front k holds the indices dominated only by
// members of fronts 0..k-1; indices inside a front are ascending.
Fronts fast_nondominated_sort(std::span<const ObjectiveVector> points);

// Same, and stores each individual's front index in `rank`.
Fronts fast_nondominated_sort(std::span<Individual> pop);

// Crowding distance of each point of one front. Boundary points of every
// objective get +inf; objectives with max == min add nothing to interior
// points. Ties keep input order.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

// `tournament_size` uniform picks with replacement; lower rank wins, then
// larger crowding, then the earliest pick.
const Individual& crowded_tournament(std::span<const Individual> pop, Rng& rng, std::size_t tournament_size = 2);

struct GenerationStats {
    std::size_t generation = 0;
    double best_err = 0.0;
    double median_err = 0.0;
    std::size_t front0_size = 0;
};

struct EvolutionObserver {
    // Every batch of freshly evaluated individuals (initial population, then
    // each generation's offspring).
    std::function<void(std::span<const Individual>)> on_evaluated;
    // The population after survival at each generation (0 = initial).
    std::function<void(std::size_t, std::span<const Individual>)> on_generation;
};

struct EvolutionResult {
    std::vector<Individual> population;
    std::vector<GenerationStats> trace; // generation 0 .. generations
};

// NSGA-II on the training split. Deterministic for a given rng state and
// independent of the worker count.
EvolutionResult evolve(const EvolutionConfig& config, const Dataset& train, Rng& rng, const EvolutionObserver* observer = nullptr);

// Seeds a fresh engine from config.seed.
EvolutionResult evolve(const EvolutionConfig& config, const Dataset& train, const EvolutionObserver* observer = nullptr);

} // namespace nsgp
