#include "nsgp/moea.hpp"

#include <algorithm>
#include <numeric>

#include "nsgp/error.hpp"
#include "nsgp/parallel.hpp"

namespace nsgp {

void EvolutionConfig::validate() const
{
    if (pop_size == 0 || pop_size % 2 != 0) {
        throw ConfigError("population size must be positive and even");
    }
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
        throw ConfigError("crossover probability must be in [0, 1]");
    }
    if (tournament_size == 0) {
        throw ConfigError("tournament size must be positive");
    }
    if (min_init_depth <= 0 || min_init_depth > max_init_depth) {
        throw ConfigError("initialization depths need 0 < min <= max");
    }
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) noexcept
{
    return a.err <= b.err && a.interp <= b.interp && (a.err < b.err || a.interp < b.interp);
}

Fronts fast_nondominated_sort(std::span<const ObjectiveVector> points)
{
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    Fronts fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(points[p], points[q])) {
                dominated[p].push_back(q);
                ++count[q];
            } else if (dominates(points[q], points[p])) {
                dominated[q].push_back(p);
                ++count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            for (std::size_t q : dominated[p]) {
                if (--count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

Fronts fast_nondominated_sort(std::span<Individual> pop)
{
    std::vector<ObjectiveVector> points;
    points.reserve(pop.size());
    for (const auto& ind : pop) points.push_back(ind.obj);
    Fronts fronts = fast_nondominated_sort(points);
    for (std::size_t k = 0; k < fronts.size(); ++k) {
        for (std::size_t i : fronts[k]) pop[i].rank = k;
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;

    std::vector<std::size_t> order(n);
    auto per_objective = [&](auto value) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return value(front[i]) < value(front[j]); });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double range = value(front[order.back()]) - value(front[order.front()]);
        if (!(range > 0.0) || !std::isfinite(range)) return;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            dist[order[k]] += (value(front[order[k + 1]]) - value(front[order[k - 1]])) / range;
        }
    };
    per_objective([](const ObjectiveVector& o) { return o.err; });
    per_objective([](const ObjectiveVector& o) { return o.interp; });
    return dist;
}

namespace {

// true if a is preferred over b
bool crowded_less(const Individual& a, const Individual& b) noexcept
{
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowd > b.crowd;
}

void assign_crowding(std::span<Individual> pop, const std::vector<std::size_t>& front)
{
    std::vector<ObjectiveVector> pts;
    pts.reserve(front.size());
    for (std::size_t i : front) pts.push_back(pop[i].obj);
    auto d = crowding_distance(pts);
    for (std::size_t k = 0; k < front.size(); ++k) pop[front[k]].crowd = d[k];
}

void evaluate_all(std::span<Individual> batch, const Dataset& train, const EvolutionConfig& config)
{
    parallel_for(batch.size(), config.workers, [&](std::size_t i) {
        auto ev = evaluate_individual(batch[i].tree, train, config.objectives);
        batch[i].obj = ev.obj;
        batch[i].scaling = ev.scaling;
    });
}

GenerationStats summarize(std::size_t gen, std::span<const Individual> pop)
{
    std::vector<double> errs;
    errs.reserve(pop.size());
    std::size_t front0 = 0;
    for (const auto& ind : pop) {
        errs.push_back(ind.obj.err);
        front0 += ind.rank == 0 ? 1 : 0;
    }
    std::sort(errs.begin(), errs.end());
    const std::size_t n = errs.size();
    const double median = n % 2 == 1 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
    return {gen, errs.front(), median, front0};
}

// Ranks and crowds the merged population and keeps the best `target` by
// whole fronts, truncating the last one by descending crowding distance.
std::vector<Individual> survive(std::vector<Individual> merged, std::size_t target)
{
    Fronts fronts = fast_nondominated_sort(std::span<Individual>(merged));
    std::vector<Individual> next;
    next.reserve(target);
    for (const auto& front : fronts) {
        assign_crowding(merged, front);
        if (next.size() + front.size() <= target) {
            for (std::size_t i : front) next.push_back(std::move(merged[i]));
            if (next.size() == target) break;
            continue;
        }
        std::vector<std::size_t> order = front;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return merged[i].crowd > merged[j].crowd; });
        for (std::size_t k = 0; next.size() < target; ++k) next.push_back(std::move(merged[order[k]]));
        break;
    }
    return next;
}

} // namespace

const Individual& crowded_tournament(std::span<const Individual> pop, Rng& rng, std::size_t tournament_size)
{
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Individual* best = &pop[pick(rng)];
    for (std::size_t k = 1; k < tournament_size; ++k) {
        const Individual* challenger = &pop[pick(rng)];
        if (crowded_less(*challenger, *best)) best = challenger;
    }
    return *best;
}

EvolutionResult evolve(const EvolutionConfig& config, const Dataset& train, Rng& rng, const EvolutionObserver* observer)
{
    config.validate();
    if (train.dims() == 0 || train.rows() == 0) {
        throw ConfigError("training split is empty");
    }
    if (!(variance(train.y) > 0.0)) {
        throw ConfigError("training target is constant");
    }

    EvolutionResult result;
    const std::size_t dims = train.dims();

    std::vector<Individual> pop;
    pop.reserve(config.pop_size);
    for (auto& t : ramped_half_and_half(config.pop_size, config.min_init_depth, config.max_init_depth, dims, rng)) {
        pop.push_back(Individual{std::move(t), {}, {}, 0, 0.0});
    }
    evaluate_all(pop, train, config);
    if (observer && observer->on_evaluated) observer->on_evaluated(pop);
    {
        Fronts fronts = fast_nondominated_sort(std::span<Individual>(pop));
        for (const auto& f : fronts) assign_crowding(pop, f);
    }
    result.trace.push_back(summarize(0, pop));
    if (observer && observer->on_generation) observer->on_generation(0, pop);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        std::vector<Individual> offspring;
        offspring.reserve(config.pop_size);
        while (offspring.size() < config.pop_size) {
            const Individual& p1 = crowded_tournament(pop, rng, config.tournament_size);
            const Individual& p2 = crowded_tournament(pop, rng, config.tournament_size);
            Tree c1 = p1.tree;
            Tree c2 = p2.tree;
            if (unit(rng) < config.crossover_prob) {
                std::tie(c1, c2) = subtree_crossover(p1.tree, p2.tree, rng);
            }
            c1 = one_point_mutation(c1, dims, rng);
            c2 = one_point_mutation(c2, dims, rng);
            offspring.push_back(Individual{std::move(c1), {}, {}, 0, 0.0});
            offspring.push_back(Individual{std::move(c2), {}, {}, 0, 0.0});
        }
        evaluate_all(offspring, train, config);
        if (observer && observer->on_evaluated) observer->on_evaluated(offspring);

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
        pop = survive(std::move(merged), config.pop_size);

        result.trace.push_back(summarize(gen, pop));
        if (observer && observer->on_generation) observer->on_generation(gen, pop);
    }
    result.population = std::move(pop);
    return result;
}

EvolutionResult evolve(const EvolutionConfig& config, const Dataset& train, const EvolutionObserver* observer)
{
    Rng rng(config.seed);
    return evolve(config, train, rng, observer);
}

} // namespace nsgp
