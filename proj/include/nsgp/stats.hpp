#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsgp/data.hpp"
#include "nsgp/features.hpp"
#include "nsgp/moea.hpp"
#include "nsgp/objectives.hpp"

namespace nsgp {

struct FrontMember {
    std::string tree; // infix text
    FeatureVector features;
    double phi_objective = 0.0;
    // Scaled MSE / var(y_train), coefficients fit on the training split.
    double err_train = 0.0;
    double err_val = 0.0;
    double err_test = 0.0;
    double interp = 0.0; // objective used during evolution

    friend bool operator==(const FrontMember&, const FrontMember&) = default;
};

// Non-dominated members under (err_val, interp), ascending by err_val.
struct FrontRecord {
    std::vector<FrontMember> members;
    std::uint64_t source_run = 0;
};

struct EvaluationSplits {
    const Dataset& train;
    const Dataset& val;
    const Dataset& test;
};

// Re-scores the final population on the validation split with each
// individual's training coefficients and keeps the non-dominated set.
// Members with identical (err_val, interp) collapse to the one with the
// lexicographically smallest tree text. Throws ConfigError on an empty
// population.
FrontRecord validation_front(std::span<const Individual> population, const EvaluationSplits& splits, const ObjectiveContext& ctx);

// Index of the member at percentile `tau` (1..100) of the err_val ordering:
// clamp(ceil(tau * |F| / 100) - 1, 0, |F| - 1).
std::size_t tau_index(std::size_t front_size, int tau);

const FrontMember& select_tau(const FrontRecord& front, int tau);

// Two-sided Wilcoxon signed-rank p-value for paired samples. Zero differences
// are dropped and tied magnitudes share their average rank. Exact null
// distribution for up to kWilcoxonExactMax non-zero pairs, normal
// approximation with tie correction above. All-zero differences give 1.
inline constexpr std::size_t kWilcoxonExactMax = 25;
double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

// Holm step-down procedure. Flags are returned in input order.
std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha = 0.05);

double median(std::vector<double> v);

// front.csv: tree,l,n_o,n_nao,n_naoc,phi_objective,err_train,err_val,err_test
void write_front_csv(const FrontRecord& front, const std::string& path);

// interp is rebuilt from the mode: phi_objective or l.
FrontRecord read_front_csv(const std::string& path, InterpMode mode);

} // namespace nsgp
