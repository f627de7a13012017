#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsgp/features.hpp"
#include "nsgp/matrix.hpp"

namespace nsgp {

struct SurveyAnswer {
    FeatureVector features;
    bool correct = false;
    int confidence = 1; // 1..4
};

// Answers merged on identical feature vectors.
struct SurveySample {
    FeatureVector features;
    std::size_t n_answers = 0;
    double correctness_ratio = 0.0;
    double mean_conf_norm = 0.0; // mean of (confidence - 1) / 3
    double label = 0.0;          // 100 * correctness_ratio * mean_conf_norm
};

inline constexpr std::size_t kMinAnswersPerSample = 10;

// Groups answers by feature vector and drops groups with fewer than
// kMinAnswersPerSample answers. Output is ordered by feature vector.
std::vector<SurveySample> build_regression_dataset(std::span<const SurveyAnswer> answers);

// Inverse bin frequency over `bins` equal-width bins on [0, 100]:
// total / (occupied_bins * count(bin)). The weights sum to the sample count.
std::vector<double> bin_weights(std::span<const double> labels, std::size_t bins = 10);

struct ElasticNetHyper {
    double alpha = 1e-3;
    double l1_ratio = 0.5;
    // Step size relative to the stability bound of the (internally
    // standardized) problem. Values above ~2 diverge.
    double eta0 = 0.5;
    // Per-epoch decay: eta0 / (1 + epoch)^power_t.
    double power_t = 0.5;
    std::size_t epochs = 400;
};

// intercept + slopes for (l, n_o, n_nao, n_naoc) on raw counts.
struct LinearModel {
    double intercept = 0.0;
    std::array<double, 4> slopes{};

    double predict(const FeatureVector& fv) const noexcept;
    PhiCoefficients to_phi() const noexcept;
};

// Minimizes
//   sum_i w_i (y_i - f(x_i))^2 / (2 sum_i w_i)
//     + alpha * (l1_ratio * |w|_1 + (1 - l1_ratio) / 2 * |w|_2^2)
// over raw feature counts by proximal SGD with iterate averaging over the
// second half of the epochs. The intercept is not penalized. Throws
// DivergenceError on a non-finite loss.
LinearModel fit_elastic_net_sgd(std::span<const SurveySample> samples, std::span<const double> weights, const ElasticNetHyper& hyper, Rng& rng);

double weighted_r2(std::span<const double> y, std::span<const double> pred, std::span<const double> w);
double weighted_mae(std::span<const double> y, std::span<const double> pred, std::span<const double> w);

struct CrossValidationReport {
    ElasticNetHyper best;
    std::size_t best_index = 0;
    double r2_train = 0.0; // mean in-fold weighted R^2
    double r2_test = 0.0;  // weighted R^2 of the pooled held-out predictions
    double mae = 0.0;      // weighted MAE of the held-out predictions (label units)
    std::vector<double> grid_r2_test;
    std::vector<LinearModel> fold_models; // at the best hyper-parameters
    LinearModel averaged;
};

// Leave-one-out over every grid point; each (grid, fold) fit gets its own
// engine seeded from (seed, grid index, fold index).
CrossValidationReport loo_cross_validate(std::span<const SurveySample> samples, std::span<const double> weights, std::span<const ElasticNetHyper> grid,
                                         std::uint64_t seed, std::size_t workers = 1);

// alpha in {1e-4 .. 1}, l1_ratio in {0.1, 0.5, 0.9}.
std::vector<ElasticNetHyper> default_grid();

// Survey files. answers: l,n_o,n_nao,n_naoc,correct,confidence.
// merged samples: l,n_o,n_nao,n_naoc,n_answers,label (label in percent).
std::vector<SurveyAnswer> read_survey_answers(const std::string& path);
std::vector<SurveySample> read_survey_samples(const std::string& path);

// Dispatches on the header; answer files are merged.
std::vector<SurveySample> load_survey(const std::string& path);

} // namespace nsgp
