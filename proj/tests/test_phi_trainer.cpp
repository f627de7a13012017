#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "nsgp/error.hpp"
#include "nsgp/phi_trainer.hpp"
#include "support/oracles.hpp"

using namespace nsgp;

namespace {

SurveySample sample(FeatureVector fv, double label)
{
    SurveySample s;
    s.features = fv;
    s.n_answers = 10;
    s.label = label;
    return s;
}

std::vector<double> labels_of(std::span<const SurveySample> s)
{
    std::vector<double> y;
    for (const auto& x : s) y.push_back(x.label);
    return y;
}

// Features drawn independently so every slope is identifiable.
std::vector<SurveySample> linear_samples(std::size_t n, const LinearModel& truth, Rng& rng, double noise = 0.0)
{
    std::uniform_int_distribution<int> l(1, 30), o(0, 12), nao(0, 5), naoc(0, 3);
    std::normal_distribution<double> g(0, 1);
    std::vector<SurveySample> out;
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector fv{l(rng), o(rng), nao(rng), naoc(rng)};
        out.push_back(sample(fv, truth.predict(fv) + noise * g(rng)));
    }
    return out;
}

} // namespace

TEST_CASE("build_regression_dataset")
{
    std::vector<SurveyAnswer> answers;
    const FeatureVector a{5, 2, 0, 0};
    for (int i = 0; i < 12; ++i) answers.push_back({a, i < 9, 4});
    const FeatureVector b{3, 1, 1, 0};
    for (int i = 0; i < 9; ++i) answers.push_back({b, true, 4});

    const auto merged = build_regression_dataset(answers);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].features == a);
    CHECK(merged[0].n_answers == 12);
    CHECK(merged[0].correctness_ratio == doctest::Approx(0.75));
    CHECK(merged[0].mean_conf_norm == doctest::Approx(1.0));
    CHECK(merged[0].label == doctest::Approx(75.0));

    CHECK(build_regression_dataset(std::vector<SurveyAnswer>{}).empty());

    answers.push_back({b, false, 1});
    const auto both = build_regression_dataset(answers);
    REQUIRE(both.size() == 2);
    // ordered by feature vector
    CHECK(both[0].features == b);
    CHECK(both[0].label == doctest::Approx(100.0 * 0.9 * 0.9));

    std::vector<SurveyAnswer> bad{{a, true, 5}};
    CHECK_THROWS_AS(build_regression_dataset(bad), DataError);
}

TEST_CASE("property: merging ignores answer order")
{
    Rng rng(7);
    std::uniform_int_distribution<int> f(0, 3), conf(1, 4);
    std::bernoulli_distribution coin(0.6);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<SurveyAnswer> answers(400);
        for (auto& a : answers) a = {{f(rng), f(rng), f(rng) / 2, 0}, coin(rng), conf(rng)};
        const auto ref = build_regression_dataset(answers);
        std::shuffle(answers.begin(), answers.end(), rng);
        const auto again = build_regression_dataset(answers);
        REQUIRE(ref.size() == again.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            REQUIRE(ref[i].features == again[i].features);
            REQUIRE(ref[i].label == again[i].label);
            REQUIRE(ref[i].n_answers >= kMinAnswersPerSample);
            REQUIRE(ref[i].label >= 0.0);
            REQUIRE(ref[i].label <= 100.0);
        }
    }
}

TEST_CASE("bin_weights")
{
    CHECK(bin_weights(std::vector<double>{12, 15, 55}) == std::vector<double>{0.75, 0.75, 1.5});
    CHECK(bin_weights(std::vector<double>{42}) == std::vector<double>{1.0});
    CHECK(bin_weights(std::vector<double>{5, 15, 25, 35}) == std::vector<double>{1, 1, 1, 1});
    // 100 shares the top bin with 95
    CHECK(bin_weights(std::vector<double>{95, 100, 10}) == std::vector<double>{0.75, 0.75, 1.5});

    Rng rng(3);
    std::uniform_real_distribution<double> u(0, 100);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> labels(1 + rep % 40);
        for (auto& l : labels) l = u(rng) * u(rng) / 100.0;
        const auto w = bin_weights(labels);
        REQUIRE(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(static_cast<double>(labels.size())));
    }
}

TEST_CASE("elastic net recovers an exact linear rule")
{
    Rng rng(1);
    LinearModel truth;
    truth.intercept = 10.0;
    truth.slopes = {-2.0, 0.0, 0.0, 0.0};
    const auto samples = linear_samples(60, truth, rng);
    const std::vector<double> w(samples.size(), 1.0);
    ElasticNetHyper h;
    h.alpha = 0.0;
    Rng fit_rng(2);
    const auto m = fit_elastic_net_sgd(samples, w, h, fit_rng);
    CHECK(m.slopes[0] == doctest::Approx(-2.0).epsilon(0.005));
    for (std::size_t j = 1; j < 4; ++j) CHECK(std::abs(m.slopes[j]) < 1e-2);
    CHECK(m.intercept == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("elastic net under heavy shrinkage")
{
    Rng rng(4);
    LinearModel truth;
    truth.intercept = 70.0;
    truth.slopes = {-0.5, -1.0, -3.0, -4.0};
    const auto samples = linear_samples(40, truth, rng, 2.0);
    const auto w = bin_weights(labels_of(samples));
    ElasticNetHyper h;
    h.alpha = 1e6;
    Rng fit_rng(5);
    const auto m = fit_elastic_net_sgd(samples, w, h, fit_rng);
    double wmean = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        wmean += w[i] * samples[i].label;
        wsum += w[i];
    }
    wmean /= wsum;
    for (double s : m.slopes) CHECK(std::abs(s) < 1e-6);
    CHECK(m.intercept == doctest::Approx(wmean).epsilon(1e-3));
}

TEST_CASE("single-feature fit matches weighted least squares")
{
    Rng rng(9);
    std::uniform_int_distribution<int> l(1, 25);
    std::normal_distribution<double> g(0, 3);
    std::uniform_real_distribution<double> wu(0.2, 3.0);
    std::vector<SurveySample> samples;
    std::vector<double> x, y, w;
    for (int i = 0; i < 50; ++i) {
        const int li = l(rng);
        samples.push_back(sample({li, 0, 0, 0}, 60.0 - 1.5 * li + g(rng)));
        x.push_back(li);
        y.push_back(samples.back().label);
        w.push_back(wu(rng));
    }
    ElasticNetHyper h;
    h.alpha = 0.0;
    h.epochs = 2000;
    Rng fit_rng(10);
    const auto m = fit_elastic_net_sgd(samples, w, h, fit_rng);
    const auto [a, b] = oracle::weighted_line_fit(x, y, w);
    CHECK(m.slopes[0] == doctest::Approx(b).epsilon(1e-3));
    CHECK(m.intercept == doctest::Approx(a).epsilon(1e-3));
    CHECK(m.slopes[1] == 0.0);
}

TEST_CASE("elastic net errors")
{
    Rng rng(11);
    LinearModel truth;
    truth.intercept = 50;
    truth.slopes = {-1, -1, -1, -1};
    const auto samples = linear_samples(20, truth, rng);
    const std::vector<double> w(samples.size(), 1.0);
    ElasticNetHyper h;
    h.eta0 = 1e6;
    Rng fit_rng(12);
    try {
        fit_elastic_net_sgd(samples, w, h, fit_rng);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("eta0") != std::string::npos);
    }
    CHECK_THROWS_AS(fit_elastic_net_sgd(std::span(samples).first(1), std::span(w).first(1), {}, fit_rng), ConfigError);
    CHECK_THROWS_AS(fit_elastic_net_sgd(samples, std::span(w).first(3), {}, fit_rng), ConfigError);
}

TEST_CASE("weighted metrics")
{
    const std::vector<double> y{1, 2, 3}, w{1, 1, 2};
    CHECK(weighted_r2(y, y, w) == 1.0);
    const std::vector<double> flat{2.25, 2.25, 2.25}; // weighted mean
    CHECK(weighted_r2(y, flat, w) == doctest::Approx(0.0));
    CHECK(weighted_mae(y, flat, w) == doctest::Approx((1.25 + 0.25 + 2 * 0.75) / 4));
}

TEST_CASE("leave-one-out on interpolable data")
{
    std::vector<SurveySample> samples{sample({1, 0, 0, 0}, 80), sample({3, 1, 0, 0}, 76), sample({5, 2, 0, 0}, 72)};
    const std::vector<double> w(3, 1.0);
    ElasticNetHyper h;
    h.alpha = 0.0;
    h.epochs = 2000;
    const std::vector<ElasticNetHyper> grid{h};
    const auto report = loo_cross_validate(samples, w, grid, 1);
    CHECK(report.r2_test == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(report.mae < 0.05);
    CHECK(report.fold_models.size() == 3);
    CHECK(report.best_index == 0);
}

TEST_CASE("simulated survey end to end")
{
    // answers drawn from a known interpretability model
    Rng rng(2024);
    LinearModel truth;
    truth.intercept = 80.0;
    truth.slopes = {-0.3, -0.6, -3.0, -5.0};
    std::uniform_int_distribution<int> l(1, 20), o(0, 8), nao(0, 4), naoc(0, 3), count(150, 300);
    std::vector<SurveyAnswer> answers;
    for (int s = 0; s < 80; ++s) {
        const FeatureVector fv{l(rng), o(rng), nao(rng), naoc(rng)};
        const double p = std::clamp(truth.predict(fv) / 100.0, 0.02, 0.98);
        // correctness and normalized confidence both have mean sqrt(p)
        std::bernoulli_distribution correct(std::sqrt(p));
        std::binomial_distribution<int> conf(3, std::sqrt(p));
        const int k = count(rng);
        for (int a = 0; a < k; ++a) answers.push_back({fv, correct(rng), 1 + conf(rng)});
    }
    const auto samples = build_regression_dataset(answers);
    REQUIRE(samples.size() >= 70);
    const auto w = bin_weights(labels_of(samples));
    const auto report = loo_cross_validate(samples, w, default_grid(), 3, 4);
    CHECK(report.r2_test > 0.5);
    for (double s : report.averaged.slopes) CHECK(s < 0.0);
    for (double sl : report.averaged.slopes) CHECK(std::abs(report.averaged.slopes[3]) >= std::abs(sl));

    // worker count does not change anything
    const auto serial = loo_cross_validate(samples, w, default_grid(), 3, 1);
    CHECK(serial.r2_test == report.r2_test);
    CHECK(serial.averaged.slopes == report.averaged.slopes);
}

TEST_CASE("survey files")
{
    const auto dir = std::filesystem::temp_directory_path() / "nsgp_survey_test";
    std::filesystem::create_directories(dir);
    const auto answers = (dir / "answers.csv").string();
    {
        std::ofstream f(answers);
        f << "l,n_o,n_nao,n_naoc,correct,confidence\n";
        for (int i = 0; i < 12; ++i) f << "5,2,0,0," << (i < 9 ? 1 : 0) << ",4\n";
        for (int i = 0; i < 3; ++i) f << "2,1,1,0,1,2\n";
    }
    const auto merged = load_survey(answers);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].label == doctest::Approx(75.0));

    const auto samples = (dir / "samples.csv").string();
    {
        std::ofstream f(samples);
        f << "l,n_o,n_nao,n_naoc,n_answers,label\n3,1,0,0,20,61.5\n9,4,2,1,35,22.25\n";
    }
    const auto s = load_survey(samples);
    REQUIRE(s.size() == 2);
    CHECK(s[1].features == FeatureVector{9, 4, 2, 1});
    CHECK(s[1].label == 22.25);

    const auto bad = (dir / "bad.csv").string();
    {
        std::ofstream f(bad);
        f << "l,n_o,n_nao,n_naoc,correct,confidence\n5,2,0,0,maybe,4\n";
    }
    CHECK_THROWS_AS(load_survey(bad), DataError);
    {
        std::ofstream f(bad);
    }
    CHECK_THROWS_AS(load_survey(bad), DataError);
    std::filesystem::remove_all(dir);
}
