#include "nsgp/phi_trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "nsgp/csv.hpp"
#include "nsgp/error.hpp"
#include "nsgp/parallel.hpp"

namespace nsgp {

std::vector<SurveySample> build_regression_dataset(std::span<const SurveyAnswer> answers)
{
    struct Tally {
        std::size_t n = 0;
        std::size_t correct = 0;
        int conf_sum = 0; // sum of (confidence - 1)
    };
    std::map<FeatureVector, Tally> groups;
    for (const auto& a : answers) {
        if (a.confidence < 1 || a.confidence > 4) {
            throw DataError("confidence must be in 1..4, got " + std::to_string(a.confidence));
        }
        auto& t = groups[a.features];
        ++t.n;
        t.correct += a.correct ? 1 : 0;
        t.conf_sum += a.confidence - 1;
    }
    std::vector<SurveySample> out;
    for (const auto& [fv, t] : groups) {
        if (t.n < kMinAnswersPerSample) continue;
        SurveySample s;
        s.features = fv;
        s.n_answers = t.n;
        s.correctness_ratio = static_cast<double>(t.correct) / static_cast<double>(t.n);
        s.mean_conf_norm = static_cast<double>(t.conf_sum) / (3.0 * static_cast<double>(t.n));
        s.label = 100.0 * s.correctness_ratio * s.mean_conf_norm;
        out.push_back(s);
    }
    return out;
}

std::vector<double> bin_weights(std::span<const double> labels, std::size_t bins)
{
    if (bins == 0) {
        throw ConfigError("bin count must be positive");
    }
    auto bin_of = [bins](double label) {
        const double width = 100.0 / static_cast<double>(bins);
        auto b = static_cast<std::size_t>(std::max(0.0, label) / width);
        return std::min(b, bins - 1); // 100 falls in the last bin
    };
    std::vector<std::size_t> counts(bins, 0);
    for (double l : labels) ++counts[bin_of(l)];
    const auto used = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
    const auto total = static_cast<double>(labels.size());
    std::vector<double> w;
    w.reserve(labels.size());
    for (double l : labels) w.push_back(total / (used * static_cast<double>(counts[bin_of(l)])));
    return w;
}

double LinearModel::predict(const FeatureVector& fv) const noexcept
{
    return intercept + slopes[0] * fv.l + slopes[1] * fv.n_o + slopes[2] * fv.n_nao + slopes[3] * fv.n_naoc;
}

PhiCoefficients LinearModel::to_phi() const noexcept { return {intercept, slopes[0], slopes[1], slopes[2], slopes[3]}; }

// ---------------------------------------------------------------------------
// elastic net by SGD

namespace {

std::array<double, 4> as_array(const FeatureVector& fv) noexcept
{
    return {static_cast<double>(fv.l), static_cast<double>(fv.n_o), static_cast<double>(fv.n_nao), static_cast<double>(fv.n_naoc)};
}

} // namespace

LinearModel fit_elastic_net_sgd(std::span<const SurveySample> samples, std::span<const double> weights, const ElasticNetHyper& hyper, Rng& rng)
{
    const std::size_t n = samples.size();
    if (n < 2) {
        throw ConfigError("elastic net needs at least 2 samples");
    }
    if (weights.size() != n) {
        throw ConfigError("one weight per sample required");
    }
    if (hyper.alpha < 0.0 || hyper.l1_ratio < 0.0 || hyper.l1_ratio > 1.0) {
        throw ConfigError("alpha must be >= 0 and l1_ratio in [0, 1]");
    }
    constexpr std::size_t d = 4;

    // The optimization runs on weighted-standardized features; the penalty is
    // rescaled per coordinate so the minimizer is the raw-count one.
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> omega(n);
    for (std::size_t i = 0; i < n; ++i) omega[i] = weights[i] * static_cast<double>(n) / wsum;

    std::array<double, d> mu{};
    std::array<double, d> sd{};
    std::vector<std::array<double, d>> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = as_array(samples[i].features);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) mu[j] += omega[i] * raw[i][j];
        mu[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) sd[j] += omega[i] * (raw[i][j] - mu[j]) * (raw[i][j] - mu[j]);
        sd[j] = std::sqrt(sd[j] / static_cast<double>(n));
    }
    std::vector<std::array<double, d>> z(n);
    double max_step_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            z[i][j] = sd[j] > 0.0 ? (raw[i][j] - mu[j]) / sd[j] : 0.0;
            norm += z[i][j] * z[i][j];
        }
        max_step_norm = std::max(max_step_norm, omega[i] * norm);
    }

    const double l1 = hyper.alpha * hyper.l1_ratio;
    const double l2 = hyper.alpha * (1.0 - hyper.l1_ratio);
    std::array<double, d> l1_coord{};
    std::array<double, d> l2_coord{};
    for (std::size_t j = 0; j < d; ++j) {
        l1_coord[j] = sd[j] > 0.0 ? l1 / sd[j] : 0.0;
        l2_coord[j] = sd[j] > 0.0 ? l2 / (sd[j] * sd[j]) : 0.0;
    }

    double b0 = 0.0;
    std::array<double, d> v{};
    double avg_b0 = 0.0;
    std::array<double, d> avg_v{};
    std::size_t averaged = 0;

    const double base_eta = hyper.eta0 / max_step_norm;
    const std::size_t average_from = hyper.epochs / 2;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    auto objective = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double pred = b0;
            for (std::size_t j = 0; j < d; ++j) pred += v[j] * z[i][j];
            loss += omega[i] * (pred - samples[i].label) * (pred - samples[i].label);
        }
        loss /= 2.0 * static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) loss += l1_coord[j] * std::abs(v[j]) + 0.5 * l2_coord[j] * v[j] * v[j];
        return loss;
    };

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        const double eta = base_eta / std::pow(1.0 + static_cast<double>(epoch), hyper.power_t);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            double pred = b0;
            for (std::size_t j = 0; j < d; ++j) pred += v[j] * z[i][j];
            const double g = omega[i] * (pred - samples[i].label);
            b0 -= eta * g;
            for (std::size_t j = 0; j < d; ++j) {
                if (sd[j] == 0.0) continue;
                // prox of the elastic net penalty: soft threshold, then L2 shrink
                double vj = v[j] - eta * g * z[i][j];
                const double shrink = eta * l1_coord[j];
                vj = vj > shrink ? vj - shrink : (vj < -shrink ? vj + shrink : 0.0);
                v[j] = vj / (1.0 + eta * l2_coord[j]);
            }
            if (epoch >= average_from) {
                ++averaged;
                const double k = 1.0 / static_cast<double>(averaged);
                avg_b0 += (b0 - avg_b0) * k;
                for (std::size_t j = 0; j < d; ++j) avg_v[j] += (v[j] - avg_v[j]) * k;
            }
        }
        if (!std::isfinite(objective())) {
            throw DivergenceError("elastic net SGD diverged at epoch " + std::to_string(epoch) + " with learning rate eta0=" + std::to_string(hyper.eta0));
        }
    }
    if (averaged > 0) {
        b0 = avg_b0;
        v = avg_v;
    }

    LinearModel model;
    model.intercept = b0;
    for (std::size_t j = 0; j < d; ++j) {
        model.slopes[j] = sd[j] > 0.0 ? v[j] / sd[j] : 0.0;
        model.intercept -= model.slopes[j] * mu[j];
    }
    return model;
}

double weighted_r2(std::span<const double> y, std::span<const double> pred, std::span<const double> w)
{
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    double ybar = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ybar += w[i] * y[i];
    ybar /= wsum;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += w[i] * (y[i] - pred[i]) * (y[i] - pred[i]);
        ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    if (ss_tot == 0.0) {
        return ss_res == 0.0 ? 1.0 : 0.0;
    }
    return 1.0 - ss_res / ss_tot;
}

double weighted_mae(std::span<const double> y, std::span<const double> pred, std::span<const double> w)
{
    double acc = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        acc += w[i] * std::abs(y[i] - pred[i]);
        wsum += w[i];
    }
    return acc / wsum;
}

std::vector<ElasticNetHyper> default_grid()
{
    std::vector<ElasticNetHyper> grid;
    for (double alpha : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        for (double ratio : {0.1, 0.5, 0.9}) {
            ElasticNetHyper h;
            h.alpha = alpha;
            h.l1_ratio = ratio;
            grid.push_back(h);
        }
    }
    return grid;
}

CrossValidationReport loo_cross_validate(std::span<const SurveySample> samples, std::span<const double> weights, std::span<const ElasticNetHyper> grid,
                                         std::uint64_t seed, std::size_t workers)
{
    const std::size_t n = samples.size();
    if (n < 3) {
        throw ConfigError("leave-one-out needs at least 3 samples");
    }
    if (weights.size() != n) {
        throw ConfigError("one weight per sample required");
    }
    if (grid.empty()) {
        throw ConfigError("empty hyper-parameter grid");
    }

    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = samples[i].label;

    struct FoldResult {
        LinearModel model;
        double held_out_pred = 0.0;
        double train_r2 = 0.0;
    };
    std::vector<FoldResult> results(grid.size() * n);

    parallel_for(results.size(), workers, [&](std::size_t task) {
        const std::size_t g = task / n;
        const std::size_t fold = task % n;
        std::vector<SurveySample> train;
        std::vector<double> train_w;
        train.reserve(n - 1);
        train_w.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == fold) continue;
            train.push_back(samples[i]);
            train_w.push_back(weights[i]);
        }
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(fold)};
        Rng rng(seq);
        FoldResult r;
        r.model = fit_elastic_net_sgd(train, train_w, grid[g], rng);
        r.held_out_pred = r.model.predict(samples[fold].features);
        std::vector<double> y(train.size());
        std::vector<double> p(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) {
            y[i] = train[i].label;
            p[i] = r.model.predict(train[i].features);
        }
        r.train_r2 = weighted_r2(y, p, train_w);
        results[task] = r;
    });

    CrossValidationReport report;
    report.grid_r2_test.resize(grid.size());
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> pred(n);
        for (std::size_t i = 0; i < n; ++i) pred[i] = results[g * n + i].held_out_pred;
        const double score = weighted_r2(labels, pred, weights);
        report.grid_r2_test[g] = score;
        if (score > best_score) {
            best_score = score;
            report.best_index = g;
        }
    }

    const std::size_t g = report.best_index;
    report.best = grid[g];
    std::vector<double> pred(n);
    double r2_train = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = results[g * n + i];
        pred[i] = r.held_out_pred;
        r2_train += r.train_r2;
        report.fold_models.push_back(r.model);
        report.averaged.intercept += r.model.intercept / static_cast<double>(n);
        for (std::size_t j = 0; j < 4; ++j) report.averaged.slopes[j] += r.model.slopes[j] / static_cast<double>(n);
    }
    report.r2_train = r2_train / static_cast<double>(n);
    report.r2_test = best_score;
    report.mae = weighted_mae(labels, pred, weights);
    return report;
}

// ---------------------------------------------------------------------------
// survey files

namespace {

std::vector<std::vector<std::string>> read_table(const std::string& path, const std::vector<std::string>& header)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("'" + path + "' is empty");
    }
    if (csv::split_record(line) != header) {
        throw DataError("'" + path + "' has an unexpected header");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto f = csv::split_record(line);
        if (f.size() != header.size()) {
            throw DataError("'" + path + "' row " + std::to_string(rows.size() + 2) + ": expected " + std::to_string(header.size()) + " fields");
        }
        rows.push_back(std::move(f));
    }
    if (rows.empty()) {
        throw DataError("'" + path + "' has no data rows");
    }
    return rows;
}

template <typename T>
T number(const std::string& s, const std::string& path, std::size_t row)
{
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError("'" + path + "' row " + std::to_string(row) + ": bad value '" + s + "'");
    }
    return v;
}

FeatureVector features_of(const std::vector<std::string>& f, const std::string& path, std::size_t row)
{
    return {number<int>(f[0], path, row), number<int>(f[1], path, row), number<int>(f[2], path, row), number<int>(f[3], path, row)};
}

const std::vector<std::string> kAnswerHeader{"l", "n_o", "n_nao", "n_naoc", "correct", "confidence"};
const std::vector<std::string> kSampleHeader{"l", "n_o", "n_nao", "n_naoc", "n_answers", "label"};

} // namespace

std::vector<SurveyAnswer> read_survey_answers(const std::string& path)
{
    auto rows = read_table(path, kAnswerHeader);
    std::vector<SurveyAnswer> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& f = rows[r];
        SurveyAnswer a;
        a.features = features_of(f, path, r + 2);
        if (f[4] == "1" || f[4] == "true" || f[4] == "True") a.correct = true;
        else if (f[4] == "0" || f[4] == "false" || f[4] == "False") a.correct = false;
        else throw DataError("'" + path + "' row " + std::to_string(r + 2) + ": bad correctness flag '" + f[4] + "'");
        a.confidence = number<int>(f[5], path, r + 2);
        if (a.confidence < 1 || a.confidence > 4) {
            throw DataError("'" + path + "' row " + std::to_string(r + 2) + ": confidence must be in 1..4");
        }
        out.push_back(a);
    }
    return out;
}

std::vector<SurveySample> read_survey_samples(const std::string& path)
{
    auto rows = read_table(path, kSampleHeader);
    std::vector<SurveySample> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& f = rows[r];
        SurveySample s;
        s.features = features_of(f, path, r + 2);
        s.n_answers = number<std::size_t>(f[4], path, r + 2);
        s.label = number<double>(f[5], path, r + 2);
        if (!(s.label >= 0.0 && s.label <= 100.0)) {
            throw DataError("'" + path + "' row " + std::to_string(r + 2) + ": label must be a percentage in [0, 100]");
        }
        out.push_back(s);
    }
    return out;
}

std::vector<SurveySample> load_survey(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::string line;
    std::getline(in, line);
    auto header = csv::split_record(line);
    if (header == kAnswerHeader) {
        auto answers = read_survey_answers(path);
        return build_regression_dataset(answers);
    }
    if (header == kSampleHeader) {
        return read_survey_samples(path);
    }
    throw DataError("'" + path + "' is neither a survey answer file nor a merged sample file");
}

} // namespace nsgp
