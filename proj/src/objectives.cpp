#include "nsgp/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "nsgp/error.hpp"

namespace nsgp {

std::string_view to_string(InterpMode mode) noexcept { return mode == InterpMode::Phi ? "phi" : "size"; }

InterpMode parse_interp_mode(std::string_view text)
{
    if (text == "phi") return InterpMode::Phi;
    if (text == "size") return InterpMode::Size;
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected phi or size)");
}

ScalingCoeffs linear_scaling_coeffs(std::span<const double> y, std::span<const double> yhat)
{
    const double my = mean(y);
    if (yhat.empty()) {
        return {my, 0.0};
    }
    auto [lo, hi] = std::minmax_element(yhat.begin(), yhat.end());
    if (*lo == *hi) {
        return {my, 0.0};
    }
    const double mh = mean(yhat);
    double cov = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dh = yhat[i] - mh;
        cov += (y[i] - my) * dh;
        var += dh * dh;
    }
    if (var == 0.0) {
        return {my, 0.0};
    }
    const double b = cov / var;
    return {my - b * mh, b};
}

double scaled_mse(std::span<const double> y, std::span<const double> yhat, const ScalingCoeffs& c)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - c.a - c.b * yhat[i];
        acc += r * r;
    }
    return acc / static_cast<double>(y.size());
}

double normalize_err(double mse, double var_y_train)
{
    if (!(var_y_train > 0.0)) {
        throw ConfigError("training target variance must be positive");
    }
    return 100.0 * mse / var_y_train;
}

double interpretability_objective(const Tree& tree, const ObjectiveContext& ctx)
{
    if (ctx.mode == InterpMode::Size) {
        return static_cast<double>(tree.size());
    }
    return phi_objective(extract_features(tree), ctx.phi);
}

namespace {

bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

Evaluation evaluate_individual(const Tree& tree, const Dataset& train, const ObjectiveContext& ctx)
{
    Evaluation ev;
    ev.obj.interp = interpretability_objective(tree, ctx);
    const auto yhat = eval_tree(tree, train.X, ctx.eps);
    if (!all_finite(yhat)) {
        ev.obj.err = kErrorSentinel;
        ev.scaling = {mean(train.y), 0.0};
        return ev;
    }
    ev.scaling = linear_scaling_coeffs(train.y, yhat);
    const double err = normalize_err(scaled_mse(train.y, yhat, ev.scaling), variance(train.y));
    if (!std::isfinite(err) || !std::isfinite(ev.scaling.a) || !std::isfinite(ev.scaling.b)) {
        ev.obj.err = kErrorSentinel;
        ev.scaling = {mean(train.y), 0.0};
        return ev;
    }
    ev.obj.err = std::min(err, kErrorSentinel);
    return ev;
}

double nmse_with(const Tree& tree, const Dataset& data, const ScalingCoeffs& scaling, double var_y_train, EpsilonConfig eps)
{
    if (!(var_y_train > 0.0)) {
        throw ConfigError("training target variance must be positive");
    }
    const auto yhat = eval_tree(tree, data.X, eps);
    if (!all_finite(yhat)) {
        return kErrorSentinel;
    }
    const double v = scaled_mse(data.y, yhat, scaling) / var_y_train;
    return std::isfinite(v) ? std::min(v, kErrorSentinel) : kErrorSentinel;
}

} // namespace nsgp
