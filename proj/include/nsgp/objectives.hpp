#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "nsgp/data.hpp"
#include "nsgp/expr.hpp"
#include "nsgp/features.hpp"

namespace nsgp {

// Affine map y ~ a + b * yhat.
struct ScalingCoeffs {
    double a = 0.0;
    double b = 1.0;

    friend bool operator==(const ScalingCoeffs&, const ScalingCoeffs&) = default;
};

struct ObjectiveVector {
    double err = 0.0;    // 100 * scaled MSE / var(y_train)
    double interp = 0.0; // phi objective or node count

    friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

enum class InterpMode { Phi, Size };

std::string_view to_string(InterpMode mode) noexcept;
InterpMode parse_interp_mode(std::string_view text);

// Error assigned to individuals whose predictions are not all finite.
inline constexpr double kErrorSentinel = 1e12;

// Least-squares a, b. When yhat is constant, b = 0 and a = mean(y).
ScalingCoeffs linear_scaling_coeffs(std::span<const double> y, std::span<const double> yhat);

// (1/N) sum (y_i - a - b yhat_i)^2 with the given coefficients.
double scaled_mse(std::span<const double> y, std::span<const double> yhat, const ScalingCoeffs& coeffs);

// 100 * mse / var_y_train. Throws ConfigError if var_y_train <= 0.
double normalize_err(double mse, double var_y_train);

struct Evaluation {
    ObjectiveVector obj;
    ScalingCoeffs scaling; // fit on the training split, reused for val/test
};

struct ObjectiveContext {
    InterpMode mode = InterpMode::Phi;
    PhiCoefficients phi;
    EpsilonConfig eps;
};

double interpretability_objective(const Tree& tree, const ObjectiveContext& ctx);

Evaluation evaluate_individual(const Tree& tree, const Dataset& train, const ObjectiveContext& ctx);

// Scaled MSE / var_y_train (no x100) of the tree on `data` using fixed
// training coefficients. Non-finite results map to kErrorSentinel.
double nmse_with(const Tree& tree, const Dataset& data, const ScalingCoeffs& scaling, double var_y_train, EpsilonConfig eps = {});

} // namespace nsgp
