#pragma once

#include <compare>
#include <string>

#include "nsgp/expr.hpp"

namespace nsgp {

// Structural features of a formula that drive the interpretability model.
struct FeatureVector {
    int l = 0;       // node count
    int n_o = 0;     // operator nodes
    int n_nao = 0;   // non-arithmetic operator nodes
    int n_naoc = 0;  // compositions of non-arithmetic operators

    friend auto operator<=>(const FeatureVector&, const FeatureVector&) = default;
};

// Linear model of interpretability (percent). Defaults are the published fit.
struct PhiCoefficients {
    double intercept = 79.1;
    double w_l = -0.2;
    double w_no = -0.5;
    double w_nao = -3.4;
    double w_naoc = -4.5;

    friend bool operator==(const PhiCoefficients&, const PhiCoefficients&) = default;
};

// Number of (ancestor, descendant) pairs where both are non-arithmetic
// operators. A chain of k nested non-arithmetic operators contributes
// k(k-1)/2.
int count_nonarithmetic_compositions(const Tree& tree);

FeatureVector extract_features(const Tree& tree);

double phi_estimate(const FeatureVector& fv, const PhiCoefficients& c = {}) noexcept;

// Negated model without the intercept; minimized during evolution.
double phi_objective(const FeatureVector& fv, const PhiCoefficients& c = {}) noexcept;

// Reads {intercept, w_l, w_no, w_nao, w_naoc} from a JSON file. Throws
// ConfigError if any slope is positive.
PhiCoefficients load_phi_coefficients(const std::string& path);

} // namespace nsgp
