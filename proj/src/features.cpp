#include "nsgp/features.hpp"

#include <fstream>
#include <vector>

#include <json.hpp>

#include "nsgp/error.hpp"

namespace nsgp {

int count_nonarithmetic_compositions(const Tree& tree)
{
    // For each open ancestor: remaining children and whether it is
    // non-arithmetic. Every non-arithmetic node pairs with each open
    // non-arithmetic ancestor.
    struct Open {
        int pending;
        bool non_arith;
    };
    std::vector<Open> open;
    int active = 0;
    int pairs = 0;
    for (const Node& n : tree.nodes()) {
        if (!open.empty()) {
            --open.back().pending;
        }
        const bool na = is_non_arithmetic(n.op);
        if (na) {
            pairs += active;
        }
        if (is_operator(n.op)) {
            open.push_back({arity(n.op), na});
            active += na ? 1 : 0;
        }
        while (!open.empty() && open.back().pending == 0) {
            active -= open.back().non_arith ? 1 : 0;
            open.pop_back();
        }
    }
    return pairs;
}

FeatureVector extract_features(const Tree& tree)
{
    FeatureVector fv;
    fv.l = static_cast<int>(tree.size());
    for (const Node& n : tree.nodes()) {
        if (is_operator(n.op)) {
            ++fv.n_o;
        }
        if (is_non_arithmetic(n.op)) {
            ++fv.n_nao;
        }
    }
    fv.n_naoc = count_nonarithmetic_compositions(tree);
    return fv;
}

namespace {

double weighted_sum(const FeatureVector& fv, const PhiCoefficients& c) noexcept
{
    return c.w_l * fv.l + c.w_no * fv.n_o + c.w_nao * fv.n_nao + c.w_naoc * fv.n_naoc;
}

} // namespace

double phi_estimate(const FeatureVector& fv, const PhiCoefficients& c) noexcept { return c.intercept + weighted_sum(fv, c); }

double phi_objective(const FeatureVector& fv, const PhiCoefficients& c) noexcept { return -weighted_sum(fv, c); }

PhiCoefficients load_phi_coefficients(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open coefficients file '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed coefficients file '" + path + "': " + e.what());
    }
    PhiCoefficients c;
    try {
        c.intercept = j.at("intercept").get<double>();
        c.w_l = j.at("w_l").get<double>();
        c.w_no = j.at("w_no").get<double>();
        c.w_nao = j.at("w_nao").get<double>();
        c.w_naoc = j.at("w_naoc").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("coefficients file '" + path + "': " + e.what());
    }
    if (c.w_l > 0 || c.w_no > 0 || c.w_nao > 0 || c.w_naoc > 0) {
        throw ConfigError("coefficients file '" + path + "': slopes must be non-positive");
    }
    return c;
}

} // namespace nsgp
