#include "nsgp/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

#include "nsgp/csv.hpp"
#include "nsgp/error.hpp"

namespace nsgp {

FrontRecord validation_front(std::span<const Individual> population, const EvaluationSplits& splits, const ObjectiveContext& ctx)
{
    if (population.empty()) {
        throw ConfigError("cannot build a front from an empty population");
    }
    const double var_train = variance(splits.train.y);

    struct Candidate {
        double err_val;
        double interp;
        std::string text;
        std::size_t index;
    };
    std::vector<Candidate> cands;
    cands.reserve(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto& ind = population[i];
        cands.push_back({nmse_with(ind.tree, splits.val, ind.scaling, var_train, ctx.eps), interpretability_objective(ind.tree, ctx), to_infix(ind.tree), i});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.err_val, a.interp, a.text) < std::tie(b.err_val, b.interp, b.text);
    });

    // Sweep in ascending err_val: a point is non-dominated iff its interp is
    // strictly below every interp seen so far. Exact duplicates fail the
    // strict test and collapse onto the first one.
    FrontRecord front;
    double best_interp = std::numeric_limits<double>::infinity();
    for (auto& c : cands) {
        if (!(c.interp < best_interp)) continue;
        best_interp = c.interp;
        const auto& ind = population[c.index];
        FrontMember m;
        m.tree = std::move(c.text);
        m.features = extract_features(ind.tree);
        m.phi_objective = phi_objective(m.features, ctx.phi);
        m.err_train = nmse_with(ind.tree, splits.train, ind.scaling, var_train, ctx.eps);
        m.err_val = c.err_val;
        m.err_test = nmse_with(ind.tree, splits.test, ind.scaling, var_train, ctx.eps);
        m.interp = c.interp;
        front.members.push_back(std::move(m));
    }
    return front;
}

std::size_t tau_index(std::size_t front_size, int tau)
{
    if (front_size == 0) {
        throw ConfigError("cannot select from an empty front");
    }
    if (tau < 1 || tau > 100) {
        throw ConfigError("tau must be in 1..100, got " + std::to_string(tau));
    }
    // ceil(tau * n / 100) in integers
    const std::size_t pos = (static_cast<std::size_t>(tau) * front_size + 99) / 100;
    const std::size_t idx = pos == 0 ? 0 : pos - 1;
    return std::min(idx, front_size - 1);
}

const FrontMember& select_tau(const FrontRecord& front, int tau) { return front.members[tau_index(front.members.size(), tau)]; }

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

namespace {

struct SignedRanks {
    std::vector<std::uint64_t> doubled; // 2 * average rank, always an integer
    std::uint64_t positive_sum = 0;     // doubled rank sum of positive differences
    std::vector<std::size_t> tie_sizes;
};

SignedRanks rank_differences(std::span<const double> x, std::span<const double> y)
{
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - y[i];
        if (diff != 0.0) d.push_back(diff);
    }
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });

    SignedRanks out;
    out.doubled.resize(d.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t j = k;
        while (j < order.size() && std::abs(d[order[j]]) == std::abs(d[order[k]])) ++j;
        // ranks k+1 .. j share (k+1+j)/2; doubled: k+1+j
        const std::uint64_t r2 = k + 1 + j;
        for (std::size_t t = k; t < j; ++t) out.doubled[order[t]] = r2;
        if (j - k > 1) out.tie_sizes.push_back(j - k);
        k = j;
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > 0) out.positive_sum += out.doubled[i];
    }
    return out;
}

double exact_p(const SignedRanks& r)
{
    const std::size_t n = r.doubled.size();
    const std::uint64_t total = std::accumulate(r.doubled.begin(), r.doubled.end(), std::uint64_t{0});
    // counts[s]: number of sign assignments with doubled positive rank sum s
    std::vector<std::uint64_t> counts(total + 1, 0);
    counts[0] = 1;
    std::uint64_t reach = 0;
    for (std::uint64_t w : r.doubled) {
        for (std::uint64_t s = reach + 1; s-- > 0;) {
            if (counts[s] != 0) counts[s + w] += counts[s];
        }
        reach += w;
    }
    std::uint64_t le = 0;
    std::uint64_t ge = 0;
    for (std::uint64_t s = 0; s <= total; ++s) {
        if (s <= r.positive_sum) le += counts[s];
        if (s >= r.positive_sum) ge += counts[s];
    }
    const double p = 2.0 * static_cast<double>(std::min(le, ge)) / std::ldexp(1.0, static_cast<int>(n));
    return std::min(1.0, p);
}

double normal_p(const SignedRanks& r)
{
    const double n = static_cast<double>(r.doubled.size());
    const double w = static_cast<double>(r.positive_sum) / 2.0;
    const double mu = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    for (std::size_t t : r.tie_sizes) {
        const double tt = static_cast<double>(t);
        var -= (tt * tt * tt - tt) / 48.0;
    }
    if (!(var > 0.0)) return 1.0;
    const double z = (w - mu) / std::sqrt(var);
    return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

} // namespace

double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw ConfigError("wilcoxon_signed_rank needs paired samples of equal length");
    }
    const SignedRanks r = rank_differences(x, y);
    if (r.doubled.empty()) {
        return 1.0;
    }
    return r.doubled.size() <= kWilcoxonExactMax ? exact_p(r) : normal_p(r);
}

std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha)
{
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<bool> reject(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        if (p_values[order[i]] > alpha / static_cast<double>(m - i)) break;
        reject[order[i]] = true;
    }
    return reject;
}

double median(std::vector<double> v)
{
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// front files

void write_front_csv(const FrontRecord& front, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    out << "tree,l,n_o,n_nao,n_naoc,phi_objective,err_train,err_val,err_test\n";
    for (const auto& m : front.members) {
        out << csv::escape(m.tree) << ',' << m.features.l << ',' << m.features.n_o << ',' << m.features.n_nao << ',' << m.features.n_naoc << ','
            << csv::format_double(m.phi_objective) << ',' << csv::format_double(m.err_train) << ',' << csv::format_double(m.err_val) << ','
            << csv::format_double(m.err_test) << '\n';
    }
}

namespace {

template <typename T>
T parse_field(const std::string& s, const std::string& path, std::size_t row)
{
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError("'" + path + "' row " + std::to_string(row) + ": bad value '" + s + "'");
    }
    return v;
}

} // namespace

FrontRecord read_front_csv(const std::string& path, InterpMode mode)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::string line;
    std::getline(in, line);
    if (csv::split_record(line) != std::vector<std::string>{"tree", "l", "n_o", "n_nao", "n_naoc", "phi_objective", "err_train", "err_val", "err_test"}) {
        throw DataError("'" + path + "' is not a front file");
    }
    FrontRecord front;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto f = csv::split_record(line);
        if (f.size() != 9) {
            throw DataError("'" + path + "' row " + std::to_string(row) + ": expected 9 fields");
        }
        FrontMember m;
        m.tree = f[0];
        m.features.l = parse_field<int>(f[1], path, row);
        m.features.n_o = parse_field<int>(f[2], path, row);
        m.features.n_nao = parse_field<int>(f[3], path, row);
        m.features.n_naoc = parse_field<int>(f[4], path, row);
        m.phi_objective = parse_field<double>(f[5], path, row);
        m.err_train = parse_field<double>(f[6], path, row);
        m.err_val = parse_field<double>(f[7], path, row);
        m.err_test = parse_field<double>(f[8], path, row);
        m.interp = mode == InterpMode::Phi ? m.phi_objective : static_cast<double>(m.features.l);
        front.members.push_back(std::move(m));
    }
    return front;
}

} // namespace nsgp
