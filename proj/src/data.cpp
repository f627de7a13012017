#include "nsgp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "nsgp/csv.hpp"
#include "nsgp/error.hpp"

namespace nsgp {

Dataset Dataset::subset(std::span<const std::size_t> idx) const
{
    Dataset out;
    out.name = name;
    out.feature_names = feature_names;
    out.target_name = target_name;
    out.X = X.select_rows(idx);
    out.y.reserve(idx.size());
    for (std::size_t i : idx) {
        out.y.push_back(y[i]);
    }
    return out;
}

double mean(std::span<const double> v) noexcept
{
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) noexcept
{
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// CSV

Dataset load_csv(const std::string& path, std::string name)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("'" + path + "' is empty");
    }
    auto header = csv::split_record(line);
    if (header.size() < 2) {
        throw DataError("'" + path + "' needs at least one feature column and a target column");
    }
    const std::size_t cols = header.size();

    std::vector<std::vector<double>> columns(cols);
    std::size_t row = 1; // header is row 1
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto fields = csv::split_record(line);
        if (fields.size() != cols) {
            throw DataError("'" + path + "' row " + std::to_string(row) + ": expected " + std::to_string(cols) + " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            std::string_view f = fields[c];
            while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
            while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
            double v = 0.0;
            auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
                throw DataError("'" + path + "' row " + std::to_string(row) + ", column " + std::to_string(c + 1) + ": non-numeric value '" + std::string(f) + "'");
            }
            columns[c].push_back(v);
        }
    }

    Dataset data;
    if (name.empty()) {
        auto slash = path.find_last_of('/');
        name = path.substr(slash == std::string::npos ? 0 : slash + 1);
        if (auto dot = name.rfind('.'); dot != std::string::npos) name.resize(dot);
    }
    data.name = std::move(name);
    data.feature_names.assign(header.begin(), header.end() - 1);
    data.target_name = header.back();
    const std::size_t n = columns.front().size();
    if (n == 0) {
        throw DataError("'" + path + "' has no data rows");
    }
    data.X = Matrix(n, cols - 1);
    for (std::size_t c = 0; c + 1 < cols; ++c) {
        std::copy(columns[c].begin(), columns[c].end(), data.X.col(c).begin());
    }
    data.y = std::move(columns.back());
    if (variance(data.y) <= 0.0) {
        throw DataError("'" + path + "': target column is constant");
    }
    return data;
}

void write_csv(const Dataset& data, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    for (std::size_t c = 0; c < data.dims(); ++c) {
        out << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c)) << ',';
    }
    out << data.target_name << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.dims(); ++c) {
            out << csv::format_double(data.X(r, c)) << ',';
        }
        out << csv::format_double(data.y[r]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// preprocessing

StandardizedDataset standardize(const Dataset& data, std::span<const std::size_t> train_rows)
{
    StandardizedDataset out{data, {}};
    const std::size_t d = data.dims();
    out.transform.mean.resize(d);
    out.transform.sd.resize(d);
    const double n = static_cast<double>(train_rows.size());
    for (std::size_t c = 0; c < d; ++c) {
        auto col = data.X.col(c);
        double m = 0.0;
        for (std::size_t i : train_rows) m += col[i];
        m /= n;
        double ss = 0.0;
        for (std::size_t i : train_rows) ss += (col[i] - m) * (col[i] - m);
        const double sd = std::sqrt(ss / n);
        out.transform.mean[c] = m;
        out.transform.sd[c] = sd;
        for (double& v : out.data.X.col(c)) {
            v -= m;
            if (sd > 0.0) v /= sd;
        }
    }
    return out;
}

SplitIndices split(std::size_t n, std::uint64_t seed)
{
    if (n < kMinRows) {
        throw DataError("dataset needs at least " + std::to_string(kMinRows) + " rows to split, got " + std::to_string(n));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_train = n * 8 / 10;
    const std::size_t n_val = n / 10;
    SplitIndices s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    return s;
}

// ---------------------------------------------------------------------------
// synthetic benchmarks

namespace {

constexpr std::string_view kSynthetic[] = {"nguyen7", "keijzer6", "pagie1", "vladislavleva4", "korns12"};

Dataset make_dataset(std::string_view name, std::size_t n, std::size_t d)
{
    Dataset data;
    data.name = std::string(name);
    for (std::size_t c = 0; c < d; ++c) data.feature_names.push_back("x" + std::to_string(c));
    data.X = Matrix(n, d);
    data.y.resize(n);
    return data;
}

void fill_uniform(Matrix& X, double lo, double hi, Rng& rng)
{
    std::uniform_real_distribution<double> u(lo, hi);
    // Row-major draw order so a row's inputs are consecutive draws.
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t c = 0; c < X.cols(); ++c) X(r, c) = u(rng);
    }
}

} // namespace

std::span<const std::string_view> synthetic_names() noexcept { return kSynthetic; }

bool is_synthetic_name(std::string_view name) noexcept
{
    return std::find(std::begin(kSynthetic), std::end(kSynthetic), name) != std::end(kSynthetic);
}

Dataset generate_synthetic(std::string_view name, Rng& rng)
{
    if (name == "nguyen7") {
        // log(x+1) + log(x^2+1), 20 points from U[0, 2]
        auto data = make_dataset(name, 20, 1);
        fill_uniform(data.X, 0.0, 2.0, rng);
        for (std::size_t r = 0; r < 20; ++r) {
            const double x = data.X(r, 0);
            data.y[r] = std::log(x + 1.0) + std::log(x * x + 1.0);
        }
        return data;
    }
    if (name == "keijzer6") {
        // Harmonic number H(x) on the integer grid 0..120
        auto data = make_dataset(name, 121, 1);
        double h = 0.0;
        for (std::size_t r = 0; r <= 120; ++r) {
            if (r > 0) h += 1.0 / static_cast<double>(r);
            data.X(r, 0) = static_cast<double>(r);
            data.y[r] = h;
        }
        return data;
    }
    if (name == "pagie1") {
        // 1/(1+x^-4) + 1/(1+y^-4) on a 25x25 grid from -5 in steps of 0.4
        auto data = make_dataset(name, 625, 2);
        std::size_t r = 0;
        for (int i = 0; i < 25; ++i) {
            for (int j = 0; j < 25; ++j, ++r) {
                const double x = -5.0 + 0.4 * i;
                const double y = -5.0 + 0.4 * j;
                data.X(r, 0) = x;
                data.X(r, 1) = y;
                const double x4 = x * x * x * x;
                const double y4 = y * y * y * y;
                data.y[r] = x4 / (1.0 + x4) + y4 / (1.0 + y4);
            }
        }
        return data;
    }
    if (name == "vladislavleva4") {
        // 10 / (5 + sum (x_i - 3)^2), 5000 points from U[-0.25, 6.35]^5
        auto data = make_dataset(name, 5000, 5);
        fill_uniform(data.X, -0.25, 6.35, rng);
        for (std::size_t r = 0; r < 5000; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < 5; ++c) s += (data.X(r, c) - 3.0) * (data.X(r, c) - 3.0);
            data.y[r] = 10.0 / (5.0 + s);
        }
        return data;
    }
    if (name == "korns12") {
        // 2 - 2.1 cos(9.8 x0) sin(1.3 x4), 10000 points from U[-50, 50]^5
        auto data = make_dataset(name, 10000, 5);
        fill_uniform(data.X, -50.0, 50.0, rng);
        for (std::size_t r = 0; r < 10000; ++r) {
            data.y[r] = 2.0 - 2.1 * std::cos(9.8 * data.X(r, 0)) * std::sin(1.3 * data.X(r, 4));
        }
        return data;
    }
    throw ConfigError("unknown synthetic dataset '" + std::string(name) + "'");
}

} // namespace nsgp
