#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsgp/matrix.hpp"

namespace nsgp {

struct Dataset {
    std::string name;
    std::vector<std::string> feature_names;
    std::string target_name = "y";
    Matrix X;
    std::vector<double> y;

    std::size_t rows() const noexcept { return y.size(); }
    std::size_t dims() const noexcept { return X.cols(); }

    Dataset subset(std::span<const std::size_t> rows) const;
};

// Reads a CSV with a header row; the last column is the target. Throws
// DataError naming the 1-based row and column of any non-numeric cell, and on
// a constant target.
Dataset load_csv(const std::string& path, std::string name = {});

// Writes values with round-trip precision.
void write_csv(const Dataset& data, const std::string& path);

struct Standardization {
    std::vector<double> mean;
    std::vector<double> sd; // 0 for columns constant on the training rows
};

struct StandardizedDataset {
    Dataset data;
    Standardization transform;
};

// Shifts and scales every feature column by its training-row mean and
// standard deviation (population). Zero-sd columns are only shifted. The
// target is left as is.
StandardizedDataset standardize(const Dataset& data, std::span<const std::size_t> train_rows);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

inline constexpr std::size_t kMinRows = 10;

// Seeded shuffle, then floor(0.8N) / floor(0.1N) / remainder.
SplitIndices split(std::size_t n, std::uint64_t seed);

// Names accepted by generate_synthetic.
std::span<const std::string_view> synthetic_names() noexcept;

bool is_synthetic_name(std::string_view name) noexcept;

// Noise-free benchmark data: nguyen7, keijzer6, pagie1, vladislavleva4,
// korns12. Throws ConfigError on an unknown name.
Dataset generate_synthetic(std::string_view name, Rng& rng);

double mean(std::span<const double> v) noexcept;

// Population variance (divides by N).
double variance(std::span<const double> v) noexcept;

} // namespace nsgp
