#pragma once

#include <cassert>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace nsgp {

// Every stochastic routine takes an explicit engine; there is no global RNG.
using Rng = std::mt19937_64;

// Dense column-major matrix of doubles. Columns are contiguous so a variable
// leaf can be evaluated by copying one column.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows)
        , cols_(cols)
        , data_(rows * cols, fill)
    {
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[c * rows_ + r];
    }
    double operator()(std::size_t r, std::size_t c) const noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[c * rows_ + r];
    }

    std::span<const double> col(std::size_t c) const noexcept { return {data_.data() + c * rows_, rows_}; }
    std::span<double> col(std::size_t c) noexcept { return {data_.data() + c * rows_, rows_}; }

    // Row subset, in the given order.
    Matrix select_rows(std::span<const std::size_t> rows) const
    {
        Matrix out(rows.size(), cols_);
        for (std::size_t c = 0; c < cols_; ++c) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                out(i, c) = (*this)(rows[i], c);
            }
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace nsgp
