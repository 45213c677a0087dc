#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphparvi {

using Vec = std::vector<double>;

/// Raised for invalid parameters or configuration values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a target is asked for a density or score it does not provide.
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the particle state stops being finite.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t particle)
        : std::runtime_error(what), particle_(particle) {}

    std::size_t particle() const { return particle_; }

private:
    std::size_t particle_;
};

/// Dense row-major matrix of doubles; one row per particle.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
    double operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace sphparvi
