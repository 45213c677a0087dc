#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sphparvi/common.hpp"
#include "sphparvi/targets.hpp"

namespace sphparvi {

struct Histogram {
    Vec edges;   // bins + 1
    Vec masses;  // bins, sums to 1
};

/// Equal-width bins over [min, max]; a zero range is widened by 1e-9.
Histogram histogram(std::span<const double> samples, int bins);

/// Silverman's rule 1.06 sd M^(-1/5); 1e-3 (1 + |mean|) for a constant sample.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian-kernel density estimate evaluated on `grid`. Needs >= 2 samples.
Vec kde_1d(std::span<const double> samples, std::span<const double> grid);

/// Evenly spaced grid over [min - 4 bw, max + 4 bw].
Vec kde_grid(std::span<const double> samples, int points);

struct Moments {
    Vec mean;
    Vec var;  // unbiased; zero when only one sample
    bool variance_defined = true;
};

Moments moments(const Matrix& positions);

/// Exact W1 = integral |F_hat - F| between the empirical CDF of `samples`
/// and an analytic marginal CDF, integrated piecewise between order statistics.
double w1_to_cdf(std::span<const double> samples, const MarginalCdf& cdf);

/// Per-dimension W1 against the target's analytic marginals.
Vec w1_per_dim(const Matrix& positions, const TargetModel& target);

/// Fraction of particles whose Mahalanobis distance to a component mean is
/// within radius_multiplier; each particle counts toward its nearest
/// component only.
Vec mode_occupancy(const Matrix& positions, const std::vector<GaussianComponent>& components,
                   double radius_multiplier = 3.0);

struct Diagnostics {
    std::vector<Histogram> per_dim_hist;
    std::vector<std::pair<Vec, Vec>> per_dim_kde;  // (grid, density)
    Moments moments;
    std::optional<Vec> w1;
    std::optional<Vec> occupancy;
};

Diagnostics summarize(const Matrix& positions, const TargetModel& target, int bins, int kde_points);

/// Column k of an M x d matrix.
Vec column(const Matrix& m, std::size_t k);

}  // namespace sphparvi
