#include "sphparvi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sphparvi {

Vec column(const Matrix& m, std::size_t k) {
    Vec out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, k);
    return out;
}

Histogram histogram(std::span<const double> samples, int bins) {
    if (samples.empty() || bins < 1) throw std::invalid_argument("histogram: need samples and bins >= 1");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    double hi = *hi_it;
    if (hi == lo) hi = lo + 1e-9;
    const double width = (hi - lo) / bins;

    Histogram out;
    out.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) out.edges[static_cast<std::size_t>(b)] = lo + width * b;
    out.edges.back() = hi;

    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double x : samples) {
        auto b = static_cast<long>(std::floor((x - lo) / width));
        b = std::clamp<long>(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    out.masses.resize(counts.size());
    const double n = static_cast<double>(samples.size());
    for (std::size_t b = 0; b < counts.size(); ++b) out.masses[b] = static_cast<double>(counts[b]) / n;
    return out;
}

double silverman_bandwidth(std::span<const double> samples) {
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    if (!(sd > 0.0)) return 1e-3 * (1.0 + std::abs(mean));
    return 1.06 * sd * std::pow(n, -0.2);
}

Vec kde_1d(std::span<const double> samples, std::span<const double> grid) {
    if (samples.size() < 2) throw std::invalid_argument("kde_1d: need at least two samples");
    const double bw = silverman_bandwidth(samples);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
    Vec out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (double x : samples) {
            const double z = (grid[g] - x) / bw;
            s += std::exp(-0.5 * z * z);
        }
        out[g] = s * norm;
    }
    return out;
}

Vec kde_grid(std::span<const double> samples, int points) {
    const double bw = silverman_bandwidth(samples);
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it - 4.0 * bw;
    const double hi = *hi_it + 4.0 * bw;
    Vec grid(static_cast<std::size_t>(points));
    for (int p = 0; p < points; ++p) grid[static_cast<std::size_t>(p)] = lo + (hi - lo) * p / (points - 1);
    return grid;
}

Moments moments(const Matrix& positions) {
    const std::size_t m = positions.rows();
    const std::size_t d = positions.cols();
    if (m == 0) throw std::invalid_argument("moments: empty cloud");
    Moments out;
    out.mean.assign(d, 0.0);
    out.var.assign(d, 0.0);
    // Welford: a constant column gives exactly zero variance
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const double x = positions(i, k);
            const double delta = x - out.mean[k];
            out.mean[k] += delta / static_cast<double>(i + 1);
            out.var[k] += delta * (x - out.mean[k]);
        }
    if (m == 1) {
        out.variance_defined = false;
        out.var.assign(d, 0.0);
        return out;
    }
    for (double& v : out.var) v /= static_cast<double>(m - 1);
    return out;
}

double w1_to_cdf(std::span<const double> samples, const MarginalCdf& cdf) {
    if (samples.empty()) throw std::invalid_argument("w1: empty sample");
    Vec x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();

    double total = cdf.integral(-std::numeric_limits<double>::infinity(), x.front());
    total += cdf.upper_tail_integral(x.back());
    for (std::size_t k = 1; k < n; ++k) {
        const double a = x[k - 1];
        const double b = x[k];
        if (!(b > a)) continue;
        const double level = static_cast<double>(k) / static_cast<double>(n);
        const double fa = cdf.cdf(a);
        const double fb = cdf.cdf(b);
        if (fb <= level) {
            total += level * (b - a) - cdf.integral(a, b);
        } else if (fa >= level) {
            total += cdf.integral(a, b) - level * (b - a);
        } else {
            const double cross = std::clamp(cdf.quantile(level), a, b);
            total += level * (cross - a) - cdf.integral(a, cross);
            total += cdf.integral(cross, b) - level * (b - cross);
        }
    }
    return total;
}

Vec w1_per_dim(const Matrix& positions, const TargetModel& target) {
    if (target.marginals.size() != positions.cols())
        throw CapabilityError("target '" + target.description + "' has no analytic marginal CDFs");
    Vec out;
    for (std::size_t k = 0; k < positions.cols(); ++k) out.push_back(w1_to_cdf(column(positions, k), target.marginals[k]));
    return out;
}

Vec mode_occupancy(const Matrix& positions, const std::vector<GaussianComponent>& components,
                   double radius_multiplier) {
    Vec counts(components.size(), 0.0);
    if (positions.rows() == 0) return counts;
    for (std::size_t i = 0; i < positions.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_k = 0;
        for (std::size_t c = 0; c < components.size(); ++c) {
            double q = 0.0;
            for (std::size_t k = 0; k < positions.cols(); ++k) {
                const double dx = positions(i, k) - components[c].mean[k];
                q += dx * dx / components[c].var[k];
            }
            if (q < best) {
                best = q;
                best_k = c;
            }
        }
        if (std::sqrt(best) <= radius_multiplier) counts[best_k] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(positions.rows());
    return counts;
}

Diagnostics summarize(const Matrix& positions, const TargetModel& target, int bins, int kde_points) {
    Diagnostics out;
    for (std::size_t k = 0; k < positions.cols(); ++k) {
        const Vec col = column(positions, k);
        out.per_dim_hist.push_back(histogram(col, bins));
        if (col.size() >= 2) {
            Vec grid = kde_grid(col, kde_points);
            Vec dens = kde_1d(col, grid);
            out.per_dim_kde.emplace_back(std::move(grid), std::move(dens));
        }
    }
    out.moments = moments(positions);
    if (target.marginals.size() == positions.cols()) out.w1 = w1_per_dim(positions, target);
    if (target.components) out.occupancy = mode_occupancy(positions, *target.components);
    return out;
}

}  // namespace sphparvi
