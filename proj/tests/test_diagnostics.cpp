#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "sphparvi/diagnostics.hpp"

using namespace sphparvi;

namespace {

double sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

Matrix column_matrix(const Vec& xs) {
    Matrix m(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
    return m;
}

}  // namespace

TEST_CASE("histogram examples") {
    const Histogram same = histogram(Vec{2.0, 2.0, 2.0}, 5);
    CHECK(same.edges.size() == 6);
    int occupied = 0;
    for (double m : same.masses) occupied += m > 0.0;
    CHECK(occupied == 1);
    CHECK(sum(same.masses) == 1.0);

    const Histogram two = histogram(Vec{0.0, 1.0}, 2);
    CHECK(two.masses == Vec{0.5, 0.5});
    CHECK(two.edges.front() == 0.0);
    CHECK(two.edges.back() == 1.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec xs(10000);
    for (double& x : xs) x = u(rng);
    const Histogram h = histogram(xs, 10);
    // independent count with the same edges
    for (int b = 0; b < 10; ++b) {
        int n = 0;
        for (double x : xs) n += x >= h.edges[b] && (b == 9 ? x <= h.edges[b + 1] : x < h.edges[b + 1]);
        CHECK(h.masses[static_cast<std::size_t>(b)] == doctest::Approx(n / 10000.0).epsilon(1e-12));
        CHECK(std::abs(h.masses[static_cast<std::size_t>(b)] - 0.1) < 0.05);
    }
    CHECK_THROWS_AS(histogram(Vec{}, 3), std::invalid_argument);
}

TEST_CASE("histogram mass is conserved") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vec xs(1 + trial * 7);
        for (double& x : xs) x = n(rng);
        CHECK(std::abs(sum(histogram(xs, 1 + trial % 17).masses) - 1.0) <= 1e-12);
    }
}

TEST_CASE("KDE examples") {
    const Vec pm{-1.0, 1.0};
    const Vec probe{-0.3, 0.0, 0.3};
    const Vec d = kde_1d(pm, probe);
    CHECK(std::abs(d[0] - d[2]) <= 1e-12);
    for (double v : d) CHECK(v > 0.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    Vec xs(100000);
    for (double& x : xs) x = n(rng);
    CHECK(std::abs(kde_1d(xs, Vec{0.0})[0] - 1.0 / std::sqrt(2.0 * oracle::kPi)) < 0.05);

    const double bw = silverman_bandwidth(pm);
    CHECK(kde_1d(pm, Vec{1.0 + 6.5 * bw})[0] < 1e-8);
    CHECK_THROWS_AS(kde_1d(Vec{1.0}, probe), std::invalid_argument);
}

TEST_CASE("Silverman bandwidth") {
    const Vec xs{1.0, 2.0, 3.0, 4.0};
    const double sd = std::sqrt(5.0 / 3.0);
    CHECK(silverman_bandwidth(xs) == doctest::Approx(1.06 * sd * std::pow(4.0, -0.2)).epsilon(1e-14));
    CHECK(silverman_bandwidth(Vec{-2.0, -2.0}) == doctest::Approx(3e-3).epsilon(1e-14));
}

TEST_CASE("KDE integrates to one on its own grid") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.5, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec xs(2 + trial * 25);
        for (double& x : xs) x = n(rng);
        const Vec grid = kde_grid(xs, 200);
        const Vec dens = kde_1d(xs, grid);
        double area = 0.0;
        for (std::size_t k = 1; k < grid.size(); ++k) area += 0.5 * (dens[k] + dens[k - 1]) * (grid[k] - grid[k - 1]);
        CHECK(area >= 0.99);
        CHECK(area <= 1.01);
        for (double v : dens) CHECK(v >= 0.0);
    }
}

TEST_CASE("moments") {
    const Moments pair = moments(column_matrix({-1.5, 1.5}));
    CHECK(pair.mean[0] == 0.0);
    CHECK(pair.var[0] == 2.0 * 1.5 * 1.5);

    const Moments flat = moments(column_matrix({0.7, 0.7, 0.7}));
    CHECK(flat.var[0] == 0.0);

    const Moments one = moments(column_matrix({4.0}));
    CHECK_FALSE(one.variance_defined);
    CHECK(one.var[0] == 0.0);

    // three points by hand: mean 1, squared deviations 1, 0.25, 2.25
    const Moments three = moments(column_matrix({0.0, 1.5, 1.5}));
    CHECK(three.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(three.var[0] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("moments under translation") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix pts(50, 2);
    for (double& x : pts.data()) x = n(rng);
    Matrix shifted = pts;
    const double delta[2] = {0.5, -0.25};  // exact binary fractions
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t k = 0; k < 2; ++k) shifted(i, k) += delta[k];
    const Moments a = moments(pts), b = moments(shifted);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(b.mean[k] == doctest::Approx(a.mean[k] + delta[k]).epsilon(1e-14));
        CHECK(b.var[k] == doctest::Approx(a.var[k]).epsilon(1e-12));
    }
}

TEST_CASE("W1 examples") {
    const TargetModel g = gaussian_target({0.0}, {1.0});
    const MarginalCdf& F = g.marginals[0];

    // all mass at 0 vs N(0,1): E|Z|
    const double w0 = w1_to_cdf(Vec(100, 0.0), F);
    CHECK(w0 == doctest::Approx(std::sqrt(2.0 / oracle::kPi)).epsilon(1e-12));
    const double quad = oracle::w1_by_integration(Vec{0.0}, [](double x) { return oracle::normal_cdf(x); }, -12.0, 12.0,
                                                  400000);
    CHECK(w0 == doctest::Approx(quad).epsilon(1e-6));

    for (int m : {10, 100, 1000}) {
        Vec xs(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) xs[static_cast<std::size_t>(i)] = F.quantile((i + 0.5) / m);
        CHECK(w1_to_cdf(xs, F) < 2.0 / m);
    }
}

TEST_CASE("W1 agrees with numeric integration of |F_hat - F|") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.3, 1.4);
    const TargetModel mix = mixture_target({{1.0, {-1.0}, {0.5}}, {2.0, {1.0}, {1.0}}});
    for (int trial = 0; trial < 5; ++trial) {
        Vec xs(37);
        for (double& x : xs) x = n(rng);
        const double exact = w1_to_cdf(xs, mix.marginals[0]);
        const double numeric =
            oracle::w1_by_integration(xs, [&](double x) { return mix.marginals[0].cdf(x); }, -15.0, 15.0, 600000);
        CHECK(exact == doctest::Approx(numeric).epsilon(1e-5));
    }
}

TEST_CASE("two-sample W1 is a metric on samples") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    Vec a(40), b(40);
    for (double& x : a) x = n(rng);
    for (double& x : b) x = 1.0 + n(rng);
    CHECK(oracle::w1_two_sample(a, a) == 0.0);
    CHECK(oracle::w1_two_sample(a, b) == doctest::Approx(oracle::w1_two_sample(b, a)).epsilon(1e-14));
    Vec shifted = a;
    for (double& x : shifted) x += 0.75;
    CHECK(oracle::w1_two_sample(a, shifted) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("per-dimension W1 needs marginals") {
    TargetModel bare;
    bare.dim = 1;
    bare.score = [](std::span<const double>) { return Vec{0.0}; };
    CHECK_THROWS_AS(w1_per_dim(column_matrix({0.0, 1.0}), bare), CapabilityError);
    const Vec w = w1_per_dim(column_matrix({0.0, 0.0}), gaussian_target({0.0}, {1.0}));
    CHECK(w[0] == doctest::Approx(std::sqrt(2.0 / oracle::kPi)).epsilon(1e-12));
}

TEST_CASE("mode occupancy") {
    const std::vector<GaussianComponent> comps{{1.0, {2.0, 0.0}, {1.0, 1.0}}, {1.0, {-2.0, 0.0}, {1.0, 1.0}}};
    Matrix at_first(10, 2);
    for (std::size_t i = 0; i < 10; ++i) at_first(i, 0) = 2.0;
    CHECK(mode_occupancy(at_first, comps) == Vec{1.0, 0.0});

    Matrix split(10, 2);
    for (std::size_t i = 0; i < 10; ++i) split(i, 0) = i < 5 ? 2.0 : -2.0;
    CHECK(mode_occupancy(split, comps) == Vec{0.5, 0.5});

    Matrix far(4, 2, 40.0);
    CHECK(mode_occupancy(far, comps) == Vec{0.0, 0.0});

    // exact mixture draws
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution pick(0.5);
    Matrix draws(10000, 2);
    for (std::size_t i = 0; i < 10000; ++i) {
        draws(i, 0) = (pick(rng) ? 2.0 : -2.0) + n(rng);
        draws(i, 1) = n(rng);
    }
    const Vec occ = mode_occupancy(draws, comps);
    CHECK(std::abs(occ[0] - 0.5) < 0.03);
    CHECK(std::abs(occ[1] - 0.5) < 0.03);
    CHECK(occ[0] + occ[1] <= 1.0);
}

TEST_CASE("summarize fills every section") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix pts(30, 2);
    for (double& x : pts.data()) x = n(rng);
    const TargetModel mix = mixture_target({{1.0, {1.0, 0.0}, {1.0, 1.0}}, {1.0, {-1.0, 0.0}, {1.0, 1.0}}});
    const Diagnostics d = summarize(pts, mix, 12, 50);
    CHECK(d.per_dim_hist.size() == 2);
    CHECK(d.per_dim_hist[0].masses.size() == 12);
    CHECK(d.per_dim_kde[1].first.size() == 50);
    CHECK(d.per_dim_kde[1].second.size() == 50);
    REQUIRE(d.w1);
    CHECK(d.w1->size() == 2);
    REQUIRE(d.occupancy);
    CHECK(d.occupancy->size() == 2);
    CHECK(column(pts, 1)[4] == pts(4, 1));
}
