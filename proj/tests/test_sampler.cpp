#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sphparvi/config.hpp"
#include "sphparvi/diagnostics.hpp"
#include "sphparvi/sampler.hpp"

using namespace sphparvi;
using nlohmann::json;

namespace {

// Fixed force field acting on a one-particle system; densities untouched.
Dynamics field(std::function<double(double)> a_of_x) {
    Dynamics d;
    d.acceleration = [a_of_x](const ParticleSystem& ps) {
        Matrix a(ps.size(), 1);
        for (std::size_t i = 0; i < ps.size(); ++i) a(i, 0) = a_of_x(ps.positions(i, 0));
        return a;
    };
    d.refresh_density = [](ParticleSystem&, double) {};
    return d;
}

ParticleSystem one_particle(double x, double v) {
    Matrix pos(1, 1, x);
    ParticleSystem ps = make_particles(pos, {1.0});
    ps.velocities(0, 0) = v;
    return ps;
}

RunConfig small_config(int M, int T) {
    return config_from_json(json{{"mode", "external_force"},
                                 {"target", {{"type", "gaussian"}, {"mean", {0.0}}, {"var", {1.0}}}},
                                 {"M", M},
                                 {"T", T},
                                 {"seed", 7}});
}

}  // namespace

TEST_CASE("h schedules") {
    HSchedule c;
    c.h_start = c.h_end = 0.3;
    CHECK(c.at(0, 10) == 0.3);
    CHECK(c.at(9, 10) == 0.3);

    HSchedule lin{HSchedule::Type::Linear, 0.5, 0.1};
    CHECK(lin.at(0, 11) == 0.5);
    CHECK(lin.at(10, 11) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(lin.at(5, 11) == doctest::Approx(0.3).epsilon(1e-15));

    HSchedule rec{HSchedule::Type::Reciprocal, 0.5, 0.1};
    CHECK(rec.at(0, 11) == 0.5);
    CHECK(rec.at(10, 11) == doctest::Approx(0.1).epsilon(1e-14));
    for (int t = 1; t < 11; ++t) CHECK(rec.at(t, 11) < rec.at(t - 1, 11));
    CHECK(rec.at(0, 1) == 0.5);
}

TEST_CASE("initialize: proposal support, moments and determinism") {
    RunConfig cfg = config_from_json(json{{"mode", "external_force"},
                                          {"target", {{"type", "gaussian"}, {"mean", {0.0, 0.0}}, {"var", {1.0, 1.0}}}},
                                          {"M", 1000},
                                          {"T", 1},
                                          {"init", {{"type", "uniform"}, {"low", {0.0, 0.0}}, {"high", {1.0, 1.0}}}}});
    const ParticleSystem box = initialize(cfg);
    for (double x : box.positions.data()) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    for (double v : box.velocities.data()) CHECK(v == 0.0);
    for (double mass : box.masses) CHECK(mass == 1.0 / 1000.0);
    const KernelSpec spec = make_kernel(cfg.kernel, 2, cfg.h_schedule.at(0, cfg.T));
    CHECK(box.densities == summation_density(box, spec, cfg.fluid));
    CHECK(initialize(cfg) == box);

    cfg.init.high = {1.0, 0.0};
    CHECK_THROWS_AS(initialize(cfg), ConfigError);

    RunConfig g = small_config(10000, 1);
    const ParticleSystem cloud = initialize(g);
    const Moments mo = moments(cloud.positions);
    CHECK(std::abs(mo.mean[0]) < 4.0 / std::sqrt(10000.0));
    CHECK(mo.var[0] == doctest::Approx(1.0).epsilon(0.05));

    g.mass = 0.25;
    CHECK(initialize(g).masses[3] == 0.25);
}

TEST_CASE("CFL step") {
    FluidParams p;
    p.c0 = 10.0;
    p.visc_alpha = 0.08;
    const double expected = std::min(0.25 * 0.1 / 1.0, 0.4 * 0.1 / (10.0 * (1.0 + 0.6 * 0.08)));
    CHECK(expected == doctest::Approx(0.003817).epsilon(1e-4));
    CHECK(cfl_step(p, Vec{3.0, 1.0, 2.0}, 0.1) == doctest::Approx(expected).epsilon(1e-15));
    // the smallest magnitude sets the force branch, which is loose here
    CHECK(cfl_step(p, Vec{1e-3, 5.0}, 0.1) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(cfl_step(p, Vec{0.0, 0.0}, 0.1) == doctest::Approx(0.4 * 0.1 / (10.0 * 1.048)).epsilon(1e-15));
    CHECK(cfl_step(p, Vec{}, 0.1) == doctest::Approx(0.4 * 0.1 / (10.0 * 1.048)).epsilon(1e-15));
    p.c0 = 0.01;
    CHECK(cfl_step(p, Vec{2.0}, 0.1) == doctest::Approx(0.25 * 0.1 / 2.0).epsilon(1e-15));
    CHECK(cfl_step(p, Vec{2.0}, 0.2) == 2.0 * cfl_step(p, Vec{2.0}, 0.1));
}

TEST_CASE("semi-implicit step by hand") {
    const ParticleSystem ps = one_particle(0.3, -0.2);
    const ParticleSystem drift = semi_implicit_step(ps, field([](double) { return 0.0; }), 0.1);
    CHECK(drift.positions(0, 0) == 0.3 + -0.2 * 0.1);
    CHECK(drift.velocities(0, 0) == -0.2);

    const ParticleSystem s = semi_implicit_step(ps, field([](double x) { return -x; }), 0.1);
    const double v1 = -0.2 + -0.3 * 0.1;
    CHECK(s.velocities(0, 0) == v1);
    CHECK(s.positions(0, 0) == 0.3 + v1 * 0.1);
}

TEST_CASE("leapfrog step by hand") {
    const ParticleSystem ps = one_particle(0.3, -0.2);
    const ParticleSystem drift = leapfrog_step(ps, field([](double) { return 0.0; }), 0.1);
    CHECK(drift.positions(0, 0) == 0.3 + -0.2 * 0.1);
    CHECK(drift.velocities(0, 0) == -0.2);

    const ParticleSystem c = leapfrog_step(ps, field([](double) { return 1.5; }), 0.1);
    CHECK(c.positions(0, 0) == doctest::Approx(0.3 - 0.2 * 0.1 + 1.5 * 0.01 / 2).epsilon(1e-15));
    CHECK(c.velocities(0, 0) == doctest::Approx(-0.2 + 1.5 * 0.1).epsilon(1e-15));

    // carried acceleration is reused and refreshed
    Matrix carried;
    const Dynamics h = field([](double x) { return -x; });
    const ParticleSystem a = leapfrog_step(ps, h, 0.1, &carried);
    CHECK(carried(0, 0) == -a.positions(0, 0));
    const ParticleSystem b1 = leapfrog_step(a, h, 0.1, &carried);
    const ParticleSystem b2 = leapfrog_step(a, h, 0.1);
    CHECK(b1 == b2);
}

TEST_CASE("harmonic oscillator energy under leapfrog") {
    const Dynamics h = field([](double x) { return -x; });
    ParticleSystem ps = one_particle(1.0, 0.0);
    Matrix carried;
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        ps = leapfrog_step(ps, h, 0.01, &carried);
        const double e = 0.5 * (ps.positions(0, 0) * ps.positions(0, 0) + ps.velocities(0, 0) * ps.velocities(0, 0));
        worst = std::max(worst, std::abs(e - 0.5) / 0.5);
    }
    CHECK(worst < 1e-4);
    // and it tracks the closed form cos(t)
    CHECK(ps.positions(0, 0) == doctest::Approx(std::cos(10.0)).epsilon(1e-4));
}

TEST_CASE("semi-implicit approaches leapfrog linearly in dt") {
    auto gap = [](double dt) {
        const Dynamics h = field([](double x) { return -x - 0.3 * x * x * x; });
        ParticleSystem a = one_particle(1.0, 0.0), b = a;
        const int steps = static_cast<int>(std::lround(2.0 / dt));
        for (int n = 0; n < steps; ++n) {
            a = semi_implicit_step(a, h, dt);
            b = leapfrog_step(b, h, dt);
        }
        return std::abs(a.positions(0, 0) - b.positions(0, 0));
    };
    const double g1 = gap(0.01), g2 = gap(0.005), g3 = gap(0.0025);
    CHECK(g1 / g2 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(g2 / g3 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("non-finite acceleration names the particle") {
    Dynamics bad = field([](double x) { return x > 0.5 ? std::nan("") : 0.0; });
    Matrix pos(3, 1);
    pos(0, 0) = 0.0;
    pos(1, 0) = 0.7;
    pos(2, 0) = 0.9;
    const ParticleSystem ps = make_particles(pos, {1.0, 1.0, 1.0});
    try {
        (void)semi_implicit_step(ps, bad, 0.1);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(e.particle() == 1);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
    CHECK_THROWS_AS(leapfrog_step(ps, bad, 0.1), NumericError);
}

TEST_CASE("run: zero step keeps the initial cloud") {
    RunConfig cfg = small_config(20, 1);
    cfg.dt = 0.0;
    const RunReport r = run(cfg);
    CHECK_FALSE(r.failed);
    CHECK(r.final_positions == r.initial_positions);
    CHECK(r.completed_iterations() == 1);
    CHECK(r.best_iteration == 0);
    CHECK(r.best_positions == r.initial_positions);
}

TEST_CASE("run: determinism and trace lengths") {
    const RunConfig cfg = small_config(30, 40);
    const RunReport a = run(cfg), b = run(cfg);
    CHECK(a.final_positions == b.final_positions);
    CHECK(a.best_positions == b.best_positions);
    CHECK(a.avg_density_trace == b.avg_density_trace);
    CHECK(a.kinetic_energy_trace == b.kinetic_energy_trace);
    CHECK(a.dt_trace == b.dt_trace);
    CHECK(a.completed_iterations() == 40);
    CHECK(a.kinetic_energy_trace.size() == 40);
    CHECK(a.dt_trace.size() == 40);
    CHECK(a.kinetic_energy_trace[0] == 0.0);
    for (double dt : a.dt_trace) CHECK(dt > 0.0);
}

TEST_CASE("run: snapshot contract") {
    RunConfig cfg = small_config(40, 60);
    cfg.snapshot_stride = 25;
    const RunReport r = run(cfg);
    const auto& tr = r.avg_density_trace;
    const int argmax = static_cast<int>(std::max_element(tr.begin(), tr.end()) - tr.begin());
    CHECK(r.best_iteration == argmax);

    REQUIRE(r.snapshots.size() == 3);
    CHECK(r.snapshots[0].first == 0);
    CHECK(r.snapshots[1].first == 25);
    CHECK(r.snapshots[2].first == 50);
    CHECK(r.snapshots[0].second == r.initial_positions);

    // the trace entry for iteration t describes the state entering step t
    if (r.best_iteration > 0) {
        RunConfig shorter = cfg;
        shorter.T = r.best_iteration;
        CHECK(run(shorter).final_positions == r.best_positions);
    }
}

TEST_CASE("run: blow-up gives a partial failed report") {
    RunConfig cfg = small_config(50, 50);
    cfg.dt = 1e6;
    const RunReport r = run(cfg);
    CHECK(r.failed);
    CHECK(r.abort_iteration >= 0);
    CHECK(r.abort_iteration < 50);
    CHECK(r.completed_iterations() == r.abort_iteration + 1);
    CHECK(r.message.find("iteration") != std::string::npos);
}

TEST_CASE("run: capability mismatch is a configuration error before stepping") {
    RunConfig cfg = small_config(5, 5);
    cfg.kernel = KernelKind::Viscosity;  // not defined in 1D
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("run: both integrators and density modes move the cloud toward the target") {
    for (const char* integ : {"semi_implicit", "leapfrog"})
        for (const char* dens : {"summation", "continuity"}) {
            CAPTURE(integ);
            CAPTURE(dens);
            const RunConfig cfg = config_from_json(json{
                {"mode", "external_force"},
                {"target", {{"type", "gaussian"}, {"mean", {1.0}}, {"var", {1.0}}}},
                {"M", 100},
                {"T", 300},
                {"seed", 3},
                {"integrator", integ},
                // the density diffusion term as written sharpens gradients, so it is off here
                {"fluid", {{"density_mode", dens}, {"a_d", std::string(dens) == "continuity" ? 0.0 : 0.1}}},
                {"init", {{"type", "gaussian"}, {"mean", {-2.0}}, {"sd", {0.5}}}}});
            const RunReport r = run(cfg);
            REQUIRE_FALSE(r.failed);
            const TargetModel t = make_target(cfg.target);
            CHECK(w1_per_dim(r.final_positions, t)[0] < 0.5 * w1_per_dim(r.initial_positions, t)[0]);
        }
}
