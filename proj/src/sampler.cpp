#include "sphparvi/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace sphparvi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_finite(const Matrix& a, const char* what) {
    const std::size_t d = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < d; ++k)
            if (!std::isfinite(a(i, k)))
                throw NumericError(std::string("non-finite ") + what + " at particle " + std::to_string(i), i);
}

void require_finite(const ParticleSystem& ps) {
    if (auto bad = ps.first_nonfinite())
        throw NumericError("non-finite state at particle " + std::to_string(*bad), *bad);
}

}  // namespace

Integrator parse_integrator(std::string_view s) {
    if (s == "semi_implicit") return Integrator::SemiImplicit;
    if (s == "leapfrog") return Integrator::Leapfrog;
    throw ConfigError("integrator: unknown value '" + std::string(s) + "'");
}

std::string to_string(Integrator i) { return i == Integrator::SemiImplicit ? "semi_implicit" : "leapfrog"; }

double HSchedule::at(int t, int total) const {
    if (type == Type::Constant || total <= 1) return h_start;
    const double frac = static_cast<double>(t) / static_cast<double>(total - 1);
    if (type == Type::Linear) return h_start + (h_end - h_start) * frac;
    const double k = (h_start / h_end - 1.0) / static_cast<double>(total - 1);
    return h_start / (1.0 + k * t);
}

void RunConfig::validate() const {
    if (M < 1) throw ConfigError("M must be >= 1");
    if (T < 1) throw ConfigError("T must be >= 1");
    const int target_dim = target.dim();
    if (target_dim < 1) throw ConfigError("target: missing mean/var");
    if (d != target_dim)
        throw ConfigError("d (" + std::to_string(d) + ") does not match target dimension (" +
                          std::to_string(target_dim) + ")");
    if (d > 3) throw ConfigError("d must be 1, 2 or 3");
    if (dt && (!(*dt >= 0.0) || !std::isfinite(*dt))) throw ConfigError("dt must be positive or \"auto\"");
    if (!(h_schedule.h_end > 0.0) || !(h_schedule.h_start >= h_schedule.h_end) || !std::isfinite(h_schedule.h_start))
        throw ConfigError("h_schedule: need h_start >= h_end > 0");
    if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
    if (mass && !(*mass > 0.0)) throw ConfigError("mass must be positive");
    if (hist_bins < 1) throw ConfigError("diagnostics.bins must be >= 1");
    if (kde_points < 2) throw ConfigError("diagnostics.kde_points must be >= 2");

    const std::size_t ud = static_cast<std::size_t>(d);
    if (init.type == Proposal::Type::Uniform) {
        if (init.low.size() != ud || init.high.size() != ud)
            throw ConfigError("init: low/high must have one entry per dimension");
        for (std::size_t k = 0; k < ud; ++k)
            if (!(init.high[k] > init.low[k])) throw ConfigError("init: degenerate uniform box (need high > low)");
    } else {
        if (init.mean.size() != ud || init.sd.size() != ud)
            throw ConfigError("init: mean/sd must have one entry per dimension");
        for (double s : init.sd)
            if (!(s > 0.0)) throw ConfigError("init: degenerate gaussian proposal (need sd > 0)");
    }
    fluid.validate(d);
    make_kernel(kernel, d, h_schedule.h_end);
    make_target(target);
}

ParticleSystem initialize(const RunConfig& cfg) {
    cfg.validate();
    const std::size_t m = static_cast<std::size_t>(cfg.M);
    const std::size_t d = static_cast<std::size_t>(cfg.d);
    std::mt19937_64 rng(cfg.seed);
    Matrix pos(m, d);
    if (cfg.init.type == Proposal::Type::Uniform) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < d; ++k)
                pos(i, k) = cfg.init.low[k] + (cfg.init.high[k] - cfg.init.low[k]) * u(rng);
    } else {
        std::normal_distribution<double> n(0.0, 1.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < d; ++k) pos(i, k) = cfg.init.mean[k] + cfg.init.sd[k] * n(rng);
    }
    ParticleSystem ps = make_particles(pos, Vec(m, cfg.mass.value_or(1.0 / static_cast<double>(m))));
    const KernelSpec spec = make_kernel(cfg.kernel, cfg.d, cfg.h_schedule.at(0, cfg.T));
    ps.densities = summation_density(ps, build_cache(ps, spec), cfg.fluid);
    return ps;
}

double cfl_step(const FluidParams& params, std::span<const double> f_ext_magnitudes, double h) {
    constexpr double kGuard = 1e-12;
    const double acoustic = 0.4 * h / (params.c0 * (1.0 + 0.6 * params.visc_alpha));
    double f_min = std::numeric_limits<double>::infinity();
    for (double f : f_ext_magnitudes)
        if (f >= kGuard) f_min = std::min(f_min, f);
    if (!std::isfinite(f_min)) return acoustic;
    return std::min(0.25 * h / f_min, acoustic);
}

ParticleSystem semi_implicit_step(const ParticleSystem& ps, const Dynamics& dyn, double dt) {
    const Matrix a = dyn.acceleration(ps);
    require_finite(a, "acceleration");
    ParticleSystem next = ps;
    auto& v = next.velocities.data();
    auto& r = next.positions.data();
    for (std::size_t n = 0; n < v.size(); ++n) {
        v[n] += a.data()[n] * dt;
        r[n] += v[n] * dt;
    }
    require_finite(next);
    dyn.refresh_density(next, dt);
    return next;
}

ParticleSystem leapfrog_step(const ParticleSystem& ps, const Dynamics& dyn, double dt, Matrix* carried) {
    Matrix a0 = (carried && carried->rows() == ps.size()) ? *carried : dyn.acceleration(ps);
    require_finite(a0, "acceleration");
    ParticleSystem next = ps;
    auto& v = next.velocities.data();
    auto& r = next.positions.data();
    for (std::size_t n = 0; n < v.size(); ++n) {
        v[n] += a0.data()[n] * (0.5 * dt);
        r[n] += v[n] * dt;
    }
    require_finite(next);
    // continuity-mode densities see the half-step velocities here
    dyn.refresh_density(next, dt);
    Matrix a1 = dyn.acceleration(next);
    require_finite(a1, "acceleration");
    for (std::size_t n = 0; n < v.size(); ++n) v[n] += a1.data()[n] * (0.5 * dt);
    require_finite(next);
    if (carried) *carried = std::move(a1);
    return next;
}

RunReport run(const RunConfig& cfg) {
    cfg.validate();
    const TargetModel target = make_target(cfg.target);
    if (cfg.mode == SamplingMode::ExternalPressure && !target.has_density())
        throw ConfigError("mode external_pressure needs a target with a log-density");
    if (cfg.mode == SamplingMode::ExternalForce && !target.has_score())
        throw ConfigError("mode external_force needs a target with a score");

    const auto t_start = Clock::now();
    RunReport report;
    report.config = cfg;

    ParticleSystem ps = initialize(cfg);
    report.initial_positions = ps.positions;
    const std::size_t m = ps.size();
    const FluidParams& fluid = cfg.fluid;

    KernelSpec refresh_spec = make_kernel(cfg.kernel, cfg.d, cfg.h_schedule.at(0, cfg.T));
    PairwiseCache cache;

    Dynamics dyn;
    dyn.refresh_density = [&](ParticleSystem& s, double dt) {
        const auto t0 = Clock::now();
        rebuild_cache(s, refresh_spec, cache);
        if (fluid.density_mode == DensityMode::Summation) {
            s.densities = summation_density(s, cache, fluid);
        } else if (dt != 0.0) {
            const Vec rate = continuity_density_rate(s, cache, fluid);
            for (std::size_t i = 0; i < s.size(); ++i)
                s.densities[i] = std::max(s.densities[i] + rate[i] * dt, fluid.rho_min);
        }
        report.timing.cache_and_density += seconds_since(t0);
    };
    dyn.acceleration = [&](const ParticleSystem& s) {
        const auto t0 = Clock::now();
        Matrix a = total_acceleration(s, cache, target, fluid, cfg.mode);
        report.timing.forces += seconds_since(t0);
        return a;
    };

    dyn.refresh_density(ps, 0.0);

    double best_avg = -std::numeric_limits<double>::infinity();
    Matrix carried;
    for (int t = 0; t < cfg.T; ++t) {
        double avg = 0.0;
        double kinetic = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            avg += ps.densities[i];
            double v2 = 0.0;
            for (double v : ps.velocities.row(i)) v2 += v * v;
            kinetic += 0.5 * ps.masses[i] * v2;
        }
        avg /= static_cast<double>(m);
        report.avg_density_trace.push_back(avg);
        report.kinetic_energy_trace.push_back(kinetic);
        if (avg > best_avg) {
            best_avg = avg;
            report.best_positions = ps.positions;
            report.best_iteration = t;
        }
        if (t % cfg.snapshot_stride == 0) report.snapshots.emplace_back(t, ps.positions);

        const double h = refresh_spec.h;
        double dt = 0.0;
        try {
            if (cfg.dt) {
                dt = *cfg.dt;
            } else {
                const Matrix f = external_force(ps, target, fluid, cfg.mode);
                Vec mags(m);
                for (std::size_t i = 0; i < m; ++i) {
                    double s = 0.0;
                    for (double x : f.row(i)) s += x * x;
                    mags[i] = std::sqrt(s);
                }
                dt = cfl_step(fluid, mags, h);
            }
            report.dt_trace.push_back(dt);

            refresh_spec = make_kernel(cfg.kernel, cfg.d, cfg.h_schedule.at(std::min(t + 1, cfg.T - 1), cfg.T));
            const auto t0 = Clock::now();
            const double busy_before = report.timing.cache_and_density + report.timing.forces;
            if (cfg.integrator == Integrator::SemiImplicit)
                ps = semi_implicit_step(ps, dyn, dt);
            else
                ps = leapfrog_step(ps, dyn, dt, &carried);
            const double busy_after = report.timing.cache_and_density + report.timing.forces;
            report.timing.integrate += seconds_since(t0) - (busy_after - busy_before);
        } catch (const NumericError& e) {
            report.failed = true;
            report.abort_iteration = t;
            report.message = "iteration " + std::to_string(t) + ": " + e.what();
            break;
        }
    }

    report.final_positions = ps.positions;
    report.timing.total = seconds_since(t_start);
    return report;
}

}  // namespace sphparvi
