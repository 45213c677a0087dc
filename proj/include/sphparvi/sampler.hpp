#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sphparvi/forces.hpp"
#include "sphparvi/kernels.hpp"
#include "sphparvi/targets.hpp"

namespace sphparvi {

enum class Integrator { SemiImplicit, Leapfrog };

Integrator parse_integrator(std::string_view s);
std::string to_string(Integrator i);

/// Smoothing length as a function of the iteration index.
struct HSchedule {
    enum class Type { Constant, Linear, Reciprocal };
    Type type = Type::Constant;
    double h_start = 0.2;
    double h_end = 0.2;

    /// h at iteration t of a T-iteration run. Linear interpolates
    /// h_start -> h_end; Reciprocal is h_start / (1 + k t) with k chosen so
    /// the last iteration reaches h_end.
    double at(int t, int total) const;

    bool operator==(const HSchedule&) const = default;
};

/// Initial proposal p0(r): a uniform box [low, high] or an axis-aligned
/// Gaussian with the given mean and standard deviations.
struct Proposal {
    enum class Type { Uniform, Gaussian };
    Type type = Type::Gaussian;
    Vec low, high;  // uniform
    Vec mean, sd;   // gaussian

    bool operator==(const Proposal&) const = default;
};

struct RunConfig {
    SamplingMode mode = SamplingMode::ExternalForce;
    int M = 0;
    int d = 0;
    int T = 0;
    std::optional<double> dt;  // nullopt selects the CFL step
    Integrator integrator = Integrator::SemiImplicit;
    HSchedule h_schedule;
    Proposal init;
    std::uint64_t seed = 0;
    int snapshot_stride = 100;
    std::optional<double> mass;  // per-particle; 1/M when unset
    FluidParams fluid;
    TargetSpec target;
    KernelKind kernel = KernelKind::CubicSpline;
    int hist_bins = 40;
    int kde_points = 200;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

struct PhaseTimes {
    double cache_and_density = 0.0;
    double forces = 0.0;
    double integrate = 0.0;
    double total = 0.0;
};

struct RunReport {
    RunConfig config;
    Matrix initial_positions;
    Matrix final_positions;
    Matrix best_positions;
    int best_iteration = -1;
    Vec avg_density_trace;
    Vec kinetic_energy_trace;
    Vec dt_trace;
    std::vector<std::pair<int, Matrix>> snapshots;
    PhaseTimes timing;
    bool failed = false;
    int abort_iteration = -1;
    std::string message;

    int completed_iterations() const { return static_cast<int>(avg_density_trace.size()); }
};

/// Callbacks an integrator needs from the fluid model.
struct Dynamics {
    /// Acceleration of a state whose densities are current.
    std::function<Matrix(const ParticleSystem&)> acceleration;
    /// Brings densities up to date after positions moved by a step of dt.
    std::function<void(ParticleSystem&, double)> refresh_density;
};

/// Draws the initial cloud; velocities start at zero, densities by summation
/// at h_schedule.at(0).
ParticleSystem initialize(const RunConfig& config);

/// Step size bound min(0.25 h / |f_min|, 0.4 h / (c0 (1 + 0.6 visc_alpha))).
/// The force branch is dropped when every external magnitude is below 1e-12.
double cfl_step(const FluidParams& params, std::span<const double> f_ext_magnitudes, double h);

/// Symplectic Euler: v += a dt, then r += v dt, then densities refreshed.
ParticleSystem semi_implicit_step(const ParticleSystem& ps, const Dynamics& dyn, double dt);

/// Kick-drift-kick leapfrog. If `carried` holds a(t) it is used instead of
/// recomputing; on return it holds a(t + dt).
ParticleSystem leapfrog_step(const ParticleSystem& ps, const Dynamics& dyn, double dt, Matrix* carried = nullptr);

/// Executes the sampling loop. Configuration problems throw ConfigError;
/// a non-finite state ends the run early with report.failed set.
RunReport run(const RunConfig& config);

}  // namespace sphparvi
