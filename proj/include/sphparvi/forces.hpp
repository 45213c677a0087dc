#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sphparvi/common.hpp"
#include "sphparvi/kernels.hpp"
#include "sphparvi/targets.hpp"

namespace sphparvi {

/// State of M particles in d dimensions.
struct ParticleSystem {
    Matrix positions;   // M x d
    Matrix velocities;  // M x d
    Vec densities;      // M, kept >= rho_min
    Vec masses;         // M

    std::size_t size() const { return positions.rows(); }
    int dim() const { return static_cast<int>(positions.cols()); }

    /// Throws std::invalid_argument if the arrays disagree on M or d.
    void check_shape() const;
    /// Index of the first particle with a non-finite entry, if any.
    std::optional<std::size_t> first_nonfinite() const;

    bool operator==(const ParticleSystem&) const = default;
};

ParticleSystem make_particles(const Matrix& positions, const Vec& masses);

enum class ViscosityMode { LaplacianKernel, LaplacianSymmetric, LinearArtificial };
enum class ExternalPressureVariant { Reciprocal, NegLog };
enum class ExternalForceVariant { Score, DensityGradient };
enum class DensityMode { Summation, Continuity };
enum class SamplingMode { ExternalPressure, ExternalForce };

ViscosityMode parse_viscosity_mode(std::string_view s);
ExternalPressureVariant parse_external_pressure(std::string_view s);
ExternalForceVariant parse_external_force(std::string_view s);
DensityMode parse_density_mode(std::string_view s);
SamplingMode parse_sampling_mode(std::string_view s);
std::string to_string(ViscosityMode m);
std::string to_string(ExternalPressureVariant v);
std::string to_string(ExternalForceVariant v);
std::string to_string(DensityMode m);
std::string to_string(SamplingMode m);

/// Physical and numerical constants of the fluid model.
///
/// visc_alpha is the artificial-viscosity constant; alpha_scale is the
/// amplification applied to the target's pressure or force field.
struct FluidParams {
    double c0 = 1.0;
    double rho0 = 1e-3;
    double gamma = 1.0;
    ViscosityMode viscosity_mode = ViscosityMode::LinearArtificial;
    double mu = 0.0;
    double visc_alpha = 0.5;
    double a_d = 0.1;
    double alpha_scale = 1.0;
    double eps_p = 1e-12;
    double eps_sing = 0.01;
    Vec gravity;  // empty means zero
    bool regularization = false;
    double rho_min = 1e-9;  // 1e-6 rho0; the config reader rescales it with rho0
    double internal_pressure_weight = 1.0;
    ExternalPressureVariant external_pressure = ExternalPressureVariant::NegLog;
    ExternalForceVariant external_force = ExternalForceVariant::Score;
    double log_shift = 0.0;
    DensityMode density_mode = DensityMode::Summation;
    /// Kernel whose Laplacian drives the Laplacian viscosity modes; the main
    /// kernel when unset.
    std::optional<KernelKind> viscosity_kernel;

    /// Throws ConfigError naming the first violated constraint.
    void validate(int dim) const;

    bool operator==(const FluidParams&) const = default;
};

/// Pairwise terms for one particle configuration, reused by every
/// density and force evaluation of a step.
struct PairwiseCache {
    KernelSpec spec;
    std::size_t m = 0;
    int dim = 0;
    Vec distances;      // m x m, symmetric
    Vec kernel_values;  // m x m, symmetric
    Vec kernel_grads;   // m x m x dim, antisymmetric in (i, j)

    double distance(std::size_t i, std::size_t j) const { return distances[i * m + j]; }
    double value(std::size_t i, std::size_t j) const { return kernel_values[i * m + j]; }
    std::span<const double> grad(std::size_t i, std::size_t j) const {
        return {kernel_grads.data() + (i * m + j) * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
};

PairwiseCache build_cache(const ParticleSystem& ps, const KernelSpec& spec);
/// Same as build_cache, reusing the storage already held by `cache`.
void rebuild_cache(const ParticleSystem& ps, const KernelSpec& spec, PairwiseCache& cache);

// Each operation below comes in two forms: one reading a prebuilt cache and
// one recomputing the pairwise terms inline from a kernel spec. Both run the
// same arithmetic and agree bitwise.

/// rho_i = sum_j m_j K_ij (self term included), clamped at rho_min.
Vec summation_density(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params);
Vec summation_density(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params);

/// d rho_i / dt from the continuity equation plus delta-SPH diffusion.
Vec continuity_density_rate(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params);
Vec continuity_density_rate(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params);

/// Equation of state P = c0^2 rho0 / gamma ((rho / rho0)^gamma - 1).
double eos_pressure(double rho, const FluidParams& params);

/// Pressure of the target field at r: 1/(alpha p) or -alpha log(p + eps).
double external_pressure(const TargetModel& target, std::span<const double> r, const FluidParams& params,
                         ExternalPressureVariant variant);

/// a_i = -sum_j m_j (P_i/rho_i^2 + P_j/rho_j^2) grad K_ij.
Matrix pressure_force(const ParticleSystem& ps, const PairwiseCache& cache, std::span<const double> pressures);
Matrix pressure_force(const ParticleSystem& ps, const KernelSpec& spec, std::span<const double> pressures);

Matrix viscous_force(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params);
Matrix viscous_force(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params);

/// Density-based repulsion -sum_j m_j grad K_ij / (rho_i + eps_p).
Matrix regularization_force(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params);
Matrix regularization_force(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params);

/// Per-particle body force of the target field plus gravity: alpha * score
/// (or alpha * grad p) in ExternalForce mode, gravity alone otherwise.
Matrix external_force(const ParticleSystem& ps, const TargetModel& target, const FluidParams& params,
                      SamplingMode mode);

/// Right-hand side of the momentum equation for the chosen sampling mode.
Matrix total_acceleration(const ParticleSystem& ps, const PairwiseCache& cache, const TargetModel& target,
                          const FluidParams& params, SamplingMode mode);
Matrix total_acceleration(const ParticleSystem& ps, const KernelSpec& spec, const TargetModel& target,
                          const FluidParams& params, SamplingMode mode);

}  // namespace sphparvi
