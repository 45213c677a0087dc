#include "sphparvi/forces.hpp"

#include <array>
#include <cmath>

#include "sphparvi/parallel.hpp"

namespace sphparvi {

namespace {

struct PairTerms {
    double r;
    double w;
    const double* grad;
};

// Distance, kernel value and kernel gradient for one ordered pair. The
// cache builder and the inline path both go through here.
PairTerms compute_pair(const KernelSpec& spec, std::span<const double> ri, std::span<const double> rj,
                       double* grad_out) {
    const std::size_t d = ri.size();
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        grad_out[k] = ri[k] - rj[k];
        r2 += grad_out[k] * grad_out[k];
    }
    const double r = std::sqrt(r2);
    const double f = kernel_grad_factor(spec, r);
    for (std::size_t k = 0; k < d; ++k) grad_out[k] *= f;
    return {r, kernel_value(spec, r), grad_out};
}

class CachedPairs {
public:
    explicit CachedPairs(const PairwiseCache& c) : c_(c) {}
    const KernelSpec& spec() const { return c_.spec; }
    PairTerms at(std::size_t i, std::size_t j, double*) const {
        return {c_.distance(i, j), c_.value(i, j), c_.grad(i, j).data()};
    }

private:
    const PairwiseCache& c_;
};

class InlinePairs {
public:
    InlinePairs(const ParticleSystem& ps, const KernelSpec& spec) : ps_(ps), spec_(spec) {}
    const KernelSpec& spec() const { return spec_; }
    PairTerms at(std::size_t i, std::size_t j, double* buf) const {
        return compute_pair(spec_, ps_.positions.row(i), ps_.positions.row(j), buf);
    }

private:
    const ParticleSystem& ps_;
    KernelSpec spec_;
};

void check_cache(const ParticleSystem& ps, const PairwiseCache& cache) {
    if (cache.m != ps.size() || cache.dim != ps.dim())
        throw std::invalid_argument("pairwise cache does not match the particle system");
}

template <typename Pairs>
Vec summation_density_impl(const ParticleSystem& ps, const Pairs& pairs, const FluidParams& params) {
    const std::size_t m = ps.size();
    Vec rho(m);
    parallel_for(m, [&](std::size_t i) {
        std::array<double, 3> buf{};
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += ps.masses[j] * pairs.at(i, j, buf.data()).w;
        rho[i] = std::max(s, params.rho_min);
    });
    return rho;
}

template <typename Pairs>
Vec continuity_rate_impl(const ParticleSystem& ps, const Pairs& pairs, const FluidParams& params) {
    const std::size_t m = ps.size();
    const std::size_t d = static_cast<std::size_t>(ps.dim());
    const double h = pairs.spec().h;
    const double diffusion = params.a_d * h * params.c0;
    Vec rate(m);
    parallel_for(m, [&](std::size_t i) {
        std::array<double, 3> buf{};
        const auto vi = ps.velocities.row(i);
        const auto ri = ps.positions.row(i);
        const double rho_i = ps.densities[i];
        double div = 0.0;
        double delta = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            const PairTerms t = pairs.at(i, j, buf.data());
            const auto vj = ps.velocities.row(j);
            const auto rj = ps.positions.row(j);
            double vdot = 0.0;
            double rdot = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                vdot += (vi[k] - vj[k]) * t.grad[k];
                rdot += (ri[k] - rj[k]) * t.grad[k];
            }
            div += ps.masses[j] * vdot;
            // psi_ij . grad K_ij with psi_ij = 2 (rho_j/rho_i - 1) r_ij / (|r_ij|^2 + 0.1 h^2)
            const double psi = 2.0 * (ps.densities[j] / rho_i - 1.0) / (t.r * t.r + 0.1 * h * h);
            delta += ps.masses[j] / ps.densities[j] * psi * rdot;
        }
        rate[i] = div + diffusion * delta;
    });
    return rate;
}

// Per-row kernels. The standalone operations and the fused total below both
// go through these, so a row's contribution is the same arithmetic either way.

template <typename Pairs>
void pressure_row(std::size_t i, const ParticleSystem& ps, const Pairs& pairs, const Vec& ratio, double* out) {
    const std::size_t m = ps.size();
    const std::size_t d = static_cast<std::size_t>(ps.dim());
    std::array<double, 3> buf{};
    std::array<double, 3> acc{};
    for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        const PairTerms t = pairs.at(i, j, buf.data());
        const double coef = ps.masses[j] * (ratio[i] + ratio[j]);
        for (std::size_t k = 0; k < d; ++k) acc[k] -= coef * t.grad[k];
    }
    for (std::size_t k = 0; k < d; ++k) out[k] = acc[k];
}

Vec pressure_ratios(const ParticleSystem& ps, std::span<const double> pressures) {
    if (pressures.size() != ps.size()) throw std::invalid_argument("pressure_force: one pressure per particle required");
    Vec ratio(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) ratio[i] = pressures[i] / (ps.densities[i] * ps.densities[i]);
    return ratio;
}

// Kernel whose Laplacian drives the Laplacian viscosity modes.
KernelSpec laplacian_spec(const KernelSpec& spec, const FluidParams& params) {
    return params.viscosity_kernel ? make_kernel(*params.viscosity_kernel, spec.dim, spec.h) : spec;
}

template <typename Pairs>
void viscous_row(std::size_t i, const ParticleSystem& ps, const Pairs& pairs, const FluidParams& params,
                 const KernelSpec& lap_spec, double* out) {
    const std::size_t m = ps.size();
    const std::size_t d = static_cast<std::size_t>(ps.dim());
    std::array<double, 3> buf{};
    std::array<double, 3> acc{};
    const auto vi = ps.velocities.row(i);

    if (params.viscosity_mode == ViscosityMode::LinearArtificial) {
        const double h = pairs.spec().h;
        const auto ri = ps.positions.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            const auto vj = ps.velocities.row(j);
            const auto rj = ps.positions.row(j);
            double vr = 0.0;
            for (std::size_t k = 0; k < d; ++k) vr += (vi[k] - vj[k]) * (ri[k] - rj[k]);
            if (!(vr < 0.0)) continue;  // only approaching pairs dissipate
            const PairTerms t = pairs.at(i, j, buf.data());
            const double eta = 2.0 * params.visc_alpha * h * params.c0 / (ps.densities[i] + ps.densities[j]);
            const double coef = ps.masses[j] * eta * vr / (t.r * t.r + params.eps_sing * h * h);
            for (std::size_t k = 0; k < d; ++k) acc[k] += coef * t.grad[k];
        }
        for (std::size_t k = 0; k < d; ++k) out[k] = acc[k];
        return;
    }

    const bool symmetric = params.viscosity_mode == ViscosityMode::LaplacianSymmetric;
    for (std::size_t j = 0; j < m; ++j) {
        if (symmetric && j == i) continue;
        const PairTerms t = pairs.at(i, j, buf.data());
        const double lap = kernel_laplacian(lap_spec, t.r);
        if (lap == 0.0) continue;
        const double coef = ps.masses[j] / ps.densities[j] * lap;
        const auto vj = ps.velocities.row(j);
        for (std::size_t k = 0; k < d; ++k) acc[k] += coef * (symmetric ? vj[k] - vi[k] : vj[k]);
    }
    const double nu = params.mu / ps.densities[i];
    for (std::size_t k = 0; k < d; ++k) out[k] = nu * acc[k];
}

template <typename Pairs>
void regularization_row(std::size_t i, const ParticleSystem& ps, const Pairs& pairs, const FluidParams& params,
                        double* out) {
    const std::size_t m = ps.size();
    const std::size_t d = static_cast<std::size_t>(ps.dim());
    std::array<double, 3> buf{};
    std::array<double, 3> acc{};
    for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        const PairTerms t = pairs.at(i, j, buf.data());
        for (std::size_t k = 0; k < d; ++k) acc[k] += ps.masses[j] * t.grad[k];
    }
    const double scale = -1.0 / (ps.densities[i] + params.eps_p);
    for (std::size_t k = 0; k < d; ++k) out[k] = scale * acc[k];
}

template <typename Pairs>
Matrix pressure_force_impl(const ParticleSystem& ps, const Pairs& pairs, std::span<const double> pressures) {
    const Vec ratio = pressure_ratios(ps, pressures);
    Matrix out(ps.size(), static_cast<std::size_t>(ps.dim()));
    parallel_for(ps.size(), [&](std::size_t i) { pressure_row(i, ps, pairs, ratio, out.row(i).data()); });
    return out;
}

template <typename Pairs>
Matrix viscous_force_impl(const ParticleSystem& ps, const Pairs& pairs, const FluidParams& params) {
    const KernelSpec lap_spec = laplacian_spec(pairs.spec(), params);
    Matrix out(ps.size(), static_cast<std::size_t>(ps.dim()));
    parallel_for(ps.size(), [&](std::size_t i) { viscous_row(i, ps, pairs, params, lap_spec, out.row(i).data()); });
    return out;
}

template <typename Pairs>
Matrix regularization_impl(const ParticleSystem& ps, const Pairs& pairs, const FluidParams& params) {
    Matrix out(ps.size(), static_cast<std::size_t>(ps.dim()));
    parallel_for(ps.size(), [&](std::size_t i) { regularization_row(i, ps, pairs, params, out.row(i).data()); });
    return out;
}

// One sweep per particle row keeps that row's pairwise terms in cache for all
// three pairwise terms. Summed as ((pressure + viscous) + external) + regularization.
template <typename Pairs>
Matrix total_acceleration_impl(const ParticleSystem& ps, const Pairs& pairs, const TargetModel& target,
                               const FluidParams& params, SamplingMode mode) {
    const std::size_t m = ps.size();
    const std::size_t d = static_cast<std::size_t>(ps.dim());
    Vec pressures(m);
    for (std::size_t i = 0; i < m; ++i)
        pressures[i] = params.internal_pressure_weight * eos_pressure(ps.densities[i], params);
    if (mode == SamplingMode::ExternalPressure) {
        for (std::size_t i = 0; i < m; ++i)
            pressures[i] += external_pressure(target, ps.positions.row(i), params, params.external_pressure);
    }
    const Vec ratio = pressure_ratios(ps, pressures);
    const KernelSpec lap_spec = laplacian_spec(pairs.spec(), params);
    Matrix acc = external_force(ps, target, params, mode);
    parallel_for(m, [&](std::size_t i) {
        std::array<double, 3> p{}, v{}, g{};
        pressure_row(i, ps, pairs, ratio, p.data());
        viscous_row(i, ps, pairs, params, lap_spec, v.data());
        if (params.regularization) regularization_row(i, ps, pairs, params, g.data());
        for (std::size_t k = 0; k < d; ++k) {
            double a = p[k] + v[k];
            a += acc(i, k);
            if (params.regularization) a += g[k];
            acc(i, k) = a;
        }
    });
    return acc;
}
}  // namespace

ViscosityMode parse_viscosity_mode(std::string_view s) {
    if (s == "laplacian_kernel") return ViscosityMode::LaplacianKernel;
    if (s == "laplacian_symmetric") return ViscosityMode::LaplacianSymmetric;
    if (s == "linear_artificial") return ViscosityMode::LinearArtificial;
    throw ConfigError("fluid.viscosity_mode: unknown value '" + std::string(s) + "'");
}

ExternalPressureVariant parse_external_pressure(std::string_view s) {
    if (s == "reciprocal") return ExternalPressureVariant::Reciprocal;
    if (s == "neg_log") return ExternalPressureVariant::NegLog;
    throw ConfigError("fluid.external_pressure: unknown value '" + std::string(s) + "'");
}

ExternalForceVariant parse_external_force(std::string_view s) {
    if (s == "score") return ExternalForceVariant::Score;
    if (s == "density_gradient") return ExternalForceVariant::DensityGradient;
    throw ConfigError("fluid.external_force: unknown value '" + std::string(s) + "'");
}

DensityMode parse_density_mode(std::string_view s) {
    if (s == "summation") return DensityMode::Summation;
    if (s == "continuity") return DensityMode::Continuity;
    throw ConfigError("fluid.density_mode: unknown value '" + std::string(s) + "'");
}

SamplingMode parse_sampling_mode(std::string_view s) {
    if (s == "external_pressure") return SamplingMode::ExternalPressure;
    if (s == "external_force") return SamplingMode::ExternalForce;
    throw ConfigError("mode: unknown value '" + std::string(s) + "'");
}

std::string to_string(ViscosityMode m) {
    switch (m) {
    case ViscosityMode::LaplacianKernel: return "laplacian_kernel";
    case ViscosityMode::LaplacianSymmetric: return "laplacian_symmetric";
    case ViscosityMode::LinearArtificial: return "linear_artificial";
    }
    return "";
}

std::string to_string(ExternalPressureVariant v) {
    return v == ExternalPressureVariant::Reciprocal ? "reciprocal" : "neg_log";
}

std::string to_string(ExternalForceVariant v) {
    return v == ExternalForceVariant::Score ? "score" : "density_gradient";
}

std::string to_string(DensityMode m) { return m == DensityMode::Summation ? "summation" : "continuity"; }

std::string to_string(SamplingMode m) {
    return m == SamplingMode::ExternalPressure ? "external_pressure" : "external_force";
}

void ParticleSystem::check_shape() const {
    const std::size_t m = positions.rows();
    if (velocities.rows() != m || densities.size() != m || masses.size() != m)
        throw std::invalid_argument("particle system arrays disagree on particle count");
    if (velocities.cols() != positions.cols())
        throw std::invalid_argument("positions and velocities disagree on dimension");
}

std::optional<std::size_t> ParticleSystem::first_nonfinite() const {
    const std::size_t d = positions.cols();
    for (std::size_t i = 0; i < size(); ++i) {
        if (!std::isfinite(densities[i]) || !std::isfinite(masses[i])) return i;
        for (std::size_t k = 0; k < d; ++k)
            if (!std::isfinite(positions(i, k)) || !std::isfinite(velocities(i, k))) return i;
    }
    return std::nullopt;
}

ParticleSystem make_particles(const Matrix& positions, const Vec& masses) {
    ParticleSystem ps;
    ps.positions = positions;
    ps.velocities = Matrix(positions.rows(), positions.cols());
    ps.densities = Vec(positions.rows(), 1.0);
    ps.masses = masses;
    ps.check_shape();
    return ps;
}

void FluidParams::validate(int dim) const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("fluid.") + key + " must be positive");
    };
    auto nonneg = [](double v, const char* key) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string("fluid.") + key + " must be >= 0");
    };
    positive(c0, "c0");
    positive(rho0, "rho0");
    positive(gamma, "gamma");
    nonneg(mu, "mu");
    if (!(visc_alpha >= 0.08 && visc_alpha <= 0.5)) throw ConfigError("fluid.visc_alpha must lie in [0.08, 0.5]");
    nonneg(a_d, "a_d");
    positive(alpha_scale, "alpha_scale");
    positive(eps_p, "eps_p");
    if (!(eps_sing > 0.0 && eps_sing < 1.0)) throw ConfigError("fluid.eps_sing must lie in (0, 1)");
    positive(rho_min, "rho_min");
    nonneg(internal_pressure_weight, "internal_pressure_weight");
    if (!std::isfinite(log_shift)) throw ConfigError("fluid.log_shift must be finite");
    if (!gravity.empty() && gravity.size() != static_cast<std::size_t>(dim))
        throw ConfigError("fluid.gravity must have one entry per dimension");
    if (viscosity_kernel && dim == 1 && *viscosity_kernel == KernelKind::Viscosity)
        throw ConfigError("fluid.viscosity_kernel: the viscosity kernel is not supported in 1 dimension");
}

void rebuild_cache(const ParticleSystem& ps, const KernelSpec& spec, PairwiseCache& c) {
    const std::size_t m = ps.size();
    const std::size_t d = static_cast<std::size_t>(ps.dim());
    if (ps.dim() != spec.dim) throw std::invalid_argument("build_cache: kernel dimension does not match particles");
    c.spec = spec;
    c.m = m;
    c.dim = ps.dim();
    // every entry is overwritten below, so existing storage is reused as is
    c.distances.resize(m * m);
    c.kernel_values.resize(m * m);
    c.kernel_grads.resize(m * m * d);
    // Only j >= i is evaluated; (j, i) is its exact mirror since (a - b)^2 ==
    // (b - a)^2 and the gradient flips sign. Tiles keep the mirrored writes
    // local, and each tile pair belongs to one worker.
    constexpr std::size_t kTile = 64;
    const std::size_t tiles = (m + kTile - 1) / kTile;
    parallel_for(tiles, [&](std::size_t bi) {
        const std::size_t i0 = bi * kTile, i1 = std::min(m, i0 + kTile);
        for (std::size_t bj = bi; bj < tiles; ++bj) {
            const std::size_t j0 = bj * kTile, j1 = std::min(m, j0 + kTile);
            for (std::size_t i = i0; i < i1; ++i) {
                const auto ri = ps.positions.row(i);
                for (std::size_t j = std::max(i, j0); j < j1; ++j) {
                    double* g = c.kernel_grads.data() + (i * m + j) * d;
                    const PairTerms t = compute_pair(spec, ri, ps.positions.row(j), g);
                    c.distances[i * m + j] = t.r;
                    c.kernel_values[i * m + j] = t.w;
                    double* gm = c.kernel_grads.data() + (j * m + i) * d;
                    for (std::size_t k = 0; k < d; ++k) gm[k] = -g[k];
                    c.distances[j * m + i] = t.r;
                    c.kernel_values[j * m + i] = t.w;
                }
            }
        }
    });
}

PairwiseCache build_cache(const ParticleSystem& ps, const KernelSpec& spec) {
    PairwiseCache c;
    rebuild_cache(ps, spec, c);
    return c;
}

Vec summation_density(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params) {
    check_cache(ps, cache);
    return summation_density_impl(ps, CachedPairs(cache), params);
}

Vec summation_density(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params) {
    return summation_density_impl(ps, InlinePairs(ps, spec), params);
}

Vec continuity_density_rate(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params) {
    check_cache(ps, cache);
    return continuity_rate_impl(ps, CachedPairs(cache), params);
}

Vec continuity_density_rate(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params) {
    return continuity_rate_impl(ps, InlinePairs(ps, spec), params);
}

double eos_pressure(double rho, const FluidParams& p) {
    const double scale = p.c0 * p.c0 * p.rho0 / p.gamma;
    if (p.gamma == 1.0) return scale * (rho / p.rho0 - 1.0);
    return scale * (std::pow(rho / p.rho0, p.gamma) - 1.0);
}

double external_pressure(const TargetModel& target, std::span<const double> r, const FluidParams& params,
                         ExternalPressureVariant variant) {
    const double p = query_density(target, r, params.log_shift, params.eps_p);
    if (variant == ExternalPressureVariant::Reciprocal)
        return 1.0 / (params.alpha_scale * std::max(p, params.eps_p));
    return -params.alpha_scale * std::log(p + params.eps_p);
}

Matrix pressure_force(const ParticleSystem& ps, const PairwiseCache& cache, std::span<const double> pressures) {
    check_cache(ps, cache);
    return pressure_force_impl(ps, CachedPairs(cache), pressures);
}

Matrix pressure_force(const ParticleSystem& ps, const KernelSpec& spec, std::span<const double> pressures) {
    return pressure_force_impl(ps, InlinePairs(ps, spec), pressures);
}

Matrix viscous_force(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params) {
    check_cache(ps, cache);
    return viscous_force_impl(ps, CachedPairs(cache), params);
}

Matrix viscous_force(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params) {
    return viscous_force_impl(ps, InlinePairs(ps, spec), params);
}

Matrix regularization_force(const ParticleSystem& ps, const PairwiseCache& cache, const FluidParams& params) {
    check_cache(ps, cache);
    return regularization_impl(ps, CachedPairs(cache), params);
}

Matrix regularization_force(const ParticleSystem& ps, const KernelSpec& spec, const FluidParams& params) {
    return regularization_impl(ps, InlinePairs(ps, spec), params);
}

Matrix external_force(const ParticleSystem& ps, const TargetModel& target, const FluidParams& params,
                      SamplingMode mode) {
    const std::size_t m = ps.size();
    const std::size_t d = static_cast<std::size_t>(ps.dim());
    Matrix out(m, d);
    if (mode == SamplingMode::ExternalForce) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto r = ps.positions.row(i);
            const Vec s = query_score(target, r);
            double scale = params.alpha_scale;
            if (params.external_force == ExternalForceVariant::DensityGradient)
                scale *= query_density(target, r, params.log_shift, params.eps_p);
            for (std::size_t k = 0; k < d; ++k) out(i, k) = scale * s[k];
        }
    }
    if (!params.gravity.empty()) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < d; ++k) out(i, k) += params.gravity[k];
    }
    return out;
}

Matrix total_acceleration(const ParticleSystem& ps, const PairwiseCache& cache, const TargetModel& target,
                          const FluidParams& params, SamplingMode mode) {
    check_cache(ps, cache);
    return total_acceleration_impl(ps, CachedPairs(cache), target, params, mode);
}

Matrix total_acceleration(const ParticleSystem& ps, const KernelSpec& spec, const TargetModel& target,
                          const FluidParams& params, SamplingMode mode) {
    return total_acceleration_impl(ps, InlinePairs(ps, spec), target, params, mode);
}

}  // namespace sphparvi
