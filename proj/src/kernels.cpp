#include "sphparvi/kernels.hpp"

#include <cmath>
#include <numbers>

namespace sphparvi {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this fraction of h the 1/r terms of the Viscosity kernel are clamped.
constexpr double kViscosityOrigin = 1e-12;

void check_spec(const KernelSpec& spec) {
    if (!(spec.h > 0.0) || !std::isfinite(spec.h))
        throw ConfigError("kernel: smoothing length h must be positive, got " + std::to_string(spec.h));
    if (spec.dim < 1 || spec.dim > 3)
        throw ConfigError("kernel: dim must be 1, 2 or 3, got " + std::to_string(spec.dim));
}

}  // namespace

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "poly6") return KernelKind::Poly6;
    if (name == "spiky") return KernelKind::Spiky;
    if (name == "viscosity") return KernelKind::Viscosity;
    if (name == "cubic_spline") return KernelKind::CubicSpline;
    throw ConfigError("kernel: unknown kind '" + std::string(name) +
                      "' (expected poly6, spiky, viscosity or cubic_spline)");
}

std::string to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::Poly6: return "poly6";
    case KernelKind::Spiky: return "spiky";
    case KernelKind::Viscosity: return "viscosity";
    case KernelKind::CubicSpline: return "cubic_spline";
    }
    return "unknown";
}

double KernelSpec::support() const {
    return kind == KernelKind::CubicSpline ? 2.0 * h : h;
}

double normalization_constant(KernelKind kind, int dim, double h) {
    check_spec(KernelSpec{kind, dim, h, 1.0});
    switch (kind) {
    case KernelKind::Poly6:
        if (dim == 1) return 35.0 / (32.0 * std::pow(h, 7));
        if (dim == 2) return 4.0 / (kPi * std::pow(h, 8));
        return 315.0 / (64.0 * kPi * std::pow(h, 9));
    case KernelKind::Spiky:
        if (dim == 1) return 2.0 / std::pow(h, 4);
        if (dim == 2) return 10.0 / (kPi * std::pow(h, 5));
        return 15.0 / (kPi * std::pow(h, 6));
    case KernelKind::Viscosity:
        // h/(2r) is not integrable on a line
        if (dim == 1) throw ConfigError("kernel: the viscosity kernel is not supported in 1 dimension");
        if (dim == 2) return 10.0 / (3.0 * kPi * h * h);
        return 15.0 / (2.0 * kPi * h * h * h);
    case KernelKind::CubicSpline:
        if (dim == 1) return 2.0 / (3.0 * h);
        if (dim == 2) return 10.0 / (7.0 * kPi * h * h);
        return 1.0 / (kPi * h * h * h);
    }
    throw ConfigError("kernel: unsupported kind");
}

KernelSpec make_kernel(KernelKind kind, int dim, double h) {
    return KernelSpec{kind, dim, h, normalization_constant(kind, dim, h)};
}

double kernel_value(const KernelSpec& s, double r) {
    check_spec(s);
    const double h = s.h;
    const double c = s.normalization;
    if (r >= s.support()) return 0.0;
    switch (s.kind) {
    case KernelKind::Poly6: {
        const double t = h * h - r * r;
        return c * t * t * t;
    }
    case KernelKind::Spiky: {
        const double t = h - r;
        return c * t * t * t;
    }
    case KernelKind::Viscosity: {
        if (r <= kViscosityOrigin * h) return 0.0;
        return c * (-r * r * r / (2.0 * h * h * h) + r * r / (h * h) + h / (2.0 * r) - 1.0);
    }
    case KernelKind::CubicSpline: {
        const double q = r / h;
        if (q <= 1.0) return c * (1.0 - 1.5 * q * q + 0.75 * q * q * q);
        const double t = 2.0 - q;
        return c * 0.25 * t * t * t;
    }
    }
    return 0.0;
}

double kernel_radial_derivative(const KernelSpec& s, double r) {
    check_spec(s);
    const double h = s.h;
    const double c = s.normalization;
    if (r >= s.support()) return 0.0;
    switch (s.kind) {
    case KernelKind::Poly6: {
        const double t = h * h - r * r;
        return -6.0 * c * r * t * t;
    }
    case KernelKind::Spiky: {
        const double t = h - r;
        return -3.0 * c * t * t;
    }
    case KernelKind::Viscosity: {
        if (r <= kViscosityOrigin * h) return 0.0;
        return c * (-1.5 * r * r / (h * h * h) + 2.0 * r / (h * h) - h / (2.0 * r * r));
    }
    case KernelKind::CubicSpline: {
        const double q = r / h;
        if (q <= 1.0) return c / h * (-3.0 * q + 2.25 * q * q);
        const double t = 2.0 - q;
        return -c / h * 0.75 * t * t;
    }
    }
    return 0.0;
}

double kernel_second_radial_derivative(const KernelSpec& s, double r) {
    check_spec(s);
    const double h = s.h;
    const double c = s.normalization;
    if (r >= s.support()) return 0.0;
    switch (s.kind) {
    case KernelKind::Poly6: {
        const double t = h * h - r * r;
        return c * (-6.0 * t * t + 24.0 * r * r * t);
    }
    case KernelKind::Spiky:
        return 6.0 * c * (h - r);
    case KernelKind::Viscosity: {
        if (r <= kViscosityOrigin * h) return 0.0;
        return c * (-3.0 * r / (h * h * h) + 2.0 / (h * h) + h / (r * r * r));
    }
    case KernelKind::CubicSpline: {
        const double q = r / h;
        if (q <= 1.0) return c / (h * h) * (-3.0 + 4.5 * q);
        return c / (h * h) * 1.5 * (2.0 - q);
    }
    }
    return 0.0;
}

double kernel_laplacian(const KernelSpec& s, double r) {
    check_spec(s);
    const double h = s.h;
    const double c = s.normalization;
    const double d = s.dim;
    if (r >= s.support()) return 0.0;
    switch (s.kind) {
    case KernelKind::Poly6: {
        // (dim-1)/r dK/dr = -6c(dim-1)(h^2-r^2)^2 has no singularity
        const double t = h * h - r * r;
        return c * (-6.0 * d * t * t + 24.0 * r * r * t);
    }
    case KernelKind::Spiky: {
        // dK/dr(0) != 0, so the (dim-1)/r term diverges at the origin; keep
        // only the finite second derivative there.
        if (s.dim == 1 || r == 0.0) return 6.0 * c * (h - r);
        const double t = h - r;
        return 6.0 * c * t - 3.0 * c * (d - 1.0) * t * t / r;
    }
    case KernelKind::Viscosity: {
        if (r <= kViscosityOrigin * h) return 0.0;
        return kernel_second_radial_derivative(s, r) + (d - 1.0) / r * kernel_radial_derivative(s, r);
    }
    case KernelKind::CubicSpline: {
        const double q = r / h;
        if (q <= 1.0) return c / (h * h) * (-3.0 * d + 4.5 * q + 2.25 * (d - 1.0) * q);
        const double t = 2.0 - q;
        return c / (h * h) * (1.5 * t - 0.75 * (d - 1.0) * t * t / q);
    }
    }
    return 0.0;
}

double kernel_grad_factor(const KernelSpec& spec, double r) {
    if (r == 0.0) return 0.0;
    return kernel_radial_derivative(spec, r) / r;
}

Vec kernel_grad(const KernelSpec& spec, std::span<const double> ri, std::span<const double> rj) {
    if (ri.size() != rj.size() || ri.size() != static_cast<std::size_t>(spec.dim))
        throw std::invalid_argument("kernel_grad: position length does not match kernel dimension");
    Vec diff(ri.size());
    double r2 = 0.0;
    for (std::size_t k = 0; k < ri.size(); ++k) {
        diff[k] = ri[k] - rj[k];
        r2 += diff[k] * diff[k];
    }
    const double f = kernel_grad_factor(spec, std::sqrt(r2));
    for (double& x : diff) x *= f;
    return diff;
}

}  // namespace sphparvi
