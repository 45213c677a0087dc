#pragma once

#include <span>
#include <string>
#include <string_view>

#include "sphparvi/common.hpp"

namespace sphparvi {

enum class KernelKind { Poly6, Spiky, Viscosity, CubicSpline };

/// Parses "poly6" | "spiky" | "viscosity" | "cubic_spline".
KernelKind parse_kernel_kind(std::string_view name);
std::string to_string(KernelKind kind);

/// Smoothing kernel with its dimension and smoothing length fixed.
///
/// Radial kernels are isotropic: K depends only on r = |r_i - r_j|. The
/// support radius is h for Poly6, Spiky and Viscosity and 2h for the cubic
/// spline. Build instances with make_kernel(), which validates and fills in
/// the normalization constant.
struct KernelSpec {
    KernelKind kind = KernelKind::CubicSpline;
    int dim = 1;
    double h = 1.0;
    double normalization = 0.0;

    double support() const;
};

/// Closed-form constant making the kernel integrate to one over its support
/// in `dim` dimensions. The Viscosity kernel has no finite integral in 1D.
double normalization_constant(KernelKind kind, int dim, double h);

KernelSpec make_kernel(KernelKind kind, int dim, double h);

double kernel_value(const KernelSpec& spec, double r);
double kernel_radial_derivative(const KernelSpec& spec, double r);
double kernel_second_radial_derivative(const KernelSpec& spec, double r);

/// Radial Laplacian d2K/dr2 + (dim-1)/r dK/dr; the analytic limit at r = 0.
double kernel_laplacian(const KernelSpec& spec, double r);

/// (dK/dr) / r, the factor multiplying (r_i - r_j) in the gradient.
/// Zero at r = 0.
double kernel_grad_factor(const KernelSpec& spec, double r);

/// Gradient with respect to r_i: dK/dr * (r_i - r_j) / r. The zero vector
/// when the points coincide.
Vec kernel_grad(const KernelSpec& spec, std::span<const double> ri, std::span<const double> rj);

}  // namespace sphparvi
