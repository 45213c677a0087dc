#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sphparvi/cli.hpp"
#include "sphparvi/forces.hpp"
#include "sphparvi/kernels.hpp"

namespace sphparvi {

namespace {

constexpr KernelKind kKinds[] = {KernelKind::Poly6, KernelKind::Spiky, KernelKind::Viscosity, KernelKind::CubicSpline};

bool supported(KernelKind kind, int dim) { return !(kind == KernelKind::Viscosity && dim == 1); }

// Integral of K over its support via composite Simpson on the radial profile,
// weighted by the surface area of the unit sphere in `dim` dimensions.
double radial_integral(const KernelSpec& spec) {
    const double area = spec.dim == 1 ? 2.0 : spec.dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
    const int n = 200000;
    const double R = spec.support();
    const double step = R / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double r = k * step;
        const double f = kernel_value(spec, r) * std::pow(r, spec.dim - 1);
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += w * f;
    }
    return area * s * step / 3.0;
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

std::string kernel_label(KernelKind kind, int dim) { return to_string(kind) + " d=" + std::to_string(dim); }

}  // namespace

std::vector<SelftestResult> run_selftest() {
    std::vector<SelftestResult> results;
    std::mt19937_64 rng(20240611);

    for (KernelKind kind : kKinds)
        for (int dim = 1; dim <= 3; ++dim) {
            if (!supported(kind, dim)) continue;
            const KernelSpec spec = make_kernel(kind, dim, 0.7);
            const double integral = radial_integral(spec);
            results.push_back({"quadrature " + kernel_label(kind, dim), std::abs(integral - 1.0) < 1e-3,
                               "|integral - 1|=" + sci(std::abs(integral - 1.0))});
        }

    for (KernelKind kind : kKinds)
        for (int dim = 1; dim <= 3; ++dim) {
            if (!supported(kind, dim)) continue;
            const KernelSpec spec = make_kernel(kind, dim, 0.7);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            std::uniform_real_distribution<double> radius(0.02, 0.98);
            const double step = 1e-6 * spec.h;
            double worst = 0.0;
            for (int probe = 0; probe < 1000; ++probe) {
                Vec dir(static_cast<std::size_t>(dim));
                double norm = 0.0;
                do {
                    norm = 0.0;
                    for (double& x : dir) {
                        x = u(rng);
                        norm += x * x;
                    }
                } while (norm < 1e-4);
                const double r = radius(rng) * spec.support();
                Vec ri(static_cast<std::size_t>(dim));
                for (std::size_t k = 0; k < ri.size(); ++k) ri[k] = dir[k] / std::sqrt(norm) * r;
                const Vec rj(static_cast<std::size_t>(dim), 0.0);
                const Vec g = kernel_grad(spec, ri, rj);
                double err2 = 0.0, ref2 = 0.0;
                for (std::size_t k = 0; k < ri.size(); ++k) {
                    Vec p = ri, m = ri;
                    p[k] += step;
                    m[k] -= step;
                    auto len = [](const Vec& v) {
                        double s = 0.0;
                        for (double x : v) s += x * x;
                        return std::sqrt(s);
                    };
                    const double fd = (kernel_value(spec, len(p)) - kernel_value(spec, len(m))) / (2.0 * step);
                    err2 += (g[k] - fd) * (g[k] - fd);
                    ref2 += fd * fd;
                }
                const double scale = spec.normalization / spec.h;
                worst = std::max(worst, std::sqrt(err2) / std::max(std::sqrt(ref2), 1e-3 * scale));
            }
            results.push_back({"gradient " + kernel_label(kind, dim), worst < 1e-5, "max rel err=" + sci(worst)});
        }

    {
        std::uniform_int_distribution<int> pick_m(2, 12), pick_d(1, 3);
        std::uniform_real_distribution<double> u(-1.0, 1.0), mass(0.5, 2.0), pres(-3.0, 3.0), dens(0.5, 2.0);
        double worst = 0.0;
        for (int state = 0; state < 100; ++state) {
            const std::size_t m = static_cast<std::size_t>(pick_m(rng));
            const int d = pick_d(rng);
            Matrix pos(m, static_cast<std::size_t>(d));
            for (double& x : pos.data()) x = u(rng);
            Vec masses(m);
            for (double& x : masses) x = mass(rng);
            ParticleSystem ps = make_particles(pos, masses);
            for (double& x : ps.densities) x = dens(rng);
            Vec p(m);
            for (double& x : p) x = pres(rng);
            const Matrix a = pressure_force(ps, make_kernel(KernelKind::CubicSpline, d, 0.6), p);
            Vec total(static_cast<std::size_t>(d), 0.0);
            double scale = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double n2 = 0.0;
                for (std::size_t k = 0; k < total.size(); ++k) {
                    total[k] += masses[i] * a(i, k);
                    n2 += a(i, k) * a(i, k);
                }
                scale += masses[i] * std::sqrt(n2);
            }
            double t2 = 0.0;
            for (double x : total) t2 += x * x;
            if (scale > 0.0) worst = std::max(worst, std::sqrt(t2) / scale);
        }
        results.push_back({"momentum conservation", worst <= 1e-10, "max relative net force=" + sci(worst)});
    }
    return results;
}

}  // namespace sphparvi
