#include "sphparvi/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace sphparvi {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

void check_component(const GaussianComponent& c, std::size_t dim) {
    if (c.mean.empty()) throw ConfigError("target: mean must not be empty");
    if (c.mean.size() != c.var.size())
        throw ConfigError("target: mean and var lengths differ");
    if (c.mean.size() != dim) throw ConfigError("target: components disagree on dimension");
    for (double v : c.var)
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError("target: variances must be positive, got " + std::to_string(v));
    if (!(c.weight > 0.0) || !std::isfinite(c.weight))
        throw ConfigError("target: component weights must be positive");
}

// log N(x; mean, var) + (d/2) log(2 pi): the normal density without the 2 pi factor.
double component_log_term(const GaussianComponent& c, std::span<const double> x) {
    double q = 0.0;
    double logdet = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - c.mean[k];
        q += dx * dx / c.var[k];
        logdet += std::log(c.var[k]);
    }
    return -0.5 * q - 0.5 * logdet;
}

std::vector<MarginalCdf> marginals_of(const std::vector<GaussianComponent>& comps) {
    const std::size_t dim = comps.front().mean.size();
    std::vector<MarginalCdf> out;
    for (std::size_t k = 0; k < dim; ++k) {
        std::vector<double> w, m, s;
        for (const auto& c : comps) {
            w.push_back(c.weight);
            m.push_back(c.mean[k]);
            s.push_back(std::sqrt(c.var[k]));
        }
        out.emplace_back(w, m, s);
    }
    return out;
}

}  // namespace

int TargetSpec::dim() const {
    return components.empty() ? 0 : static_cast<int>(components.front().mean.size());
}

MarginalCdf::MarginalCdf(std::vector<double> weights, std::vector<double> means, std::vector<double> sds)
    : weights_(std::move(weights)), means_(std::move(means)), sds_(std::move(sds)) {
    double total = 0.0;
    for (double w : weights_) total += w;
    for (double& w : weights_) w /= total;
}

double MarginalCdf::cdf(double x) const {
    double out = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k)
        out += weights_[k] * std_normal_cdf((x - means_[k]) / sds_[k]);
    return out;
}

double MarginalCdf::pdf(double x) const {
    double out = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k)
        out += weights_[k] * std_normal_pdf((x - means_[k]) / sds_[k]) / sds_[k];
    return out;
}

// d/dx [z Phi(z) + phi(z)] = Phi(z); scaled by sd for each component.
double MarginalCdf::antiderivative(double x) const {
    double out = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double z = (x - means_[k]) / sds_[k];
        out += weights_[k] * sds_[k] * (z * std_normal_cdf(z) + std_normal_pdf(z));
    }
    return out;
}

double MarginalCdf::integral(double a, double b) const {
    if (std::isinf(a) && a < 0) return antiderivative(b);
    return antiderivative(b) - antiderivative(a);
}

double MarginalCdf::upper_tail_integral(double a) const {
    // int_a^inf (1 - Phi(z)) = sd * (phi(z) - z (1 - Phi(z)))
    double out = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double z = (a - means_[k]) / sds_[k];
        out += weights_[k] * sds_[k] * (std_normal_pdf(z) - z * std_normal_cdf(-z));
    }
    return out;
}

double MarginalCdf::quantile(double p) const {
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (std::size_t k = 0; k < means_.size(); ++k) {
        lo = std::min(lo, means_[k] - 40.0 * sds_[k]);
        hi = std::max(hi, means_[k] + 40.0 * sds_[k]);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (cdf(mid) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

TargetModel gaussian_target(const Vec& mean, const Vec& diag_cov) {
    GaussianComponent c{1.0, mean, diag_cov};
    check_component(c, mean.size());

    TargetModel t;
    t.dim = static_cast<int>(mean.size());
    t.log_density = [c](std::span<const double> x) { return component_log_term(c, x); };
    t.score = [c](std::span<const double> x) {
        Vec s(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) s[k] = -(x[k] - c.mean[k]) / c.var[k];
        return s;
    };
    t.description = "gaussian";
    t.marginals = marginals_of({c});
    t.components = std::vector<GaussianComponent>{c};
    return t;
}

TargetModel mixture_target(const std::vector<GaussianComponent>& components) {
    if (components.empty()) throw ConfigError("target: mixture needs at least one component");
    const std::size_t dim = components.front().mean.size();
    for (const auto& c : components) check_component(c, dim);

    std::vector<double> log_w;
    for (const auto& c : components) log_w.push_back(std::log(c.weight));

    TargetModel t;
    t.dim = static_cast<int>(dim);
    t.log_density = [components, log_w](std::span<const double> x) {
        double top = -std::numeric_limits<double>::infinity();
        std::vector<double> terms(components.size());
        for (std::size_t k = 0; k < components.size(); ++k) {
            terms[k] = log_w[k] + component_log_term(components[k], x);
            top = std::max(top, terms[k]);
        }
        double sum = 0.0;
        for (double v : terms) sum += std::exp(v - top);
        return top + std::log(sum);
    };
    t.score = [components, log_w](std::span<const double> x) {
        std::vector<double> terms(components.size());
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < components.size(); ++k) {
            terms[k] = log_w[k] + component_log_term(components[k], x);
            top = std::max(top, terms[k]);
        }
        double norm = 0.0;
        for (double& v : terms) {
            v = std::exp(v - top);
            norm += v;
        }
        Vec s(x.size(), 0.0);
        for (std::size_t k = 0; k < components.size(); ++k) {
            const double resp = terms[k] / norm;
            for (std::size_t j = 0; j < x.size(); ++j)
                s[j] -= resp * (x[j] - components[k].mean[j]) / components[k].var[j];
        }
        return s;
    };
    t.description = "mixture(" + std::to_string(components.size()) + ")";
    t.marginals = marginals_of(components);
    t.components = components;
    return t;
}

TargetModel make_target(const TargetSpec& spec) {
    if (spec.components.empty()) throw ConfigError("target: no components");
    if (spec.type == TargetSpec::Type::Gaussian)
        return gaussian_target(spec.components.front().mean, spec.components.front().var);
    return mixture_target(spec.components);
}

double query_density(const TargetModel& target, std::span<const double> r, double log_shift, double eps_p) {
    if (!target.has_density())
        throw CapabilityError("target '" + target.description + "' has no log_density (needed for density queries)");
    return std::max(std::exp(target.log_density(r) - log_shift), eps_p);
}

Vec query_score(const TargetModel& target, std::span<const double> r) {
    if (!target.has_score())
        throw CapabilityError("target '" + target.description + "' has no score (needed for score queries)");
    return target.score(r);
}

double score_consistency_error(const TargetModel& target, int probes, unsigned long long seed, double spread) {
    if (!target.has_density() || !target.has_score())
        throw CapabilityError("score_consistency_error needs both log_density and score");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, spread);
    const std::size_t d = static_cast<std::size_t>(target.dim);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        Vec x(d);
        for (double& v : x) v = normal(rng);
        const Vec s = target.score(x);
        double scale = 0.0;
        for (double v : s) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < d; ++k) {
            const double step = 1e-5 * (1.0 + std::abs(x[k]));
            Vec xp = x, xm = x;
            xp[k] += step;
            xm[k] -= step;
            const double fd = (target.log_density(xp) - target.log_density(xm)) / (2.0 * step);
            // components of a near-zero score are compared against the vector's scale
            const double denom = std::max({std::abs(s[k]), 1e-3 * scale, 1e-8});
            worst = std::max(worst, std::abs(fd - s[k]) / denom);
        }
    }
    return worst;
}

}  // namespace sphparvi
