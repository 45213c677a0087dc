#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sphparvi/common.hpp"

namespace sphparvi {

struct GaussianComponent {
    double weight = 1.0;
    Vec mean;
    Vec var;  // diagonal covariance

    bool operator==(const GaussianComponent&) const = default;
};

/// Serializable description of a built-in target.
struct TargetSpec {
    enum class Type { Gaussian, Mixture };
    Type type = Type::Gaussian;
    std::vector<GaussianComponent> components;

    int dim() const;
    bool operator==(const TargetSpec&) const = default;
};

/// 1D mixture of normals: the per-dimension marginal of a built-in target.
/// Provides the CDF, its antiderivative (for exact W1 integrals) and the
/// quantile function.
class MarginalCdf {
public:
    MarginalCdf(std::vector<double> weights, std::vector<double> means, std::vector<double> sds);

    double cdf(double x) const;
    double pdf(double x) const;
    /// Integral of cdf over [a, b]; a may be -inf.
    double integral(double a, double b) const;
    /// Integral of (1 - cdf) over [a, +inf).
    double upper_tail_integral(double a) const;
    double quantile(double p) const;

private:
    double antiderivative(double x) const;

    std::vector<double> weights_;  // normalized
    std::vector<double> means_;
    std::vector<double> sds_;
};

/// Queryable target p(r), known up to a constant.
///
/// Either capability may be absent; callers query through query_density()
/// and query_score(), which raise CapabilityError on a missing one.
struct TargetModel {
    using LogDensityFn = std::function<double(std::span<const double>)>;
    using ScoreFn = std::function<Vec(std::span<const double>)>;

    int dim = 1;
    LogDensityFn log_density;
    ScoreFn score;
    std::string description;

    /// Analytic per-dimension marginals (built-in targets only).
    std::vector<MarginalCdf> marginals;
    /// Component list when the target is a Gaussian mixture.
    std::optional<std::vector<GaussianComponent>> components;

    bool has_density() const { return static_cast<bool>(log_density); }
    bool has_score() const { return static_cast<bool>(score); }
};

TargetModel gaussian_target(const Vec& mean, const Vec& diag_cov);
TargetModel mixture_target(const std::vector<GaussianComponent>& components);
TargetModel make_target(const TargetSpec& spec);

/// exp(log p(r) - log_shift), floored at eps_p.
double query_density(const TargetModel& target, std::span<const double> r,
                     double log_shift = 0.0, double eps_p = 1e-12);
Vec query_score(const TargetModel& target, std::span<const double> r);

/// Largest relative error between the stored score and a central finite
/// difference of log_density over `probes` random points drawn around the
/// origin with the given spread. Requires both capabilities.
double score_consistency_error(const TargetModel& target, int probes, unsigned long long seed,
                               double spread = 2.0);

}  // namespace sphparvi
