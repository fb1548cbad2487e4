#include "battsched/gmix.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace battsched {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
constexpr double kInvSqrt2 = 0.70710678118654752440;    // 1/sqrt(2)

double component_pdf(const GaussianComponent& c, double z) {
    if (std::isinf(z)) return 0.0;
    const double t = (z - c.mean) / c.stdev;
    return kInvSqrt2Pi / c.stdev * std::exp(-0.5 * t * t);
}

double component_cdf(const GaussianComponent& c, double z) {
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    return normal_cdf((z - c.mean) / c.stdev);
}

}  // namespace

double normal_pdf(double z) {
    if (std::isinf(z)) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must be in (0,1)");

    // Acklam's rational approximation, then one Newton step on the cdf.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Newton polish (cdf is exact to ~1 ulp via erfc).
    const double e = normal_cdf(x) - p;
    const double f = normal_pdf(x);
    if (f > 0.0) x -= e / f;
    return x;
}

GaussianMixture2::GaussianMixture2(GaussianComponent c0, GaussianComponent c1)
    : comps_{c0, c1} {
    for (const auto& c : comps_) {
        if (!(c.stdev > 0.0) || !std::isfinite(c.stdev))
            throw std::invalid_argument("GaussianMixture2: stdev must be > 0");
        if (!(c.weight >= 0.0 && c.weight <= 1.0))
            throw std::invalid_argument("GaussianMixture2: weight must be in [0,1]");
        if (!std::isfinite(c.mean))
            throw std::invalid_argument("GaussianMixture2: mean must be finite");
    }
    const double wsum = comps_[0].weight + comps_[1].weight;
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("GaussianMixture2: weights must sum to 1, got " +
                                    std::to_string(wsum));
}

GaussianMixture2 GaussianMixture2::single(double mean, double stdev) {
    return GaussianMixture2({1.0, mean, stdev}, {0.0, mean, stdev});
}

double GaussianMixture2::pdf(double z) const {
    return comps_[0].weight * component_pdf(comps_[0], z) +
           comps_[1].weight * component_pdf(comps_[1], z);
}

double GaussianMixture2::cdf(double z) const {
    return comps_[0].weight * component_cdf(comps_[0], z) +
           comps_[1].weight * component_cdf(comps_[1], z);
}

double GaussianMixture2::mean() const {
    return comps_[0].weight * comps_[0].mean + comps_[1].weight * comps_[1].mean;
}

double GaussianMixture2::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("GaussianMixture2::quantile: p must be in (0,1)");

    // Component quantiles bracket the mixture quantile.
    const double zp = normal_quantile(p);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : comps_) {
        const double q = c.mean + c.stdev * zp;
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    if (lo == hi) return lo;

    // Safeguarded Newton: bisect whenever the Newton step leaves [lo, hi].
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double err = cdf(x) - p;
        if (std::abs(err) < 1e-14) break;
        if (err > 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo < 1e-15 * (1.0 + std::abs(x))) break;
        const double deriv = pdf(x);
        double next = (deriv > 0.0) ? x - err / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

double GaussianMixture2::partial_expectation(double a, double b, double shift) const {
    if (std::isnan(a) || std::isnan(b) || a > b)
        throw std::domain_error("partial_expectation: requires a <= b");
    if (a == b) return 0.0;

    double total = 0.0;
    for (const auto& c : comps_) {
        if (c.weight == 0.0) continue;
        const double mu = c.mean - shift;  // mean of the shifted component
        const double alpha = std::isinf(a) ? a : (a - mu) / c.stdev;
        const double beta = std::isinf(b) ? b : (b - mu) / c.stdev;
        const double dphi = normal_pdf(beta) - normal_pdf(alpha);
        const double dPhi = normal_cdf(beta) - normal_cdf(alpha);
        total += c.weight * (mu * dPhi - c.stdev * dphi);
    }
    return total;
}

double GaussianMixture2::mass(double a, double b, double shift) const {
    if (std::isnan(a) || std::isnan(b) || a > b)
        throw std::domain_error("mass: requires a <= b");
    const double upper = std::isinf(b) ? (b > 0 ? 1.0 : 0.0) : cdf(b + shift);
    const double lower = std::isinf(a) ? (a > 0 ? 1.0 : 0.0) : cdf(a + shift);
    return upper - lower;
}

}  // namespace battsched
