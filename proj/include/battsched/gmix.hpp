#pragma once

#include <array>

namespace battsched {

// Standard normal density and distribution function. Both accept +/-inf.
double normal_pdf(double z);
double normal_cdf(double z);
// Inverse of normal_cdf on (0,1); rational approximation polished by Newton.
double normal_quantile(double p);

// One normal component of a two-part mixture. Powers in kW.
struct GaussianComponent {
    double weight;  // in [0,1]
    double mean;    // kW
    double stdev;   // kW, > 0
};

// Two-component normal mixture used as the hourly net-load uncertainty model.
// Interval endpoints passed to mass()/partial_expectation() may be
// +/-infinity; the tail terms are then resolved in closed form.
class GaussianMixture2 {
public:
    GaussianMixture2(GaussianComponent c0, GaussianComponent c1);

    // Degenerates the second component to weight zero.
    static GaussianMixture2 single(double mean, double stdev);

    const GaussianComponent& component(int i) const { return comps_[i]; }

    double pdf(double z) const;
    double cdf(double z) const;

    // Smallest z with cdf(z) = p, for p in (0,1). Bracketed Newton.
    double quantile(double p) const;

    // E[Z] of the mixture itself.
    double mean() const;

    // integral_a^b z * pdf(z + shift) dz, a <= b (either may be +/-inf)
    double partial_expectation(double a, double b, double shift = 0.0) const;

    // integral_a^b pdf(z + shift) dz = cdf(b + shift) - cdf(a + shift)
    double mass(double a, double b, double shift = 0.0) const;

private:
    std::array<GaussianComponent, 2> comps_;
};

}  // namespace battsched
