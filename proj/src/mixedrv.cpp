#include "battsched/mixedrv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace battsched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DispatchPolicy DispatchPolicy::from_setpoints(double pb_lo, double pb_hi, double pg_des) {
    DispatchPolicy pol;
    pol.pb_lo = pb_lo;
    pol.pb_hi = pb_hi;
    pol.pg_des = pg_des;
    pol.pg_des_sell = std::min(pg_des, 0.0);
    pol.pg_des_buy = std::max(pg_des, 0.0);
    pol.validate();
    return pol;
}

DispatchPolicy DispatchPolicy::from_split(double pb_lo, double pb_hi, double sell, double buy) {
    DispatchPolicy pol;
    pol.pb_lo = pb_lo;
    pol.pb_hi = pb_hi;
    pol.pg_des = sell + buy;
    pol.pg_des_sell = sell;
    pol.pg_des_buy = buy;
    pol.validate();
    return pol;
}

void DispatchPolicy::validate() const {
    if (!(pb_lo <= pb_hi))
        throw std::invalid_argument("DispatchPolicy: pb_lo must be <= pb_hi");
    if (!(pg_des_sell <= 0.0 && pg_des_buy >= 0.0))
        throw std::invalid_argument("DispatchPolicy: sell/buy split signs violated");
    if (std::abs(pg_des - (pg_des_sell + pg_des_buy)) > 1e-9)
        throw std::invalid_argument("DispatchPolicy: pg_des != pg_des_sell + pg_des_buy");
    if (pg_des_sell * pg_des_buy < -1e-8)
        throw std::invalid_argument("DispatchPolicy: sell/buy complementarity violated");
}

BoundaryProbabilities boundary_probabilities(const GaussianMixture2& f,
                                             const DispatchPolicy& pol) {
    BoundaryProbabilities bp;
    bp.p1 = f.cdf(pol.pb_lo + pol.pg_des);
    bp.p2 = 1.0 - f.cdf(pol.pb_hi + pol.pg_des);
    return bp;
}

double expected_battery_power(const GaussianMixture2& f, const DispatchPolicy& pol) {
    const auto bp = boundary_probabilities(f, pol);
    const double interior = f.partial_expectation(pol.pb_lo, pol.pb_hi, pol.pg_des);
    const double e = bp.p1 * pol.pb_lo + interior + bp.p2 * pol.pb_hi;
    return std::clamp(e, pol.pb_lo, pol.pb_hi);
}

ExpectedGridSplit expected_grid_split(const GaussianMixture2& f,
                                      const DispatchPolicy& pol) {
    const auto bp = boundary_probabilities(f, pol);
    const double interior_mass = 1.0 - bp.p1 - bp.p2;
    const double s = pol.pg_des_sell;
    const double b = pol.pg_des_buy;

    ExpectedGridSplit g;
    g.exp_sell = f.partial_expectation(-kInf, s, pol.pb_lo) + interior_mass * s +
                 f.partial_expectation(s, 0.0, pol.pb_hi);
    g.exp_buy = f.partial_expectation(0.0, b, pol.pb_lo) + interior_mass * b +
                f.partial_expectation(b, kInf, pol.pb_hi);
    g.exp_sell = std::min(g.exp_sell, 0.0);
    g.exp_buy = std::max(g.exp_buy, 0.0);
    return g;
}

Realization realize(const DispatchPolicy& pol, double p_l) {
    Realization r;
    r.p_b = std::clamp(p_l - pol.pg_des, pol.pb_lo, pol.pb_hi);
    r.p_g = p_l - r.p_b;
    return r;
}

}  // namespace battsched
