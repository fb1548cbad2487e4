#pragma once

#include "battsched/gmix.hpp"

namespace battsched {

// One hour of the interval strategy: the battery moves within
// [pb_lo, pb_hi] to keep the realized grid exchange at pg_des. The grid
// setpoint carries a sell/buy split so asymmetric prices can be applied.
struct DispatchPolicy {
    double pb_lo = 0.0;        // kW, lower battery bound
    double pb_hi = 0.0;        // kW, upper battery bound
    double pg_des = 0.0;       // kW, desired grid exchange
    double pg_des_sell = 0.0;  // kW, <= 0
    double pg_des_buy = 0.0;   // kW, >= 0

    // Complementary split: sell = min(pg_des, 0), buy = max(pg_des, 0).
    static DispatchPolicy from_setpoints(double pb_lo, double pb_hi, double pg_des);
    // Explicit split, e.g. a solver iterate under relaxed complementarity.
    static DispatchPolicy from_split(double pb_lo, double pb_hi, double sell, double buy);

    void validate() const;  // throws std::invalid_argument
};

// Probability of the battery sitting at pb_lo (p1) or pb_hi (p2).
struct BoundaryProbabilities {
    double p1 = 0.0;
    double p2 = 0.0;
};

// Expected grid power decomposed into export (<= 0) and import (>= 0).
struct ExpectedGridSplit {
    double exp_sell = 0.0;
    double exp_buy = 0.0;
};

struct Realization {
    double p_b = 0.0;  // kW
    double p_g = 0.0;  // kW
};

BoundaryProbabilities boundary_probabilities(const GaussianMixture2& f,
                                             const DispatchPolicy& pol);

// Expected clipped battery power; always inside [pb_lo, pb_hi].
double expected_battery_power(const GaussianMixture2& f, const DispatchPolicy& pol);

ExpectedGridSplit expected_grid_split(const GaussianMixture2& f,
                                      const DispatchPolicy& pol);

// Downstream rule for a realized net-load: the battery tracks pg_des as far
// as the interval allows, the grid takes the remainder. p_b + p_g == p_l.
Realization realize(const DispatchPolicy& pol, double p_l);

}  // namespace battsched
