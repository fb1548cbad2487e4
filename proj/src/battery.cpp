#include "battsched/battery.hpp"

#include <algorithm>
#include <cmath>

namespace battsched {

namespace {
constexpr double kSlack = 1e-9;  // kW / kWh tolerance on bound checks
}

void BatterySpec::validate() const {
    if (!(e_min < e_max))
        throw std::invalid_argument("BatterySpec: requires e_min < e_max");
    if (!(p_min < 0.0 && p_max > 0.0))
        throw std::invalid_argument("BatterySpec: requires p_min < 0 < p_max");
    if (!(eta_ch > 0.0 && eta_ch <= 1.0))
        throw std::invalid_argument("BatterySpec: eta_ch must be in (0,1]");
    if (!(eta_dis > 0.0 && eta_dis <= 1.0))
        throw std::invalid_argument("BatterySpec: eta_dis must be in (0,1]");
}

bool BatterySpec::valid() const {
    return e_min < e_max && p_min < 0.0 && p_max > 0.0 && eta_ch > 0.0 &&
           eta_ch <= 1.0 && eta_dis > 0.0 && eta_dis <= 1.0;
}

BatteryState step(const BatterySpec& spec, BatteryState state, double p_b, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");

    const PowerInterval fi = feasible_interval(spec, state, dt);
    if (p_b < fi.lo - kSlack)
        throw ConstraintViolation("battery step: p_b=" + std::to_string(p_b) +
                                  " kW below charging bound " + std::to_string(fi.lo) +
                                  " kW at soe=" + std::to_string(state.soe));
    if (p_b > fi.hi + kSlack)
        throw ConstraintViolation("battery step: p_b=" + std::to_string(p_b) +
                                  " kW above discharging bound " + std::to_string(fi.hi) +
                                  " kW at soe=" + std::to_string(state.soe));

    const double p_ch = std::min(p_b, 0.0);
    const double p_dis = std::max(p_b, 0.0);
    double soe = state.soe - p_ch * spec.eta_ch * dt - p_dis / spec.eta_dis * dt;
    soe = std::clamp(soe, spec.e_min, spec.e_max);  // strip bound-check slack
    return BatteryState{soe};
}

PowerInterval feasible_interval(const BatterySpec& spec, BatteryState state, double dt) {
    PowerInterval fi;
    fi.lo = std::max(spec.p_min, (state.soe - spec.e_max) / (spec.eta_ch * dt));
    fi.hi = std::min(spec.p_max, (state.soe - spec.e_min) * spec.eta_dis / dt);
    // A state pinned at a bound leaves exactly zero headroom on that side.
    fi.lo = std::min(fi.lo, 0.0);
    fi.hi = std::max(fi.hi, 0.0);
    return fi;
}

}  // namespace battsched
