#pragma once

#include <stdexcept>
#include <string>

namespace battsched {

// Physical battery limits. Sign convention: negative power charges.
struct BatterySpec {
    double e_min = 0.0;    // kWh
    double e_max = 0.0;    // kWh
    double p_min = 0.0;    // kW, charging limit, < 0
    double p_max = 0.0;    // kW, discharging limit, > 0
    double eta_ch = 1.0;   // (0,1]
    double eta_dis = 1.0;  // (0,1]

    void validate() const;  // throws std::invalid_argument
    bool valid() const;
};

struct BatteryState {
    double soe = 0.0;  // kWh
};

struct PowerInterval {
    double lo = 0.0;  // kW
    double hi = 0.0;  // kW
};

// Raised by step() when the requested power would leave the energy bounds.
class ConstraintViolation : public std::runtime_error {
public:
    explicit ConstraintViolation(const std::string& what) : std::runtime_error(what) {}
};

// One-step energy update: e' = e - min(p_b,0)*eta_ch*dt - max(p_b,0)/eta_dis*dt.
// p_b must lie inside feasible_interval(spec, state, dt) up to a small slack.
BatteryState step(const BatterySpec& spec, BatteryState state, double p_b, double dt);

// Power interval whose every point keeps the post-step SoE inside
// [e_min, e_max], intersected with the converter limits [p_min, p_max].
PowerInterval feasible_interval(const BatterySpec& spec, BatteryState state, double dt);

}  // namespace battsched
