#pragma once

#include <stdexcept>
#include <string>

#include "gfmsim/frames.hpp"

namespace gfmsim {

/// Raised when the integration produces a non-finite or runaway state.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, double time_s)
        : std::runtime_error(what), time_s_(time_s) {}
    double time_s() const { return time_s_; }

private:
    double time_s_ = 0.0;
};

/// Electrical parameters, all per unit on the system base. The grid between
/// the filter capacitor and the ideal source is two series RL segments with a
/// shunt fault bus in between.
struct PlantParams {
    double r_f = 0.1;
    double l_f = 0.156;
    double c_f = 0.023;
    double r_g1 = 0.01;
    double l_g1 = 0.05;
    double r_g2 = 0.01;
    double l_g2 = 0.05;
    double omega_base = 2.0 * M_PI * 60.0; // rad/s

    void validate() const {
        if (!(l_f > 0.0) || !(c_f > 0.0) || !(l_g1 > 0.0) || !(l_g2 > 0.0)) {
            throw std::invalid_argument("PlantParams: inductances and capacitance must be positive");
        }
        if (r_f < 0.0 || r_g1 < 0.0 || r_g2 < 0.0) {
            throw std::invalid_argument("PlantParams: resistances must be non-negative");
        }
        if (!(omega_base > 0.0)) {
            throw std::invalid_argument("PlantParams: omega_base must be positive");
        }
    }
};

/// Grid-side disturbance state: shunt fault conductance at the mid bus and the
/// accumulated source phase offset.
struct GridEventState {
    double fault_conductance = 0.0; // pu, 0 when healthy
    double phase_offset = 0.0;      // rad
    double v_grid_mag = 1.0;        // pu
};

enum class EventKind { FaultOn, FaultOff, PhaseJump };

struct GridEvent {
    EventKind kind = EventKind::FaultOn;
    double time = 0.0;  // s, relative to the end of warm-up
    double value = 0.0; // conductance (pu) for FaultOn, angle (rad) for PhaseJump
};

/// Continuous state of the circuit. i_g2 and v_bus carry the source-side
/// segment current and the fault-bus voltage used by the companion history.
struct PlantState {
    SpaceVector i_c{};   // inverter phase current
    SpaceVector v_o{};   // filter capacitor / output voltage (PCC)
    SpaceVector i_o{};   // grid-side current, PCC -> fault bus
    SpaceVector i_g2{};  // fault bus -> source current
    SpaceVector v_bus{}; // fault-bus voltage
    double theta_g = 0.0;
    double t = 0.0;
};

/// Ideal source vector of magnitude v_grid_mag at angle theta_g + phase_offset.
inline SpaceVector grid_voltage(const GridEventState& ev, double theta_g) {
    const double th = theta_g + ev.phase_offset;
    return {ev.v_grid_mag * std::cos(th), ev.v_grid_mag * std::sin(th)};
}

inline GridEventState apply_event(const GridEventState& ev, const GridEvent& e) {
    GridEventState out = ev;
    switch (e.kind) {
    case EventKind::FaultOn:
        out.fault_conductance = e.value;
        break;
    case EventKind::FaultOff:
        out.fault_conductance = 0.0;
        break;
    case EventKind::PhaseJump:
        out.phase_offset += e.value;
        break;
    }
    return out;
}

/// Reconcile the circuit state at fault clearance. A breaker interrupts the
/// shunt branch at its own current zero, where the two series segments carry
/// the same current; the surviving series current is the PCC-side one, while
/// the source-side segment's flux mismatch is absorbed by the ideal bus.
/// Without this the algebraic bus node turns the interrupted fault current
/// into a voltage impulse of tens of per-unit.
inline void reconcile_fault_clearance(PlantState& s, const PlantParams& p,
                                      const GridEventState& post_event) {
    s.i_g2 = s.i_o;
    // Bus voltage snaps to the series inductive divider between v_o and the source.
    const SpaceVector eg = grid_voltage(post_event, s.theta_g);
    const double w = p.l_g2 / (p.l_g1 + p.l_g2);
    s.v_bus = s.v_o * w + eg * (1.0 - w);
}

namespace detail {

inline bool finite(const SpaceVector& v) {
    return std::isfinite(v.alpha) && std::isfinite(v.beta);
}

} // namespace detail

/// Advance the circuit one trapezoidal step. v_t_begin / v_t_end are the
/// terminal voltage at the two ends of the interval; pass the same vector
/// twice for a zero-order-held controller command.
inline PlantState plant_step(const PlantState& s, const PlantParams& p, const GridEventState& ev,
                             const SpaceVector& v_t_begin, const SpaceVector& v_t_end, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("plant_step: dt must be positive");
    }
    if (!detail::finite(v_t_begin) || !detail::finite(v_t_end) || !detail::finite(s.i_c) ||
        !detail::finite(s.v_o) || !detail::finite(s.i_o) || !detail::finite(s.i_g2) ||
        !detail::finite(s.v_bus)) {
        throw SimulationError("plant_step: non-finite state or input", s.t);
    }

    const double wb = p.omega_base;
    const double g = ev.fault_conductance;

    const SpaceVector eg_begin = grid_voltage(ev, s.theta_g);
    const double theta_new = wrap_angle(s.theta_g + wb * dt);
    const SpaceVector eg_end = grid_voltage(ev, theta_new);

    // Trapezoidal companion coefficients for each branch.
    const double af = wb * dt / (2.0 * p.l_f);
    const double denf = 1.0 + af * p.r_f;
    const double gf = af / denf;
    const SpaceVector hf = ((1.0 - af * p.r_f) * s.i_c + af * (v_t_begin + v_t_end - s.v_o)) * (1.0 / denf);

    const double ec = wb * dt / (2.0 * p.c_f);
    const SpaceVector hv = s.v_o + ec * (s.i_c - s.i_o);

    const double a1 = wb * dt / (2.0 * p.l_g1);
    const double den1 = 1.0 + a1 * p.r_g1;
    const double g1 = a1 / den1;
    const SpaceVector h1 = ((1.0 - a1 * p.r_g1) * s.i_o + a1 * (s.v_o - s.v_bus)) * (1.0 / den1);

    const double a2 = wb * dt / (2.0 * p.l_g2);
    const double den2 = 1.0 + a2 * p.r_g2;
    const double g2 = a2 / den2;
    const SpaceVector h2 = ((1.0 - a2 * p.r_g2) * s.i_g2 + a2 * (s.v_bus - eg_begin)) * (1.0 / den2);

    // Eliminate the algebraic fault-bus node, then the capacitor node.
    const double d_bus = g + g1 + g2;
    const SpaceVector bus_drive = g2 * eg_end + h1 - h2;
    const double a_io = g1 * (g + g2) / d_bus;
    const SpaceVector b_io = h1 - (g1 / d_bus) * bus_drive;

    PlantState out;
    out.v_o = (ec * (hf - b_io) + hv) * (1.0 / (1.0 + ec * (gf + a_io)));
    out.i_c = hf - gf * out.v_o;
    out.i_o = a_io * out.v_o + b_io;
    out.v_bus = (g1 * out.v_o + bus_drive) * (1.0 / d_bus);
    out.i_g2 = out.i_o - g * out.v_bus;
    out.theta_g = theta_new;
    out.t = s.t + dt;

    if (!detail::finite(out.i_c) || !detail::finite(out.v_o) || !detail::finite(out.i_o) ||
        !detail::finite(out.i_g2) || !detail::finite(out.v_bus) || out.i_c.magnitude() > 100.0) {
        throw SimulationError("plant_step: numerical blow-up at t=" + std::to_string(out.t) + " s",
                              out.t);
    }
    return out;
}

inline PlantState plant_step(const PlantState& s, const PlantParams& p, const GridEventState& ev,
                             const SpaceVector& v_t, double dt) {
    return plant_step(s, p, ev, v_t, v_t, dt);
}

/// Stored energy of the reactive elements, pu-seconds. Used by passivity checks.
inline double stored_energy(const PlantState& s, const PlantParams& p) {
    const double i_c2 = s.i_c.alpha * s.i_c.alpha + s.i_c.beta * s.i_c.beta;
    const double v_o2 = s.v_o.alpha * s.v_o.alpha + s.v_o.beta * s.v_o.beta;
    const double i_o2 = s.i_o.alpha * s.i_o.alpha + s.i_o.beta * s.i_o.beta;
    const double i_g2sq = s.i_g2.alpha * s.i_g2.alpha + s.i_g2.beta * s.i_g2.beta;
    return 0.5 * (p.l_f * i_c2 + p.c_f * v_o2 + p.l_g1 * i_o2 + p.l_g2 * i_g2sq) / p.omega_base;
}

/// Solve for the fault conductance that pulls the fault-bus voltage down to
/// target_vpcc, using the ideal-grid divider between the source-side segment
/// impedance and the fault shunt. Bisection; throws if no bracket exists.
inline double calibrate_fault(const PlantParams& p, double v_grid_mag, double target_vpcc) {
    if (!(target_vpcc > 0.0) || !(target_vpcc <= v_grid_mag)) {
        throw std::invalid_argument("calibrate_fault: target must be in (0, v_grid_mag]");
    }
    // |V_bus| = E / |1 + g*Z2| with Z2 = r_g2 + j*l_g2 at nominal frequency.
    const auto bus_voltage = [&](double g) {
        const double re = 1.0 + g * p.r_g2;
        const double im = g * p.l_g2;
        return v_grid_mag / std::sqrt(re * re + im * im);
    };
    if (bus_voltage(0.0) <= target_vpcc) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (bus_voltage(hi) > target_vpcc) {
        hi *= 2.0;
        if (hi > 1e12) {
            throw std::runtime_error("calibrate_fault: no conductance in bracket reaches target");
        }
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (bus_voltage(mid) > target_vpcc) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace gfmsim
