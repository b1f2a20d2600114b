#pragma once

#include "gfmsim/blocks.hpp"
#include "gfmsim/frames.hpp"

namespace gfmsim {

struct DroopParams {
    double m_p = 0.05;      // P-omega droop coefficient
    double m_q = 0.05;      // Q-V droop coefficient
    double p_set = 0.5;     // pu
    double q_set = 0.5;     // pu
    double v_ref = 1.0;     // pu
    double omega_ref = 1.0; // pu
    double omega_f = 2.0 * M_PI * 6.0; // power LPF cut-off, rad/s

    void validate() const {
        if (!(m_p > 0.0) || !(m_q > 0.0)) {
            throw std::invalid_argument("DroopParams: droop coefficients must be positive");
        }
        if (!(omega_f > 0.0)) {
            throw std::invalid_argument("DroopParams: omega_f must be positive");
        }
    }
};

struct ControlParams {
    DroopParams droop{};
    double kp_cc = 1.1;      // current-controller proportional gain, pu
    double ki_cc = 2.4;      // current-controller integral gain, pu
    double v_ceiling = 1.25; // modulation ceiling on |v_t|, pu
    double l_f = 0.156;      // filter inductance seen by the decoupling terms
    double omega_vff = 2000.0; // voltage feed-forward LPF cut-off, rad/s
    double omega_base = 2.0 * M_PI * 60.0;
};

/// Instantaneous per-unit powers in the stationary frame. With the
/// amplitude-invariant transform and peak-phase bases the 3/2 folds into the
/// base, so P = v.i and Q = v x i. Lagging current into the grid gives Q > 0.
inline std::pair<double, double> power_calc(const SpaceVector& v, const SpaceVector& i) {
    const double p = v.alpha * i.alpha + v.beta * i.beta;
    const double q = v.beta * i.alpha - v.alpha * i.beta;
    return {p, q};
}

inline SpaceVector synthesize_vgfm(double v_gfm, double theta_gfm) {
    return {v_gfm * std::cos(theta_gfm), v_gfm * std::sin(theta_gfm)};
}

struct DroopOutput {
    double omega_gfm = 1.0; // pu
    double v_gfm = 1.0;     // pu
    double theta_gfm = 0.0; // rad
};

/// Droop reference generation: powers pass through the module-owned low-pass
/// filters, then omega and V follow the droop laws, and the reference angle
/// integrates omega.
class DroopControl {
public:
    DroopControl(const DroopParams& params, double omega_base, double dt)
        : params_(params), omega_base_(omega_base),
          p_filter_(params.omega_f, dt), q_filter_(params.omega_f, dt) {
        params.validate();
    }

    DroopOutput step(double p, double q, double dt) {
        if (!std::isfinite(p) || !std::isfinite(q) || !(dt > 0.0)) {
            throw std::invalid_argument("DroopControl::step: non-finite input");
        }
        const double p_filt = p_filter_.lpf_step(p);
        const double q_filt = q_filter_.lpf_step(q);
        DroopOutput out;
        out.omega_gfm = params_.omega_ref + params_.m_p * (params_.p_set - p_filt);
        out.v_gfm = params_.v_ref + params_.m_q * (params_.q_set - q_filt);
        theta_ = wrap_angle(theta_ + out.omega_gfm * omega_base_ * dt);
        out.theta_gfm = theta_;
        return out;
    }

    /// Seed the power filters at a DC fixed point (filtered value == input).
    void seed_filters(double p0, double q0) {
        p_filter_.seed(p0, p0);
        q_filter_.seed(q0, q0);
    }

    void reset() {
        p_filter_.reset();
        q_filter_.reset();
        theta_ = 0.0;
    }

    double theta() const { return theta_; }
    double p_filtered() const { return p_filter_.output(); }
    double q_filtered() const { return q_filter_.output(); }

private:
    DroopParams params_;
    double omega_base_;
    double theta_ = 0.0;
    FirstOrderFilter p_filter_;
    FirstOrderFilter q_filter_;
};

/// Inner current controller: PI on the dq tracking error with low-passed
/// output-voltage feed-forward and error-based cross-coupling compensation,
/// so zero error passes the (filtered) v_o straight through. The feed-forward
/// filter keeps the fundamental intact but breaks the resonance-band coupling
/// between the measured voltage and the admittance-generated reference, which
/// otherwise sustains an oscillation at the filter/grid LC resonance. The
/// commanded vector magnitude saturates at the modulation ceiling; both
/// integrators freeze while saturated. The integral gain is given in per-unit
/// time, hence the omega_base scaling.
class CurrentController {
public:
    CurrentController(const ControlParams& params, double dt)
        : params_(params),
          pi_d_(params.kp_cc, params.ki_cc * params.omega_base, dt),
          pi_q_(params.kp_cc, params.ki_cc * params.omega_base, dt),
          ff_d_(params.omega_vff, dt), ff_q_(params.omega_vff, dt) {}

    SpaceVector step(const SpaceVector& i_ref, const SpaceVector& i_c, const SpaceVector& v_o,
                     double theta_gfm, double omega_gfm) {
        const DqVector err = park(i_ref - i_c, theta_gfm);
        const DqVector v_o_dq = park(v_o, theta_gfm);
        const double ff_d = ff_d_.lpf_step(v_o_dq.d);
        const double ff_q = ff_q_.lpf_step(v_o_dq.q);
        const double x_f = omega_gfm * params_.l_f;

        const auto compose = [&](double pd, double pq) {
            const DqVector cmd{ff_d + pd - x_f * err.q, ff_q + pq + x_f * err.d};
            return inverse_park(cmd, theta_gfm);
        };

        SpaceVector v_t = compose(pi_d_.propose(err.d), pi_q_.propose(err.q));
        const double mag = v_t.magnitude();
        if (mag <= params_.v_ceiling) {
            pi_d_.commit(err.d, true);
            pi_q_.commit(err.q, true);
            return v_t;
        }
        // Saturated: hold both integrators and scale the frozen command onto the ceiling.
        pi_d_.commit(err.d, false);
        pi_q_.commit(err.q, false);
        v_t = compose(pi_d_.frozen_output(err.d), pi_q_.frozen_output(err.q));
        const double frozen_mag = v_t.magnitude();
        if (frozen_mag > params_.v_ceiling) {
            v_t = v_t * (params_.v_ceiling / frozen_mag);
        }
        return v_t;
    }

    /// Place the feed-forward filters at the fixed point for a given operating
    /// voltage, so the passthrough is exact from the first step.
    void seed_feedforward(const SpaceVector& v_o, double theta_gfm) {
        const DqVector v_o_dq = park(v_o, theta_gfm);
        ff_d_.seed(v_o_dq.d, v_o_dq.d);
        ff_q_.seed(v_o_dq.q, v_o_dq.q);
    }

    void reset() {
        pi_d_.reset();
        pi_q_.reset();
        ff_d_.reset();
        ff_q_.reset();
    }

private:
    ControlParams params_;
    PiController pi_d_;
    PiController pi_q_;
    FirstOrderFilter ff_d_;
    FirstOrderFilter ff_q_;
};

} // namespace gfmsim
