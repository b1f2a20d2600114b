#pragma once

#include <algorithm>
#include <optional>

#include "gfmsim/blocks.hpp"
#include "gfmsim/frames.hpp"

namespace gfmsim {

enum class Strategy { Tva, Vav, Htva };

/// Which voltage difference feeds the voltage-information impedance: the
/// filter output voltage (default) or the terminal voltage.
enum class VavDvSource { OutputVoltage, TerminalVoltage };

struct LimiterParams {
    double i_max = 1.2;      // pu
    double i_th = 1.0;       // pu
    double sigma_ss = 8.0;   // steady-state X/R ratio
    double sigma_tr = 0.1;   // transient X/R ratio
    double v_n = 1.0;        // nominal inverter voltage, pu
    double r_nom = 0.1;      // nominal admittance resistance, pu
    double l_nom = 0.2;      // nominal admittance inductance, pu
    double omega_d = 60.0;   // VTVR high-pass cut-off, rad/s
    double hysteresis = 0.02; // overcurrent flag band around i_th, pu
    double min_hold = 0.005; // minimum overcurrent hold, s
    VavDvSource dv_source = VavDvSource::OutputVoltage;

    void validate() const {
        if (!(i_max > i_th) || !(i_th > 0.0)) {
            throw std::invalid_argument("LimiterParams: requires i_max > i_th > 0");
        }
        if (!(sigma_ss > sigma_tr) || !(sigma_tr > 0.0)) {
            throw std::invalid_argument("LimiterParams: requires sigma_ss > sigma_tr > 0");
        }
        if (!(v_n > 0.0)) {
            throw std::invalid_argument("LimiterParams: v_n must be positive");
        }
        if (!(r_nom > 0.0) || !(l_nom > 0.0)) {
            throw std::invalid_argument("LimiterParams: nominal admittance must be positive");
        }
        if (!(omega_d > 0.0)) {
            throw std::invalid_argument("LimiterParams: omega_d must be positive");
        }
        if (hysteresis < 0.0 || min_hold < 0.0) {
            throw std::invalid_argument("LimiterParams: hysteresis and min_hold must be >= 0");
        }
    }
};

/// Resistance/reactance pair of a virtual impedance, pu at nominal frequency.
struct RxPair {
    double r = 0.0;
    double x = 0.0;

    double z() const { return std::sqrt(r * r + x * x); }
};

/// Applied admittance elements plus per-step diagnostics.
struct LimiterOutput {
    double r = 0.0;         // applied virtual resistance, pu
    double l = 0.0;         // applied virtual inductance, pu
    double z_tva = 0.0;     // threshold-method impedance magnitude seen by the selector
    double z_vav = 0.0;     // voltage-information impedance magnitude seen by the selector
    double sigma_now = 0.0; // live X/R ratio
    bool overcurrent = false;
};

/// Gain that sizes the threshold virtual resistance so the quasi-steady
/// current lands at i_max when the driving voltage equals v_n.
inline double k_r(const LimiterParams& p, double sigma) {
    return p.v_n / (p.i_max * (p.i_max - p.i_th) * std::sqrt(sigma * sigma + 1.0));
}

/// Threshold virtual impedance: zero below i_th, then proportional to the
/// current overshoot with the X/R split set by sigma.
inline RxPair tva_impedance(double i_mag, const LimiterParams& p, double sigma) {
    if (i_mag <= p.i_th) {
        return {0.0, 0.0};
    }
    const double r = k_r(p, sigma) * (i_mag - p.i_th);
    return {r, sigma * r};
}

/// Voltage-information virtual impedance: sized from the voltage difference so
/// the quasi-steady current is exactly i_max, independent of phase.
inline RxPair vav_impedance(double dv_mag, double i_mag, const LimiterParams& p, double sigma) {
    if (i_mag < p.i_th) {
        return {0.0, 0.0};
    }
    const double r = dv_mag / (p.i_max * std::sqrt(sigma * sigma + 1.0));
    return {r, sigma * r};
}

inline RxPair nominal_pair(const LimiterParams& p) {
    // Per-unit reactance equals per-unit inductance at nominal frequency.
    return {p.r_nom, p.l_nom};
}

/// Hybrid selection: the larger-magnitude impedance during overcurrent (ties
/// go to the threshold branch), the nominal admittance otherwise.
inline RxPair htva_select(const RxPair& tva, const RxPair& vav, bool overcurrent,
                          const LimiterParams& p) {
    if (!overcurrent) {
        return nominal_pair(p);
    }
    return tva.z() >= vav.z() ? tva : vav;
}

/// Live X/R ratio from the variable transient virtual resistance: a high-pass
/// of the activation signal scales the transient resistance, pulling sigma
/// from sigma_ss down to sigma_tr at an activation edge. The high-pass output
/// magnitude is used so deactivation edges raise transient damping as well.
inline double vtvr_sigma(FirstOrderFilter& hpf, bool activation, const LimiterParams& p) {
    const double h = hpf.hpf_step(activation ? 1.0 : 0.0);
    const double h_eff = std::min(std::abs(h), 1.0);
    const double d = p.sigma_ss / p.sigma_tr - 1.0;
    return p.sigma_ss / (1.0 + d * h_eff);
}

/// Per-axis state of the admittance lag that turns (v_gfm - v_t) into i_ref.
struct AdmittanceState {
    SpaceVector i_ref{};
    SpaceVector didt{}; // derivative memory for the trapezoidal update
};

/// One trapezoidal step of (L/w_b) di_ref/dt = (v_gfm - v_t) - R i_ref.
/// R and L may change between calls; the step uses the current values.
inline SpaceVector admittance_step(AdmittanceState& s, const SpaceVector& v_gfm,
                                   const SpaceVector& v_t, double r, double l, double omega_base,
                                   double dt) {
    if (!(r > 0.0) || !(l > 0.0)) {
        throw std::invalid_argument("admittance_step: requires R > 0 and L > 0");
    }
    if (!std::isfinite(v_gfm.alpha) || !std::isfinite(v_gfm.beta) || !std::isfinite(v_t.alpha) ||
        !std::isfinite(v_t.beta)) {
        throw std::invalid_argument("admittance_step: non-finite input");
    }
    const SpaceVector dv = v_gfm - v_t;
    const double k = dt * omega_base / (2.0 * l);
    const double denom = 1.0 + k * r;
    const SpaceVector i_new = (s.i_ref + 0.5 * dt * s.didt + k * dv) * (1.0 / denom);
    s.didt = (dv - r * i_new) * (omega_base / l);
    s.i_ref = i_new;
    return i_new;
}

/// Quasi-steady-state current of the threshold method for a given driving
/// voltage magnitude: the positive root of c*i*(i - i_th) = dv with
/// c = v_n / (i_max*(i_max - i_th)). Returns nullopt when the method would not
/// activate (dv = 0 keeps the current at the threshold boundary).
inline std::optional<double> qss_current_tva(double dv_mag, const LimiterParams& p) {
    if (!(dv_mag >= 0.0)) {
        throw std::invalid_argument("qss_current_tva: dv_mag must be >= 0");
    }
    if (dv_mag == 0.0) {
        return std::nullopt;
    }
    const double c = p.v_n / (p.i_max * (p.i_max - p.i_th));
    return 0.5 * (p.i_th + std::sqrt(p.i_th * p.i_th + 4.0 * dv_mag / c));
}

/// Quasi-steady-state current of the voltage-information method: exactly i_max
/// whenever active, independent of the driving voltage.
inline double qss_current_vav(double dv_mag, const LimiterParams& p) {
    if (!(dv_mag >= 0.0)) {
        throw std::invalid_argument("qss_current_vav: dv_mag must be >= 0");
    }
    return p.i_max;
}

/// Strategy-selectable fault-current limiter. Owns the overcurrent flag
/// (hysteresis band around i_th plus a minimum hold), the VTVR high-pass and
/// the admittance state. The hysteretic flag realizes the threshold decision
/// inside the step, so a current dip below i_th during the hold keeps the
/// voltage-information branch live.
class CurrentLimiter {
public:
    CurrentLimiter(const LimiterParams& params, Strategy strategy, double omega_base, double dt)
        : params_(params), strategy_(strategy), omega_base_(omega_base), dt_(dt),
          vtvr_hpf_(params.omega_d, dt) {
        params.validate();
        hold_steps_ = static_cast<int>(std::ceil(params.min_hold / dt));
    }

    std::pair<SpaceVector, LimiterOutput> step(const SpaceVector& v_gfm, const SpaceVector& v_t,
                                               const SpaceVector& v_o, const SpaceVector& i_c) {
        const double i_mag = i_c.magnitude();
        update_flag(i_mag);
        const double sigma = vtvr_sigma(vtvr_hpf_, flag_, params_);

        const SpaceVector dv_eq5 =
            params_.dv_source == VavDvSource::OutputVoltage ? v_gfm - v_o : v_gfm - v_t;

        RxPair tva{0.0, 0.0};
        RxPair vav{0.0, 0.0};
        if (flag_) {
            const double r_tva = k_r(params_, sigma) * std::max(0.0, i_mag - params_.i_th);
            tva = {r_tva, sigma * r_tva};
            const double r_vav =
                dv_eq5.magnitude() / (params_.i_max * std::sqrt(sigma * sigma + 1.0));
            vav = {r_vav, sigma * r_vav};
        }

        RxPair applied = nominal_pair(params_);
        if (flag_) {
            RxPair sel{};
            switch (strategy_) {
            case Strategy::Tva:
                sel = tva;
                break;
            case Strategy::Vav:
                sel = vav;
                break;
            case Strategy::Htva:
                sel = tva.z() >= vav.z() ? tva : vav;
                break;
            }
            // Nominal floor: a degenerate zero selection cannot drive the admittance.
            if (sel.r > 0.0 || sel.x > 0.0) {
                applied = sel;
            }
        }

        const SpaceVector i_ref =
            admittance_step(adm_, v_gfm, v_t, applied.r, applied.x, omega_base_, dt_);
        return {i_ref, LimiterOutput{applied.r, applied.x, tva.z(), vav.z(), sigma, flag_}};
    }

    void reset() {
        vtvr_hpf_.reset();
        adm_ = AdmittanceState{};
        flag_ = false;
        hold_remaining_ = 0;
    }

    bool overcurrent() const { return flag_; }
    const AdmittanceState& admittance() const { return adm_; }

private:
    void update_flag(double i_mag) {
        const double on_th = params_.i_th + 0.5 * params_.hysteresis;
        const double off_th = params_.i_th - 0.5 * params_.hysteresis;
        if (!flag_) {
            if (i_mag >= on_th) {
                flag_ = true;
                hold_remaining_ = hold_steps_;
            }
        } else {
            if (hold_remaining_ > 0) {
                --hold_remaining_;
            }
            if (hold_remaining_ == 0 && i_mag < off_th) {
                flag_ = false;
            }
        }
    }

    LimiterParams params_;
    Strategy strategy_;
    double omega_base_;
    double dt_;
    FirstOrderFilter vtvr_hpf_;
    AdmittanceState adm_{};
    bool flag_ = false;
    int hold_steps_ = 0;
    int hold_remaining_ = 0;
};

} // namespace gfmsim
