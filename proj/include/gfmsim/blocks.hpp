#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace gfmsim {

/// First-order filter memory, discretized with the trapezoidal (bilinear) rule
/// at a fixed step. One instance serves as either a low-pass w_c/(s+w_c) via
/// lpf_step() or the complementary high-pass s/(s+w_c) via hpf_step(); both
/// share the same internal low-pass memory so lpf + hpf reproduces the input
/// bit-exactly sample by sample.
class FirstOrderFilter {
public:
    FirstOrderFilter(double omega_c, double dt) : omega_c_(omega_c), dt_(dt) {
        if (!(omega_c > 0.0)) {
            throw std::invalid_argument("FirstOrderFilter: omega_c must be positive");
        }
        if (!(dt > 0.0)) {
            throw std::invalid_argument("FirstOrderFilter: dt must be positive");
        }
        if (!(omega_c * dt < 2.0)) {
            throw std::invalid_argument("FirstOrderFilter: omega_c*dt must be < 2");
        }
        k_ = 0.5 * omega_c * dt;
    }

    double lpf_step(double u) {
        check_input(u);
        const double y = ((1.0 - k_) * y_prev_ + k_ * (u + u_prev_)) / (1.0 + k_);
        y_prev_ = y;
        u_prev_ = u;
        return y;
    }

    double hpf_step(double u) { return u - lpf_step(u); }

    void reset() {
        y_prev_ = 0.0;
        u_prev_ = 0.0;
    }

    /// Place the filter at an arbitrary operating point (e.g. a DC fixed point y0 == u0).
    void seed(double y0, double u0) {
        y_prev_ = y0;
        u_prev_ = u0;
    }

    double output() const { return y_prev_; }
    double omega_c() const { return omega_c_; }
    double dt() const { return dt_; }

private:
    static void check_input(double u) {
        if (!std::isfinite(u)) {
            throw std::invalid_argument("FirstOrderFilter: non-finite input");
        }
    }

    double omega_c_;
    double dt_;
    double k_;
    double y_prev_ = 0.0;
    double u_prev_ = 0.0;
};

/// PI controller with trapezoidal integration and optional output clamp.
/// Anti-windup by conditional integration: the integrator freezes whenever
/// integrating would push the output further past the clamp.
class PiController {
public:
    PiController(double kp, double ki, double dt, std::optional<double> limit = std::nullopt)
        : kp_(kp), ki_(ki), dt_(dt), limit_(limit) {
        if (kp < 0.0 || ki < 0.0) {
            throw std::invalid_argument("PiController: gains must be non-negative");
        }
        if (!(dt > 0.0)) {
            throw std::invalid_argument("PiController: dt must be positive");
        }
        if (limit_ && !(*limit_ > 0.0)) {
            throw std::invalid_argument("PiController: limit must be positive");
        }
    }

    /// Output with the integrator tentatively advanced; no state change.
    double propose(double error) const {
        check_input(error);
        return kp_ * error + integ_ + increment(error);
    }

    /// Output with the integrator held; no state change.
    double frozen_output(double error) const {
        check_input(error);
        return kp_ * error + integ_;
    }

    /// Commit the step, integrating or holding as instructed by the caller.
    /// Used by composite controllers that saturate on a derived quantity.
    void commit(double error, bool integrate) {
        check_input(error);
        if (integrate) {
            integ_ += increment(error);
        }
        e_prev_ = error;
    }

    double step(double error) {
        check_input(error);
        const double cand = propose(error);
        double out = cand;
        bool integrate = true;
        if (limit_) {
            if (cand > *limit_) {
                out = *limit_;
                integrate = increment(error) < 0.0;
            } else if (cand < -*limit_) {
                out = -*limit_;
                integrate = increment(error) > 0.0;
            }
        }
        commit(error, integrate);
        return out;
    }

    void reset() {
        integ_ = 0.0;
        e_prev_ = 0.0;
    }

    void seed_integrator(double integ) { integ_ = integ; }
    double integrator() const { return integ_; }
    double kp() const { return kp_; }

private:
    static void check_input(double e) {
        if (!std::isfinite(e)) {
            throw std::invalid_argument("PiController: non-finite error");
        }
    }

    double increment(double error) const { return ki_ * 0.5 * dt_ * (error + e_prev_); }

    double kp_;
    double ki_;
    double dt_;
    std::optional<double> limit_;
    double integ_ = 0.0;
    double e_prev_ = 0.0;
};

} // namespace gfmsim
