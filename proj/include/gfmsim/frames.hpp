#pragma once

#include <cmath>
#include <stdexcept>

namespace gfmsim {

/// Per-unit base quantities of a three-phase system.
/// v_base is line-to-line RMS; currents and impedances derive from it.
struct PerUnitBase {
    double s_base = 1e6;   // VA
    double v_base = 480.0; // V, line-to-line RMS
    double f_base = 60.0;  // Hz

    PerUnitBase() = default;
    PerUnitBase(double s, double v, double f) : s_base(s), v_base(v), f_base(f) {
        if (!(s_base > 0.0) || !(v_base > 0.0) || !(f_base > 0.0)) {
            throw std::invalid_argument("PerUnitBase: s_base, v_base, f_base must be positive");
        }
    }

    double z_base() const { return v_base * v_base / s_base; }
    double i_base() const { return s_base / (std::sqrt(3.0) * v_base); }
    double omega_base() const { return 2.0 * M_PI * f_base; }
};

/// Instantaneous three-phase values, per unit.
struct AbcTriple {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Two-axis stationary-frame (alpha-beta) quantity, per unit.
struct SpaceVector {
    double alpha = 0.0;
    double beta = 0.0;

    double magnitude() const { return std::sqrt(alpha * alpha + beta * beta); }

    SpaceVector operator+(const SpaceVector& o) const { return {alpha + o.alpha, beta + o.beta}; }
    SpaceVector operator-(const SpaceVector& o) const { return {alpha - o.alpha, beta - o.beta}; }
    SpaceVector operator*(double k) const { return {alpha * k, beta * k}; }
    SpaceVector operator-() const { return {-alpha, -beta}; }
    SpaceVector& operator+=(const SpaceVector& o) {
        alpha += o.alpha;
        beta += o.beta;
        return *this;
    }
};

inline SpaceVector operator*(double k, const SpaceVector& v) { return v * k; }

/// Rotating-frame (direct/quadrature) quantity; the frame angle is carried by the caller.
struct DqVector {
    double d = 0.0;
    double q = 0.0;

    double magnitude() const { return std::sqrt(d * d + q * q); }
};

/// Amplitude-invariant Clarke transform: a balanced set of peak M maps to magnitude M.
/// Zero-sequence is dropped.
inline SpaceVector clarke(const AbcTriple& x) {
    return {(2.0 / 3.0) * (x.a - 0.5 * x.b - 0.5 * x.c),
            (2.0 / 3.0) * (std::sqrt(3.0) / 2.0) * (x.b - x.c)};
}

/// Zero-sequence-free reconstruction; clarke(inverse_clarke(v)) == v.
inline AbcTriple inverse_clarke(const SpaceVector& v) {
    const double h = std::sqrt(3.0) / 2.0;
    return {v.alpha, -0.5 * v.alpha + h * v.beta, -0.5 * v.alpha - h * v.beta};
}

inline DqVector park(const SpaceVector& v, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {v.alpha * c + v.beta * s, -v.alpha * s + v.beta * c};
}

inline SpaceVector inverse_park(const DqVector& v, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {v.d * c - v.q * s, v.d * s + v.q * c};
}

/// Space-vector norm; equals peak phase value for balanced sinusoidal signals.
inline double magnitude(const SpaceVector& v) { return v.magnitude(); }

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double theta) {
    double w = std::remainder(theta, 2.0 * M_PI);
    if (w <= -M_PI) {
        w += 2.0 * M_PI;
    }
    return w;
}

} // namespace gfmsim
