#include <doctest.h>

#include <cmath>
#include <random>

#include "gfmsim/control.hpp"
#include "gfmsim/plant.hpp"

using namespace gfmsim;

TEST_CASE("power calculation in the stationary frame") {
    SUBCASE("unity in-phase") {
        const auto [p, q] = power_calc({1.0, 0.0}, {1.0, 0.0});
        CHECK(p == doctest::Approx(1.0));
        CHECK(q == doctest::Approx(0.0));
    }
    SUBCASE("lagging current gives positive Q") {
        const auto [p, q] = power_calc({1.0, 0.0}, {0.0, -1.0});
        CHECK(p == doctest::Approx(0.0));
        CHECK(q == doctest::Approx(1.0));
    }
    SUBCASE("zero current") {
        const auto [p, q] = power_calc({0.7, -0.3}, {0.0, 0.0});
        CHECK(p == 0.0);
        CHECK(q == 0.0);
    }
}

TEST_CASE("droop reference generation") {
    DroopParams params;
    const double wb = 2.0 * M_PI * 60.0;
    const double dt = 5e-5;

    SUBCASE("zero droop error returns the references exactly") {
        DroopControl droop(params, wb, dt);
        droop.seed_filters(params.p_set, params.q_set);
        const DroopOutput out = droop.step(params.p_set, params.q_set, dt);
        CHECK(out.omega_gfm == params.omega_ref);
        CHECK(out.v_gfm == params.v_ref);
    }
    SUBCASE("active power droop slope") {
        DroopControl droop(params, wb, dt);
        droop.seed_filters(0.7, params.q_set);
        const DroopOutput out = droop.step(0.7, params.q_set, dt);
        CHECK(out.omega_gfm == doctest::Approx(0.99).epsilon(1e-12));
    }
    SUBCASE("reactive power droop slope") {
        DroopControl droop(params, wb, dt);
        droop.seed_filters(params.p_set, 0.3);
        const DroopOutput out = droop.step(params.p_set, 0.3, dt);
        CHECK(out.v_gfm == doctest::Approx(1.01).epsilon(1e-12));
    }
    SUBCASE("droop mapping is affine in the filtered powers") {
        const double delta = 1e-3;
        for (double p0 : {0.1, 0.5, 0.9}) {
            DroopControl d0(params, wb, dt);
            d0.seed_filters(p0, 0.5);
            DroopControl d1(params, wb, dt);
            d1.seed_filters(p0 + delta, 0.5);
            const double w0 = d0.step(p0, 0.5, dt).omega_gfm;
            const double w1 = d1.step(p0 + delta, 0.5, dt).omega_gfm;
            CHECK((w1 - w0) / delta == doctest::Approx(-params.m_p).epsilon(1e-9));

            DroopControl e0(params, wb, dt);
            e0.seed_filters(0.5, p0);
            DroopControl e1(params, wb, dt);
            e1.seed_filters(0.5, p0 + delta);
            const double v0 = e0.step(0.5, p0, dt).v_gfm;
            const double v1 = e1.step(0.5, p0 + delta, dt).v_gfm;
            CHECK((v1 - v0) / delta == doctest::Approx(-params.m_q).epsilon(1e-9));
        }
    }
    SUBCASE("angle advances at the reference speed when P tracks the setpoint") {
        DroopControl droop(params, wb, dt);
        droop.seed_filters(params.p_set, params.q_set);
        const int n = 400;
        for (int i = 0; i < n; ++i) {
            droop.step(params.p_set, params.q_set, dt);
        }
        CHECK(droop.theta() ==
              doctest::Approx(wrap_angle(params.omega_ref * wb * n * dt)).epsilon(1e-9));
    }
    SUBCASE("rejects non-finite power input") {
        DroopControl droop(params, wb, dt);
        CHECK_THROWS_AS(droop.step(std::nan(""), 0.0, dt), std::invalid_argument);
    }
}

TEST_CASE("voltage synthesis") {
    const SpaceVector v0 = synthesize_vgfm(1.0, 0.0);
    CHECK(v0.alpha == doctest::Approx(1.0));
    CHECK(v0.beta == doctest::Approx(0.0));

    const SpaceVector v1 = synthesize_vgfm(1.01, M_PI / 2.0);
    CHECK(v1.alpha == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(v1.beta == doctest::Approx(1.01).epsilon(1e-12));

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    for (int i = 0; i < 100; ++i) {
        CHECK(synthesize_vgfm(0.97, ang(rng)).magnitude() == doctest::Approx(0.97).epsilon(1e-12));
    }
}

TEST_CASE("current controller") {
    ControlParams params;
    const double dt = 5e-5;

    SUBCASE("zero error passes the output voltage straight through") {
        CurrentController cc(params, dt);
        const SpaceVector i{0.8, -0.2};
        const SpaceVector v_o{0.95, 0.31};
        cc.seed_feedforward(v_o, 0.77); // feed-forward filter at its fixed point
        const SpaceVector v_t = cc.step(i, i, v_o, 0.77, 1.0);
        CHECK(v_t.alpha == doctest::Approx(v_o.alpha).epsilon(1e-12));
        CHECK(v_t.beta == doctest::Approx(v_o.beta).epsilon(1e-12));
    }
    SUBCASE("first step of a d-axis error is the proportional term plus the integral increment") {
        CurrentController cc(params, dt);
        // theta = 0, omega = 0: no decoupling, dq aligned with alpha-beta.
        const SpaceVector v_t = cc.step({0.1, 0.0}, {0.0, 0.0}, {0.0, 0.0}, 0.0, 0.0);
        const double expected =
            params.kp_cc * 0.1 + params.ki_cc * params.omega_base * 0.5 * dt * 0.1;
        CHECK(v_t.alpha == doctest::Approx(expected).epsilon(1e-12));
        CHECK(v_t.beta == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("command magnitude never exceeds the modulation ceiling") {
        CurrentController cc(params, dt);
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int i = 0; i < 2000; ++i) {
            const SpaceVector v_t =
                cc.step({u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, u(rng), 1.0);
            CHECK(v_t.magnitude() <= params.v_ceiling * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("closed-loop current tracking against the healthy plant") {
    // Current controller + admittance-free loop: fixed rotating current
    // references must be tracked within 2% in steady state, re-settling
    // within 50 ms after a reference step.
    ControlParams cparams;
    PlantParams pparams;
    GridEventState ev;
    const double dt = 5e-5;
    const double wb = pparams.omega_base;

    const auto track = [&](DqVector ref_start, DqVector ref_end) {
        CurrentController cc(cparams, dt);
        PlantState s;
        s.v_o = {1.0, 0.0};
        s.v_bus = {1.0, 0.0};
        SpaceVector v_t_cmd{1.0, 0.0};
        double theta = 0.0;
        const int settle = static_cast<int>(1.0 / dt);
        const int extra = static_cast<int>(0.2 / dt);
        double max_err_after_50ms = 0.0;
        for (int k = 0; k < settle + extra; ++k) {
            s = plant_step(s, pparams, ev, v_t_cmd, dt);
            theta = wrap_angle(theta + wb * dt);
            const DqVector ref_dq = k < settle ? ref_start : ref_end;
            const SpaceVector i_ref = inverse_park(ref_dq, theta);
            v_t_cmd = cc.step(i_ref, s.i_c, s.v_o, theta, 1.0);
            const double err = (s.i_c - i_ref).magnitude() / i_ref.magnitude();
            if (k >= settle && (k - settle) * dt >= 0.05) {
                max_err_after_50ms = std::max(max_err_after_50ms, err);
            }
        }
        CHECK(max_err_after_50ms < 0.02);
    };

    // References must stay reachable under the 1.25 pu modulation ceiling;
    // exporting reactive current at full active current would exceed it.
    track({0.5, 0.0}, {1.0, 0.3});
    track({0.3, -0.3}, {0.2, 1.45});
}
