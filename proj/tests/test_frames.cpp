#include <doctest.h>

#include <cmath>
#include <random>

#include "gfmsim/frames.hpp"

using namespace gfmsim;

namespace {

AbcTriple balanced_set(double peak, double theta) {
    return {peak * std::cos(theta), peak * std::cos(theta - 2.0 * M_PI / 3.0),
            peak * std::cos(theta + 2.0 * M_PI / 3.0)};
}

} // namespace

TEST_CASE("per-unit base derived quantities") {
    const PerUnitBase base(1e6, 480.0, 60.0);
    CHECK(base.z_base() == doctest::Approx(480.0 * 480.0 / 1e6).epsilon(1e-12));
    CHECK(base.i_base() == doctest::Approx(1e6 / (std::sqrt(3.0) * 480.0)).epsilon(1e-12));
    CHECK(base.omega_base() == doctest::Approx(2.0 * M_PI * 60.0).epsilon(1e-15));
    CHECK_THROWS_AS(PerUnitBase(0.0, 480.0, 60.0), std::invalid_argument);
    CHECK_THROWS_AS(PerUnitBase(1e6, -1.0, 60.0), std::invalid_argument);
}

TEST_CASE("clarke transform") {
    SUBCASE("balanced set aligned with phase a") {
        const SpaceVector v = clarke({1.0, -0.5, -0.5});
        CHECK(v.alpha == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(v.beta == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("zero input") {
        const SpaceVector v = clarke({0.0, 0.0, 0.0});
        CHECK(v.alpha == 0.0);
        CHECK(v.beta == 0.0);
    }
    SUBCASE("balanced set at theta = 0.7 rad") {
        const SpaceVector v = clarke(balanced_set(1.0, 0.7));
        CHECK(v.alpha == doctest::Approx(std::cos(0.7)).epsilon(1e-12));
        CHECK(v.beta == doctest::Approx(std::sin(0.7)).epsilon(1e-12));
    }
    SUBCASE("balanced peak maps to magnitude, random sweep") {
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> peak(0.0, 3.0);
        std::uniform_real_distribution<double> ang(-M_PI, M_PI);
        for (int i = 0; i < 200; ++i) {
            const double m = peak(rng);
            const SpaceVector v = clarke(balanced_set(m, ang(rng)));
            CHECK(v.magnitude() == doctest::Approx(m).epsilon(1e-12));
        }
    }
}

TEST_CASE("inverse clarke") {
    SUBCASE("balanced case") {
        const AbcTriple x = inverse_clarke({1.0, 0.0});
        CHECK(x.a == doctest::Approx(1.0));
        CHECK(x.b == doctest::Approx(-0.5));
        CHECK(x.c == doctest::Approx(-0.5));
    }
    SUBCASE("zero") {
        const AbcTriple x = inverse_clarke({0.0, 0.0});
        CHECK(x.a == 0.0);
        CHECK(x.b == 0.0);
        CHECK(x.c == 0.0);
    }
    SUBCASE("round trip identity over random vectors") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int i = 0; i < 500; ++i) {
            const SpaceVector v{u(rng), u(rng)};
            const SpaceVector rt = clarke(inverse_clarke(v));
            CHECK(rt.alpha == doctest::Approx(v.alpha).epsilon(1e-12));
            CHECK(rt.beta == doctest::Approx(v.beta).epsilon(1e-12));
        }
    }
    SUBCASE("specific round trip") {
        const SpaceVector rt = clarke(inverse_clarke({0.3, -0.8}));
        CHECK(rt.alpha == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(rt.beta == doctest::Approx(-0.8).epsilon(1e-12));
    }
}

TEST_CASE("park and inverse park") {
    SUBCASE("identity rotation") {
        const DqVector d = park({1.0, 0.0}, 0.0);
        CHECK(d.d == doctest::Approx(1.0));
        CHECK(d.q == doctest::Approx(0.0));
    }
    SUBCASE("quarter turn") {
        const DqVector d = park({0.0, 1.0}, M_PI / 2.0);
        CHECK(d.d == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.q == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("magnitude preserved") {
        const DqVector d = park({0.6, -0.8}, 1.234);
        CHECK(d.magnitude() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("inverse park examples") {
        const SpaceVector v0 = inverse_park({1.0, 0.0}, 0.0);
        CHECK(v0.alpha == doctest::Approx(1.0));
        CHECK(v0.beta == doctest::Approx(0.0));
        const SpaceVector v1 = inverse_park({1.0, 0.0}, M_PI / 2.0);
        CHECK(v1.alpha == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(v1.beta == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("round trip and magnitude over random angles") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        std::uniform_real_distribution<double> ang(-10.0, 10.0);
        for (int i = 0; i < 500; ++i) {
            const SpaceVector v{u(rng), u(rng)};
            const double theta = ang(rng);
            const SpaceVector rt = inverse_park(park(v, theta), theta);
            CHECK(rt.alpha == doctest::Approx(v.alpha).epsilon(1e-12));
            CHECK(rt.beta == doctest::Approx(v.beta).epsilon(1e-12));
            CHECK(park(v, theta).magnitude() == doctest::Approx(v.magnitude()).epsilon(1e-12));
        }
    }
    SUBCASE("specific round trip") {
        const SpaceVector rt = inverse_park(park({0.2, 0.9}, -2.5), -2.5);
        CHECK(rt.alpha == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(rt.beta == doctest::Approx(0.9).epsilon(1e-12));
    }
}

TEST_CASE("magnitude") {
    CHECK(magnitude({3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(magnitude({0.0, 0.0}) == 0.0);
    CHECK(magnitude(clarke(balanced_set(1.2, 0.3))) == doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("wrap_angle stays in (-pi, pi]") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ang(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(ang(rng));
        CHECK(w > -M_PI);
        CHECK(w <= M_PI);
    }
    CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
}
