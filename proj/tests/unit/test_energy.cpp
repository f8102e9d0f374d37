#include "dmimo/energy.hpp"

#include "doctest.h"

using namespace dmimo;

TEST_SUITE("energy") {

TEST_CASE("fixed power") {
    const EnergyConstants k;
    CHECK(fixed_power(60, 30, 8, k) == doctest::Approx(105.5));
    CHECK(fixed_power(20, 10, 8, k) == doctest::Approx(38.5));
    CHECK(fixed_power(0, 0, 8, k) == doctest::Approx(5.0));
}

TEST_CASE("per-link and transmit power") {
    const EnergyConstants k;
    CHECK(k.link_power(8) == doctest::Approx(7.41));
    const Matrix one = Matrix::Ones(1, 1);
    CHECK(circuit_power(Vector::Zero(1), 0.1, one, 8, k) == doctest::Approx(7.41));
    CHECK(circuit_power(Vector::Zero(1), 0.1, 0.5 * one, 8, k) == doctest::Approx(3.705));
    CHECK(circuit_power(Vector::Ones(1), 0.1, Matrix::Zero(1, 1), 8, k) == doctest::Approx(0.25));

    EnergyConstants per_ue = k;
    per_ue.lsfd_per_link = false;
    CHECK(per_ue.link_power(8) == doctest::Approx(6.41));
    CHECK(circuit_power(Vector::Zero(3), 0.1, Matrix::Zero(2, 3), 8, per_ue) == doctest::Approx(3.0));
}

TEST_CASE("circuit power is affine") {
    const EnergyConstants k;
    Matrix d1(2, 2), d2(2, 2);
    d1 << 1.0, 0.0, 0.3, 1.0;
    d2 << 0.2, 0.7, 1.0, 0.0;
    Vector e1(2), e2(2);
    e1 << 0.1, 0.9;
    e2 << 1.0, 0.4;
    const double a = 0.3;
    const double mixed = circuit_power(a * e1 + (1 - a) * e2, 0.1, a * d1 + (1 - a) * d2, 8, k);
    const double blend = a * circuit_power(e1, 0.1, d1, 8, k) + (1 - a) * circuit_power(e2, 0.1, d2, 8, k);
    CHECK(mixed == doctest::Approx(blend));
}

TEST_CASE("decoding power and efficiency") {
    const EnergyConstants k;
    CHECK(EnergyConstants::deco_from_mw_per_gbps(1000.0) == doctest::Approx(1e-9));
    CHECK(total_power(10.0, 5.0, 1e9, k) == doctest::Approx(16.0));
    CHECK(energy_efficiency(10.0, 50.0, 20e6) == doctest::Approx(4e6));

    // With decoding power the EE stays an increasing function of the reduced ratio.
    double prev = 0.0;
    for (double se = 1.0; se < 200.0; se *= 1.5) {
        const double ee = energy_efficiency(se, total_power(40.0, 10.0, k.bandwidth_hz * se, k), k.bandwidth_hz);
        CHECK(ee > prev);
        prev = ee;
    }
}

TEST_CASE("constant checks") {
    EnergyConstants k;
    k.zeta = 0.0;
    CHECK_THROWS_AS(k.validate(), ConfigError);
    EnergyConstants n;
    n.p_proc = -1.0;
    try {
        n.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "energy.p_proc_w");
    }
}

}
