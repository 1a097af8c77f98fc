// Classical flux trajectory and external flux program: closed forms,
// symmetry, synthesis, round-trip verification.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "fluxion/constants.hpp"
#include "fluxion/drive.hpp"
#include "fluxion/errors.hpp"

using namespace fluxion;
using Catch::Approx;

namespace {

// Reference drive: depth 0.06 against junction strength 0.08 at a drive
// frequency 0.999 of the circuit resonance.
ClassicalDrive reference_drive(std::size_t n = 512) {
    return synthesize_flux(classical_solution(0.06, 0.08, 0.999, 1.0, n), 1.0);
}

} // namespace

TEST_CASE("trajectory starts at the closed-form angle") {
    const auto d = reference_drive();
    // x(0) = arccos(eta / beta).
    CHECK(d.phi_c[0] == Approx(std::acos(0.75)).margin(1e-15));
    CHECK(d.phi_c[0] == Approx(0.72273424781341544).margin(1e-15));
    CHECK(d.q_c[0] == 0.0);
    CHECK(d.t_over_tau[0] == 0.0);
    CHECK(d.t_over_tau[128] == 0.25);
}

TEST_CASE("flux program matches frozen reference samples") {
    const auto d = reference_drive(512);
    REQUIRE(d.phi_x.size() == 512);
    // Values frozen from an independent evaluation of the closed form.
    CHECK(d.phi_x[0] == Approx(1.9072760401177538).margin(1e-12));
    CHECK(d.phi_x[256] == Approx(1.3401466583).margin(1e-9));
    // At quarter period the curvature term vanishes: phi_x = pi/2 + beta.
    CHECK(d.phi_x[128] == Approx(constants::pi / 2.0 + 0.08).margin(1e-12));

    const double mean =
        std::accumulate(d.phi_x.begin(), d.phi_x.end(), 0.0) / d.phi_x.size();
    CHECK(mean == Approx(1.637946).margin(1e-5));
}

TEST_CASE("trajectory has the symmetry of the cosine drive") {
    const auto d = reference_drive(512);
    for (std::size_t j = 1; j < 256; ++j) {
        // Even flux and angle, odd charge, about s = 0.
        CHECK(d.phi_c[512 - j] == Approx(d.phi_c[j]).margin(1e-12));
        CHECK(d.phi_x[512 - j] == Approx(d.phi_x[j]).margin(1e-12));
        CHECK(d.q_c[512 - j] == Approx(-d.q_c[j]).margin(1e-12));
    }
    const double q_mean =
        std::accumulate(d.q_c.begin(), d.q_c.end(), 0.0) / d.q_c.size();
    CHECK(std::abs(q_mean) < 1e-12);
}

TEST_CASE("charge samples carry the physical scale") {
    const double omega_d = 6.2769e9;
    const double c_sigma = 46e-15;
    const auto d = classical_solution(0.06, 0.08, omega_d, c_sigma, 64);
    const double q_scale = c_sigma * constants::phi0_bar * omega_d;
    for (std::size_t j = 0; j < 64; ++j) {
        const double s = constants::two_pi * d.t_over_tau[j];
        CHECK(d.q_c[j] == q_scale * drive_angle_d1(0.06, 0.08, s));
    }
}

TEST_CASE("zero depth gives a constant angle and no charge motion") {
    const auto d = synthesize_flux(classical_solution(0.0, 0.08, 1.0, 1.0, 64), 1.0);
    for (std::size_t j = 0; j < 64; ++j) {
        CHECK(d.phi_c[j] == Approx(constants::pi / 2.0).margin(1e-15));
        CHECK(d.q_c[j] == 0.0);
        CHECK(d.phi_x[j] == Approx(constants::pi / 2.0 + 0.08).margin(1e-15));
    }
}

TEST_CASE("analytic derivatives are consistent with each other") {
    // d1 is the phase derivative of the angle, d2 of d1; verify by central
    // finite differences away from the turning points.
    const double h = 1e-6;
    for (double s : {0.3, 1.1, 2.0, 4.4, 5.9}) {
        const double fd1 = (drive_angle(0.06, 0.08, s + h) -
                            drive_angle(0.06, 0.08, s - h)) / (2.0 * h);
        CHECK(drive_angle_d1(0.06, 0.08, s) == Approx(fd1).margin(1e-8));
        const double fd2 = (drive_angle_d1(0.06, 0.08, s + h) -
                            drive_angle_d1(0.06, 0.08, s - h)) / (2.0 * h);
        CHECK(drive_angle_d2(0.06, 0.08, s) == Approx(fd2).margin(1e-8));
    }
}

TEST_CASE("round trip of the synthesized program is tight") {
    const auto d = reference_drive(512);
    const double residual = verify_roundtrip(d, 1.0, 3, 1e-8);
    // The program is closed form and the integrator adaptive: the identity
    // beta cos x = eta cos s holds at floating-point level.
    CHECK(residual < 1e-8);
    CHECK(residual >= 0.0);

    // An impossible tolerance must trip the same check.
    CHECK_THROWS_AS(verify_roundtrip(d, 1.0, 1, 0.0), NumericalError);
}

TEST_CASE("corrupted flux program fails verification") {
    auto d = reference_drive(512);
    d.phi_x[17] += 1e-3;
    CHECK_THROWS_AS(verify_roundtrip(d, 1.0, 1, 1e-6), NumericalError);
}

TEST_CASE("excessive depth is refused before synthesis") {
    // The guard sits at 99 percent of beta.
    CHECK_THROWS_AS(classical_solution(0.0795, 0.08, 1.0, 1.0), DriveError);
    CHECK_NOTHROW(classical_solution(0.0790, 0.08, 1.0, 1.0, 64));
    CHECK_THROWS_AS(classical_solution(0.06, 0.0, 1.0, 1.0), ParamError);
    CHECK_THROWS_AS(classical_solution(-0.01, 0.08, 1.0, 1.0), ParamError);
    CHECK_THROWS_AS(classical_solution(0.06, 0.08, 0.0, 1.0), ParamError);
    CHECK_THROWS_AS(classical_solution(0.06, 0.08, 1.0, 0.0), ParamError);
    CHECK_THROWS_AS(classical_solution(0.06, 0.08, 1.0, 1.0, 3), ParamError);
}

TEST_CASE("pipeline stages demand their inputs") {
    CHECK_THROWS_AS(synthesize_flux(ClassicalDrive{}, 1.0), ParamError);
    const auto bare = classical_solution(0.06, 0.08, 1.0, 1.0, 64);
    CHECK_THROWS_AS(verify_roundtrip(bare, 1.0), ParamError);
    CHECK_THROWS_AS(synthesize_flux(bare, 0.0), ParamError);
    const auto full = synthesize_flux(bare, 1.0);
    CHECK_THROWS_AS(verify_roundtrip(full, 0.0), ParamError);
    CHECK_THROWS_AS(verify_roundtrip(full, 1.0, 0), ParamError);
}
