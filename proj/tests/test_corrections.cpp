// Nonlinear-correction magnitudes: Taylor coefficient functions on the
// driven trajectory, leading second-order scale, junction-array rescaling.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fluxion/constants.hpp"
#include "fluxion/corrections.hpp"
#include "fluxion/coupling.hpp"
#include "fluxion/errors.hpp"
#include "fluxion/params.hpp"

using namespace fluxion;
using Catch::Approx;

TEST_CASE("anchor coefficients take their closed forms") {
    const double beta = 0.08;
    const double eta = 0.06;
    // k = 3: +sqrt(beta^2 - eta^2 cos^2 s); k = 4: +eta cos s.
    CHECK(taylor_coefficient(3, beta, eta, 0.0) ==
          Approx(std::sqrt(0.0028)).epsilon(1e-14));
    CHECK(taylor_coefficient(4, beta, eta, 0.0) == 0.06);
    for (double s : {0.0, 0.4, 1.3, 2.2, 3.9, 5.5}) {
        const double c3 = taylor_coefficient(3, beta, eta, s);
        const double c4 = taylor_coefficient(4, beta, eta, s);
        CHECK(c3 == Approx(std::sqrt(beta * beta -
                                     eta * eta * std::cos(s) * std::cos(s)))
                        .epsilon(1e-14));
        CHECK(c4 == Approx(eta * std::cos(s)).epsilon(1e-14));
        CHECK(c3 >= 0.0);
        // Normalized coefficients sit on the unit circle.
        CHECK(c3 * c3 + c4 * c4 == Approx(beta * beta).epsilon(1e-14));
    }
    // At quarter phase the even line vanishes and the odd line saturates.
    CHECK(std::abs(taylor_coefficient(4, beta, eta, constants::pi / 2.0)) < 1e-16);
    CHECK(taylor_coefficient(3, beta, eta, constants::pi / 2.0) ==
          Approx(beta).epsilon(1e-14));
}

TEST_CASE("coefficients cycle with period four in the order") {
    const double beta = 0.08, eta = 0.06, s = 0.7;
    CHECK(taylor_coefficient(7, beta, eta, s) == taylor_coefficient(3, beta, eta, s));
    CHECK(taylor_coefficient(8, beta, eta, s) == taylor_coefficient(4, beta, eta, s));
    CHECK(taylor_coefficient(5, beta, eta, s) == -taylor_coefficient(3, beta, eta, s));
    CHECK(taylor_coefficient(6, beta, eta, s) == -taylor_coefficient(4, beta, eta, s));
}

TEST_CASE("zero depth freezes the trajectory at the potential minimum") {
    // x = pi/2: odd derivatives saturate at beta, even ones vanish.
    CHECK(taylor_coefficient(3, 0.08, 0.0, 1.234) == 0.08);
    CHECK(taylor_coefficient(4, 0.08, 0.0, 1.234) == 0.0);
}

TEST_CASE("coefficient domain is guarded") {
    CHECK_THROWS_AS(taylor_coefficient(2, 0.08, 0.06, 0.0), ParamError);
    CHECK_THROWS_AS(taylor_coefficient(3, 0.0, 0.0, 0.0), ParamError);
    CHECK_THROWS_AS(taylor_coefficient(3, 0.08, -0.01, 0.0), ParamError);
    CHECK_THROWS_AS(taylor_coefficient(3, 0.08, 0.09, 0.0), ParamError);
    CHECK_NOTHROW(taylor_coefficient(3, 0.08, 0.08, 0.0)); // closed interval
    CHECK_THROWS_AS(taylor_coefficients(0.08, 0.06, 0.0, 2), ParamError);

    const auto vec = taylor_coefficients(0.08, 0.06, 0.7, 8);
    REQUIRE(vec.size() == 6);
    for (int k = 3; k <= 8; ++k) {
        CHECK(vec[k - 3] == taylor_coefficient(k, 0.08, 0.06, 0.7));
    }
}

TEST_CASE("leading magnitude and junction rescaling are exact") {
    // (gamma beta omega_0/omega_i)^2 = (1.3 * 0.08 * 1000)^2 = 104^2.
    const auto one = correction_estimate(1.3, 0.08, 0.06, 1000.0, 1);
    CHECK(one.leading_magnitude == Approx(10816.0).margin(1e-8));
    CHECK(one.N == 1);
    CHECK(one.beta_rescaled == 0.08);
    CHECK(one.gamma_rescaled == 1.3);

    // N junctions divide by exactly N^4: one correctly rounded division.
    const auto two = correction_estimate(1.3, 0.08, 0.06, 1000.0, 2);
    CHECK(two.leading_magnitude * 16.0 == one.leading_magnitude);
    const auto hundred = correction_estimate(1.3, 0.08, 0.06, 1000.0, 100);
    CHECK(hundred.leading_magnitude == one.leading_magnitude / 1e8);
    CHECK(hundred.beta_rescaled == 0.08 / 100);
    CHECK(hundred.gamma_rescaled == 1.3 / 100);
}

TEST_CASE("higher order terms carry the documented amplitudes") {
    const double gamma = 1.3, beta = 0.08, eta = 0.06;
    const auto est = correction_estimate(gamma, beta, eta, 1000.0, 1, 8);
    REQUIRE(est.k_terms.size() == 6);
    auto factorial = [](int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    for (int k = 3; k <= 8; ++k) {
        const double amp = (k % 2 == 1) ? beta : eta;
        CHECK(est.k_terms[k - 3] == amp * std::pow(gamma, k - 2) / factorial(k));
        // The amplitude is the true maximum of |beta c_k| over a period.
        double peak = 0.0;
        for (int j = 0; j <= 400; ++j) {
            const double s = constants::two_pi * j / 400.0;
            peak = std::max(peak, std::abs(taylor_coefficient(k, beta, eta, s)));
        }
        peak = std::max(peak, std::abs(taylor_coefficient(
                                  k, beta, eta, constants::pi / 2.0)));
        CHECK(peak == Approx(amp).epsilon(1e-12));
    }
    // Successive terms shrink: the expansion is perturbative here.
    for (std::size_t i = 1; i < est.k_terms.size(); ++i) {
        CHECK(std::abs(est.k_terms[i]) < std::abs(est.k_terms[i - 1]));
    }
}

TEST_CASE("required junction count brackets the threshold") {
    CHECK(required_N(1.3, 0.08, 1000.0, 1.0) == 11);
    CHECK(required_N(1.3, 0.08, 1000.0, 0.01) == 33);
    CHECK(required_N(1.3, 0.08, 1000.0, 2e4) == 1);
    CHECK_THROWS_AS(required_N(1.3, 0.08, 1000.0, 0.0), ParamError);

    std::mt19937 rng(0xbadc0de);
    std::uniform_real_distribution<double> dg(0.5, 3.0);
    std::uniform_real_distribution<double> db(0.01, 0.2);
    std::uniform_real_distribution<double> dw(10.0, 2000.0);
    std::uniform_real_distribution<double> dt(1e-4, 10.0);
    for (int i = 0; i < 50; ++i) {
        const double g = dg(rng), b = db(rng), w = dw(rng), thr = dt(rng);
        const int n = required_N(g, b, w, thr);
        INFO("g=" << g << " b=" << b << " w=" << w << " thr=" << thr << " N=" << n);
        const double lm = correction_estimate(g, b, 0.0, w, n).leading_magnitude;
        CHECK(lm < thr);
        if (n > 1) {
            const double prev =
                correction_estimate(g, b, 0.0, w, n - 1).leading_magnitude;
            CHECK(prev >= thr);
        }
    }
}

TEST_CASE("estimates from a solved mode use its Wronskian") {
    const auto params = reference_system();
    const auto der = derive(params);
    const auto scaled = to_dimensionless(params);
    const auto sol = solve(HillCoefficient::mathieu(scaled.A, scaled.Q));
    const auto r = coupling_strength(sol, params);

    const auto est = leading_correction(params, sol);
    const auto direct = correction_estimate(r.gamma, der.beta, params.drive.eta,
                                            der.omega_0 / der.omega_i);
    CHECK(est.leading_magnitude == direct.leading_magnitude);
    CHECK(est.leading_magnitude == Approx(22218.0).epsilon(1e-3));

    const auto arr = junction_array(params, sol, 10);
    CHECK(arr.leading_magnitude == est.leading_magnitude / 1e4);
    CHECK(required_N(params, sol, 1.0) == 13);
    CHECK(required_N(params, sol, 1.0) ==
          required_N(r.gamma, der.beta, der.omega_0 / der.omega_i, 1.0));
    CHECK_THROWS_AS(junction_array(params, sol, 0), ParamError);
}

TEST_CASE("unstable modes cannot seed an estimate") {
    FloquetSolution skeleton;
    skeleton.stable = false;
    skeleton.mu_im = 0.01;
    const auto params = reference_system();
    CHECK_THROWS_AS(leading_correction(params, skeleton), UnstableError);
    CHECK_THROWS_AS(junction_array(params, skeleton, 4), UnstableError);
    CHECK_THROWS_AS(required_N(params, skeleton, 1.0), UnstableError);
}

TEST_CASE("dimensionless estimate rejects bad arguments") {
    CHECK_THROWS_AS(correction_estimate(0.0, 0.08, 0.06, 1000.0), ParamError);
    CHECK_THROWS_AS(correction_estimate(1.3, -0.1, 0.06, 1000.0), ParamError);
    CHECK_THROWS_AS(correction_estimate(1.3, 0.08, 0.06, 0.0), ParamError);
    CHECK_THROWS_AS(correction_estimate(1.3, 0.08, 0.06, 1000.0, 0), ParamError);
    CHECK_THROWS_AS(correction_estimate(1.3, 0.08, 0.06, 1000.0, 1, 2), ParamError);
}
