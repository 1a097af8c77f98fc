#pragma once

// Classical flux trajectory that realizes a sinusoidal inductance modulation,
// beta cos(phi_c / phi0_bar) = eta cos(omega_d t), the external flux program
// phi_x(t) that produces it, and a round-trip verification that integrates
// the nonlinear classical equation driven by phi_x and checks the modulation
// identity.
//
// All closed forms are written in the drive phase s = omega_d t and the
// dimensionless angle x = phi_c / phi0_bar = arccos((eta/beta) cos s):
//   x'  = (eta/beta) sin s / sqrt(1 - (eta/beta)^2 cos^2 s)
//   x'' = (eta/beta) (1 - (eta/beta)^2) cos s / (1 - (eta/beta)^2 cos^2 s)^{3/2}
//   phi_x / phi0_bar = x + beta sin x + (omega_d/omega_0)^2 x''
// Analytic derivatives are used throughout: the flux program needs a second
// derivative, and differentiating sampled data would dominate the error
// budget. The principal arccos branch is safe because the guard keeps the
// argument strictly inside (-1, 1).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "ode.hpp"

namespace fluxion {

// eta >= 0.99 beta degenerates toward a sawtooth with unbounded x''.
inline void check_drive_strength(double eta, double beta) {
    if (!(beta > 0.0)) throw ParamError("beta must be positive");
    if (!(eta >= 0.0)) throw ParamError("eta must be nonnegative");
    if (eta >= 0.99 * beta) {
        throw DriveError("modulation eta = " + std::to_string(eta) +
                         " too strong for beta = " + std::to_string(beta) +
                         ": the trajectory degenerates toward a sawtooth");
    }
}

inline double drive_angle(double eta, double beta, double s) {
    return std::acos((eta / beta) * std::cos(s));
}

inline double drive_angle_d1(double eta, double beta, double s) {
    const double e = eta / beta;
    const double c = std::cos(s);
    return e * std::sin(s) / std::sqrt(1.0 - e * e * c * c);
}

inline double drive_angle_d2(double eta, double beta, double s) {
    const double e = eta / beta;
    const double c = std::cos(s);
    const double den = 1.0 - e * e * c * c;
    return e * (1.0 - e * e) * c / (den * std::sqrt(den));
}

// phi_x / phi0_bar as a function of drive phase.
inline double applied_flux(double eta, double beta, double omega_d_over_omega_0,
                           double s) {
    const double x = drive_angle(eta, beta, s);
    return x + beta * std::sin(x) +
           omega_d_over_omega_0 * omega_d_over_omega_0 * drive_angle_d2(eta, beta, s);
}

struct ClassicalDrive {
    double eta = 0.0;
    double beta = 0.0;
    double omega_d = 0.0;  // rad/s
    double c_sigma = 0.0;  // F
    double omega_0 = 0.0;  // rad/s; set once phi_x is synthesized
    std::vector<double> t_over_tau; // sample times over one period, t / tau in [0, 1)
    std::vector<double> phi_c;      // phi_c / phi0_bar
    std::vector<double> q_c;        // C_sigma d(phi_c)/dt, coulomb
    std::vector<double> phi_x;      // phi_x / phi0_bar; empty until synthesized
};

// Closed-form trajectory over one drive period.
inline ClassicalDrive classical_solution(double eta, double beta, double omega_d,
                                         double c_sigma, std::size_t n_samples = 4096) {
    check_drive_strength(eta, beta);
    if (!(omega_d > 0.0)) throw ParamError("omega_d must be positive");
    if (!(c_sigma > 0.0)) throw ParamError("c_sigma must be positive");
    if (n_samples < 4) throw ParamError("n_samples must be at least 4");
    ClassicalDrive d;
    d.eta = eta;
    d.beta = beta;
    d.omega_d = omega_d;
    d.c_sigma = c_sigma;
    d.t_over_tau.resize(n_samples);
    d.phi_c.resize(n_samples);
    d.q_c.resize(n_samples);
    const double q_scale = c_sigma * constants::phi0_bar * omega_d;
    for (std::size_t j = 0; j < n_samples; ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(n_samples);
        const double s = constants::two_pi * frac;
        d.t_over_tau[j] = frac;
        d.phi_c[j] = drive_angle(eta, beta, s);
        d.q_c[j] = q_scale * drive_angle_d1(eta, beta, s);
    }
    return d;
}

// Fill in the external flux program that sustains the trajectory.
inline ClassicalDrive synthesize_flux(ClassicalDrive d, double omega_0) {
    if (!(omega_0 > 0.0)) throw ParamError("omega_0 must be positive");
    if (d.phi_c.empty()) throw ParamError("classical solution not computed");
    d.omega_0 = omega_0;
    const double w = d.omega_d / omega_0;
    d.phi_x.resize(d.phi_c.size());
    for (std::size_t j = 0; j < d.phi_c.size(); ++j) {
        const double s = constants::two_pi * d.t_over_tau[j];
        d.phi_x[j] = applied_flux(d.eta, d.beta, w, s);
    }
    return d;
}

// Round-trip check: first every stored phi_x sample is compared against the
// closed form (a corrupted program must not verify), then the nonlinear
// classical equation driven by the closed-form phi_x is integrated over the
// requested number of periods and the modulation identity
// beta cos x = eta cos s is evaluated on the way. Returns the worst residual;
// throws when it exceeds tol.
inline double verify_roundtrip(const ClassicalDrive& d, double omega_0,
                               std::size_t periods = 10, double tol = 1e-6,
                               double rtol = 1e-10) {
    if (d.phi_x.empty()) throw ParamError("flux program not synthesized");
    if (!(omega_0 > 0.0)) throw ParamError("omega_0 must be positive");
    if (periods == 0) throw ParamError("periods must be positive");

    const double w = d.omega_d / omega_0;
    double residual = 0.0;
    for (std::size_t j = 0; j < d.phi_x.size(); ++j) {
        const double s = constants::two_pi * d.t_over_tau[j];
        residual = std::max(residual,
                            std::abs(d.phi_x[j] - applied_flux(d.eta, d.beta, w, s)));
    }

    // x'' = (omega_0/omega_d)^2 (phi_x(s) - x - beta sin x), in drive phase.
    const double inv_w2 = 1.0 / (w * w);
    auto rhs = [&](double s, const State<2>& y, State<2>& dy) {
        dy[0] = y[1];
        dy[1] = inv_w2 *
                (applied_flux(d.eta, d.beta, w, s) - y[0] - d.beta * std::sin(y[0]));
    };
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-2;
    Dop853<2, decltype(rhs)> stepper(rhs, 0.0,
                                     {drive_angle(d.eta, d.beta, 0.0), 0.0}, opts);
    const std::size_t per_period = std::max<std::size_t>(d.phi_x.size(), 64);
    const double ds = constants::two_pi / static_cast<double>(per_period);
    const std::size_t total = per_period * periods;
    for (std::size_t j = 1; j <= total; ++j) {
        const double s = ds * static_cast<double>(j);
        stepper.advance_to(s);
        const double mismatch =
            std::abs(d.beta * std::cos(stepper.y()[0]) - d.eta * std::cos(s));
        residual = std::max(residual, mismatch);
    }
    if (residual > tol) {
        throw NumericalError("flux program failed round-trip verification: residual " +
                             std::to_string(residual));
    }
    return residual;
}

} // namespace fluxion
