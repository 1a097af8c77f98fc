#pragma once

// Resonance bookkeeping and coupling strength between the driven circuit
// mode and the ion motional mode: the characteristic flux parameter gamma,
// the resonant spectral index k, the exchange rate Omega, the perturbative
// small-eta estimate, and the capacitive-modulation comparison Omega_cap.
//
// Unit conventions: Floquet quantities (mu, c_k, Wronskian) arrive in drive
// phase units u = omega_d t / 2; the SI Wronskian is W = (omega_d/2) W_u.
// Omega is invariant under the mu branch reduction: mu -> mu + 2 with
// k -> k - 1 leaves (mu + 2k) and the selected coefficient unchanged.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>

#include "constants.hpp"
#include "errors.hpp"
#include "floquet.hpp"
#include "hill.hpp"
#include "params.hpp"

namespace fluxion {

// gamma = (1/phi0_bar) sqrt(hbar / (2 C_sigma W)), the zero-point flux of the
// mode with Wronskian W relative to the reduced flux quantum.
inline double flux_parameter(double c_sigma, double w_si) {
    if (!(c_sigma > 0.0) || !(w_si > 0.0)) {
        throw ParamError("flux_parameter needs positive C_sigma and W");
    }
    return std::sqrt(constants::hbar / (2.0 * c_sigma * w_si)) / constants::phi0_bar;
}

// Q_0 = sqrt(hbar C_sigma W / 2), the zero-point charge of the same mode.
inline double characteristic_charge(double c_sigma, double w_si) {
    if (!(c_sigma > 0.0) || !(w_si > 0.0)) {
        throw ParamError("characteristic_charge needs positive C_sigma and W");
    }
    return std::sqrt(0.5 * constants::hbar * c_sigma * w_si);
}

struct ResonantIndex {
    int k = 0;
    double detuning = 0.0; // |(mu + 2k) - 2 omega_i / omega_d|
};

// Index k in [-k_max, k_max] whose sideband mu + 2k lies closest to the ion
// line 2 omega_i / omega_d.
inline ResonantIndex resonant_k(double mu, double omega_d, double omega_i,
                                int k_max = 8) {
    if (!(omega_d > 0.0)) throw ParamError("omega_d must be positive");
    if (!(omega_i >= 0.0)) throw ParamError("omega_i must be nonnegative");
    if (k_max < 0) throw ParamError("k_max must be nonnegative");
    const double target = 2.0 * omega_i / omega_d;
    ResonantIndex best;
    double best_abs = -1.0;
    for (int k = -k_max; k <= k_max; ++k) {
        const double det = std::abs((mu + 2.0 * k) - target);
        if (best_abs < 0.0 || det < best_abs) {
            best_abs = det;
            best.k = k;
            best.detuning = det;
        }
    }
    return best;
}

// Exchange rate in omega_0 = 1 units, shared by the SI report and the
// dynamics validation: Omega = (omega_d/4) kappa |mu + 2k| |c_k| /
// sqrt(omega_i W), with W the SI-convention Wronskian (omega_d/2) W_u.
inline double coupling_rate_scaled(double mu, int k, double c_k_abs, double omega_i,
                                   double omega_d, double kappa, double wronskian_u) {
    if (!(wronskian_u > 0.0)) throw ParamError("Wronskian must be positive");
    if (!(omega_i > 0.0)) throw ParamError("omega_i must be positive");
    const double w_si = 0.5 * omega_d * wronskian_u;
    return 0.25 * omega_d * kappa * std::abs(mu + 2.0 * k) * c_k_abs /
           std::sqrt(omega_i * w_si);
}

struct CouplingResult {
    int k = 0;
    double detuning = 0.0;       // |(mu + 2k) - 2 omega_i/omega_d|, dimensionless
    double gamma = 0.0;          // flux parameter at the driven-mode Wronskian
    std::complex<double> c_k;    // coefficient at the resonant index
    double Omega = 0.0;          // rad/s, drive-frequency form
    double Omega_resonant = 0.0; // rad/s, on-resonance form (omega_i/2) prefactor
    double Omega_cap = 0.0;      // rad/s, capacitive comparison at the same eta
    double Q_0 = 0.0;            // coulomb, characteristic charge at W = omega_0
    double mu = 0.0;
    double wronskian_si = 0.0;   // rad/s
    bool detuned = false;        // true when detuning spoils the exchange picture
};

// Coupling strength of a solved Floquet mode against the ion parameters:
// hbar |Omega| = (hbar omega_d / 4) (z_0 / d) xi gamma |mu + 2k| |c_k|.
// The relative difference between Omega and the on-resonance form equals the
// relative detuning.
inline CouplingResult coupling_strength(const FloquetSolution& sol,
                                        const SystemParams& params, int k_max = 8,
                                        double warn_factor = 0.1) {
    if (!sol.stable) {
        throw UnstableError("coupling strength undefined for an unstable mode",
                            sol.mu_im);
    }
    if (sol.f.empty()) throw ParamError("Floquet solution carries no samples");
    const DerivedQuantities der = derive(params);

    CouplingResult r;
    r.mu = sol.mu;
    const auto res = resonant_k(sol.mu, params.drive.omega_d, der.omega_i, k_max);
    r.k = res.k;
    r.detuning = res.detuning;

    std::complex<double> ck;
    const auto it = sol.coefficients.find(r.k);
    if (it != sol.coefficients.end()) {
        ck = it->second;
    } else {
        ck = fourier_coefficients(sol, r.k, r.k).at(r.k);
    }
    r.c_k = ck;

    r.wronskian_si = 0.5 * params.drive.omega_d * sol.wronskian;
    r.gamma = flux_parameter(der.c_sigma, r.wronskian_si);

    const double geometry = (der.z_0 / params.ion.d) * params.ion.xi;
    r.Omega = 0.25 * params.drive.omega_d * geometry * r.gamma *
              std::abs(sol.mu + 2.0 * r.k) * std::abs(ck);
    r.Omega_resonant = 0.5 * der.omega_i * geometry * r.gamma * std::abs(ck);

    r.Q_0 = characteristic_charge(der.c_sigma, der.omega_0);
    r.Omega_cap = (constants::elementary_charge * r.Q_0 /
                   (constants::hbar * der.c_sigma)) *
                  geometry * params.drive.eta;

    // The exchange picture needs the sideband mismatch, in angular frequency
    // (omega_d/2 per unit of u frequency), small against the coupling.
    r.detuned = r.detuning * 0.5 * params.drive.omega_d > warn_factor * r.Omega;
    return r;
}

struct PerturbativeCoupling {
    double Omega = 0.0;       // rad/s at the supplied eta
    double Omega_bound = 0.0; // rad/s at the stability-boundary estimate eta = 2 sqrt(ratio)
    double eta_bound = 0.0;
    double gamma_0 = 0.0;     // flux parameter of the undriven mode, W = omega_0
};

// Small-eta estimate hbar|Omega| = (hbar omega_i / 4)(z_0/d) xi gamma_0 eta,
// with the undriven-mode gamma_0. Linear in eta by construction.
inline PerturbativeCoupling perturbative_coupling(const SystemParams& params) {
    const DerivedQuantities der = derive(params);
    PerturbativeCoupling p;
    p.gamma_0 = flux_parameter(der.c_sigma, der.omega_0);
    p.eta_bound = 2.0 * std::sqrt(der.omega_i / der.omega_0);
    const double geometry = (der.z_0 / params.ion.d) * params.ion.xi;
    const double per_eta = 0.25 * der.omega_i * geometry * p.gamma_0;
    p.Omega = per_eta * params.drive.eta;
    p.Omega_bound = per_eta * p.eta_bound;
    return p;
}

struct CapacitiveComparison {
    double Omega_cap = 0.0; // rad/s
    double Q_0 = 0.0;       // coulomb
};

// hbar Omega_cap = (e Q_0 / C_sigma)(xi z_0 / d) eta with Q_0 at W = omega_0.
inline CapacitiveComparison capacitive_comparison(const SystemParams& params,
                                                  double eta) {
    if (!(eta >= 0.0)) throw ParamError("eta must be nonnegative");
    const DerivedQuantities der = derive(params);
    CapacitiveComparison c;
    c.Q_0 = characteristic_charge(der.c_sigma, der.omega_0);
    c.Omega_cap = (constants::elementary_charge * c.Q_0 /
                   (constants::hbar * der.c_sigma)) *
                  (der.z_0 / params.ion.d) * params.ion.xi * eta;
    return c;
}

// Full pipeline: scale, solve the Floquet problem at the operating point,
// evaluate the coupling.
inline CouplingResult evaluate_coupling(const SystemParams& params,
                                        std::size_t n_samples = 4096,
                                        double rtol = 1e-10, int k_max = 8) {
    const ScaledParams s = to_dimensionless(params);
    const FloquetSolution sol = solve(HillCoefficient::mathieu(s.A, s.Q), n_samples, rtol);
    return coupling_strength(sol, params, k_max);
}

} // namespace fluxion
