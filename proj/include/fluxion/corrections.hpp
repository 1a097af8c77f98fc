#pragma once

// Magnitude estimates for the nonlinear terms dropped by the quadratic
// circuit model: the Taylor coefficient functions beta c_k(t) of the cosine
// potential expanded around the driven trajectory, the leading second-order
// energy scale (gamma beta omega_0 / omega_i)^2 relative to hbar omega_i,
// and the junction-array rescaling beta -> beta/N, gamma -> gamma/N that
// suppresses the k = 3 term by exactly N^-4.
//
// Sign convention: beta c_k = +beta d^k/dx^k cos(x) evaluated on the drive
// trajectory x = arccos((eta/beta) cos s). This reproduces both anchor
// coefficients, beta c_3 = +sqrt(beta^2 - eta^2 cos^2 s) (positive root, the
// principal arccos branch keeps sin x >= 0) and beta c_4 = +eta cos s.

#include <cmath>
#include <cstdint>
#include <vector>

#include "coupling.hpp"
#include "errors.hpp"
#include "floquet.hpp"
#include "params.hpp"

namespace fluxion {

// beta c_k at drive phase s = omega_d t, for k >= 3.
inline double taylor_coefficient(int k, double beta, double eta, double drive_phase) {
    if (k < 3) throw ParamError("Taylor coefficients are defined for k >= 3");
    if (!(beta > 0.0)) throw ParamError("beta must be positive");
    if (!(eta >= 0.0) || eta > beta) {
        throw ParamError("eta must lie in [0, beta] for the trajectory to exist");
    }
    const double cos_x = (eta / beta) * std::cos(drive_phase);
    const double sin_x = std::sqrt(std::max(0.0, 1.0 - cos_x * cos_x));
    // d^k/dx^k cos cycles through {cos, -sin, -cos, sin}.
    switch (k & 3) {
        case 0: return beta * cos_x;
        case 1: return -beta * sin_x;
        case 2: return -beta * cos_x;
        default: return beta * sin_x;
    }
}

// beta c_k for k = 3..k_max at one drive phase.
inline std::vector<double> taylor_coefficients(double beta, double eta,
                                               double drive_phase, int k_max = 8) {
    if (k_max < 3) throw ParamError("k_max must be at least 3");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max - 2));
    for (int k = 3; k <= k_max; ++k) {
        out.push_back(taylor_coefficient(k, beta, eta, drive_phase));
    }
    return out;
}

struct CorrectionEstimate {
    double leading_magnitude = 0.0; // (gamma beta omega_0/omega_i / N^2)^2, units of hbar omega_i
    std::vector<double> k_terms;    // max_t |beta c_k| gamma^{k-2} / k!, k = 3..k_max
    int k_max = 8;
    int N = 1;
    double beta_rescaled = 0.0;  // beta / N
    double gamma_rescaled = 0.0; // gamma / N
};

namespace detail {

inline double ipow4(int n) {
    const std::int64_t n64 = n;
    return static_cast<double>(n64 * n64 * n64 * n64);
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Shared arithmetic core. The leading magnitude is computed once at N = 1
// and divided by the exact integer N^4, so the array rescaling is a single
// correctly rounded division.
inline CorrectionEstimate estimate_core(double gamma, double beta, double eta,
                                        double omega0_over_omegai, int n_junctions,
                                        int k_max) {
    if (!(gamma > 0.0)) throw ParamError("gamma must be positive");
    if (!(beta >= 0.0)) throw ParamError("beta must be nonnegative");
    if (!(omega0_over_omegai > 0.0)) throw ParamError("omega_0/omega_i must be positive");
    if (n_junctions < 1) throw ParamError("junction count must be at least 1");
    if (k_max < 3) throw ParamError("k_max must be at least 3");

    CorrectionEstimate e;
    e.k_max = k_max;
    e.N = n_junctions;
    e.beta_rescaled = beta / n_junctions;
    e.gamma_rescaled = gamma / n_junctions;
    const double base = gamma * beta * omega0_over_omegai;
    e.leading_magnitude = (base * base) / detail::ipow4(n_junctions);

    // Amplitudes of beta c_k over a drive period: beta for odd k (sin x peaks
    // at 1 whenever the modulation crosses zero), eta for even k.
    e.k_terms.reserve(static_cast<std::size_t>(k_max - 2));
    for (int k = 3; k <= k_max; ++k) {
        const double amp = (k % 2 == 1) ? e.beta_rescaled
                                        : (eta / n_junctions);
        e.k_terms.push_back(amp * std::pow(e.gamma_rescaled, k - 2) /
                            detail::factorial(k));
    }
    return e;
}

} // namespace detail

// Leading correction for a solved mode: gamma from its Wronskian.
inline CorrectionEstimate leading_correction(const SystemParams& params,
                                             const FloquetSolution& sol, int k_max = 8) {
    if (!sol.stable) {
        throw UnstableError("correction estimate undefined for an unstable mode",
                            sol.mu_im);
    }
    const DerivedQuantities der = derive(params);
    const double w_si = 0.5 * params.drive.omega_d * sol.wronskian;
    const double gamma = flux_parameter(der.c_sigma, w_si);
    return detail::estimate_core(gamma, der.beta, params.drive.eta,
                                 der.omega_0 / der.omega_i, 1, k_max);
}

// Same estimate on an N-junction array.
inline CorrectionEstimate junction_array(const SystemParams& params,
                                         const FloquetSolution& sol, int n_junctions,
                                         int k_max = 8) {
    if (n_junctions < 1) throw ParamError("junction count must be at least 1");
    if (!sol.stable) {
        throw UnstableError("correction estimate undefined for an unstable mode",
                            sol.mu_im);
    }
    const DerivedQuantities der = derive(params);
    const double w_si = 0.5 * params.drive.omega_d * sol.wronskian;
    const double gamma = flux_parameter(der.c_sigma, w_si);
    return detail::estimate_core(gamma, der.beta, params.drive.eta,
                                 der.omega_0 / der.omega_i, n_junctions, k_max);
}

// Dimensionless entry points for callers that already hold gamma.
inline CorrectionEstimate correction_estimate(double gamma, double beta, double eta,
                                              double omega0_over_omegai,
                                              int n_junctions = 1, int k_max = 8) {
    return detail::estimate_core(gamma, beta, eta, omega0_over_omegai, n_junctions,
                                 k_max);
}

// Smallest N with leading_magnitude(N) < threshold; satisfies
// leading_magnitude(N) < threshold <= leading_magnitude(N - 1) for N > 1.
inline int required_N(double gamma, double beta, double omega0_over_omegai,
                      double threshold) {
    if (!(threshold > 0.0)) throw ParamError("threshold must be positive");
    const double base = gamma * beta * omega0_over_omegai;
    const double lm1 = base * base;
    if (lm1 < threshold) return 1;
    int n = static_cast<int>(std::ceil(std::pow(lm1 / threshold, 0.25)));
    n = std::max(n, 1);
    while (lm1 / detail::ipow4(n) >= threshold) ++n;
    while (n > 1 && lm1 / detail::ipow4(n - 1) < threshold) --n;
    return n;
}

inline int required_N(const SystemParams& params, const FloquetSolution& sol,
                      double threshold) {
    if (!sol.stable) {
        throw UnstableError("correction estimate undefined for an unstable mode",
                            sol.mu_im);
    }
    const DerivedQuantities der = derive(params);
    const double w_si = 0.5 * params.drive.omega_d * sol.wronskian;
    return required_N(flux_parameter(der.c_sigma, w_si), der.beta,
                      der.omega_0 / der.omega_i, threshold);
}

} // namespace fluxion
