#pragma once

// Floquet analysis of the Hill equation f'' + P(u) f = 0, P(u + pi) = P(u):
// monodromy matrix, characteristic exponent mu, the positive-frequency mode
// f(u) = e^{i mu u} sum_k c_k e^{2iku}, its Fourier coefficients, and the
// polar (amplitude/phase) decomposition.
//
// Conventions, fixed across the library:
//   - mu is reduced to [0, 2) and the branch with positive Wronskian
//     W = Im(conj(f) f') > 0 is selected; (mu + 2k, c_k) pairs are invariant
//     under the reduction, only the labeling of k shifts.
//   - samples are taken at u_j = j pi / n_samples over one period.
//   - stability requires |tr M| < 2; |tr M| == 2 within eps_marginal carries a
//     marginal warning, and an exact 2 admits no mode and is refused.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "hill.hpp"
#include "ode.hpp"

#include <json.hpp>

namespace fluxion {

struct Monodromy {
    // Column j is the period map of the basis solution with f = delta_{0j},
    // f' = delta_{1j} at u = 0.
    double m00, m01, m10, m11;

    double trace() const noexcept { return m00 + m11; }
    double det() const noexcept { return m00 * m11 - m01 * m10; }
};

namespace detail {

template <typename Coeff>
inline void hill_rhs(const Coeff& p, double u, const State<4>& y, State<4>& dy) {
    const double pu = p(u);
    // y = (Re f, Im f, Re f', Im f')
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -pu * y[0];
    dy[3] = -pu * y[1];
}

} // namespace detail

// Integrate the two real basis solutions over one period u in [0, pi].
inline Monodromy monodromy(const HillCoefficient& p, double rtol = 1e-10,
                           double atol = 1e-12) {
    auto rhs = [&p](double u, const State<4>& y, State<4>& dy) {
        // Two real solutions packed as (f1, f2, f1', f2').
        const double pu = p(u);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -pu * y[0];
        dy[3] = -pu * y[1];
    };
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    const State<4> y1 = integrate_ode<4>(rhs, 0.0, constants::pi, {1.0, 0.0, 0.0, 1.0}, opts);
    return Monodromy{y1[0], y1[1], y1[2], y1[3]};
}

struct FloquetSolution {
    double mu = 0.0;        // characteristic exponent, reduced to [0, 2)
    double mu_im = 0.0;     // growth exponent per pi of phase when unstable
    bool stable = false;
    bool marginal = false;  // |trace| within eps_marginal of 2
    double trace = 0.0;
    double wronskian = 0.0; // Im(conj(f) f') in phase units, constant in u
    std::size_t n_samples = 0;
    std::vector<std::complex<double>> f;  // f(u_j), u_j = j pi / n_samples
    std::vector<std::complex<double>> df; // f'(u_j)
    std::map<int, std::complex<double>> coefficients; // c_k over the stored window
};

namespace detail {

struct Exponent {
    double mu;
    double mu_im;
    bool stable;
    bool marginal;
    double trace;
    std::complex<double> lambda;
    std::complex<double> df0; // f'(0) for f(0) = 1, positive-Wronskian branch
};

// Characteristic exponent and mode initial slope from a monodromy matrix.
inline Exponent exponent_of(const Monodromy& m, double eps_marginal) {
    Exponent e{};
    e.trace = m.trace();
    const double abs_tr = std::abs(e.trace);
    e.marginal = std::abs(2.0 - abs_tr) < eps_marginal;
    if (abs_tr == 2.0) {
        throw MarginalError("|trace| = 2 exactly: no unique periodic mode exists");
    }
    if (abs_tr > 2.0) {
        e.stable = false;
        e.mu_im = std::acosh(abs_tr / 2.0) / constants::pi;
        e.mu = (e.trace < 0.0) ? 1.0 : 0.0; // e^{i mu pi} carries the sign
        e.lambda = 0.0;
        e.df0 = 0.0;
        return e;
    }
    e.stable = true;
    const double disc = std::sqrt(4.0 - e.trace * e.trace);
    std::complex<double> lambda(e.trace / 2.0, disc / 2.0);

    // Eigenvector (1, df0): take the better conditioned of the two row forms.
    const std::complex<double> den_b = lambda - m.m11;
    std::complex<double> df0;
    if (std::abs(m.m01) >= std::abs(den_b)) {
        df0 = (lambda - m.m00) / m.m01;
    } else {
        df0 = m.m10 / den_b;
    }
    // Positive-Wronskian branch: W(0) = Im(df0) for f(0) = 1.
    if (df0.imag() < 0.0) {
        lambda = std::conj(lambda);
        df0 = std::conj(df0);
    }
    if (df0.imag() == 0.0) {
        throw MarginalError("monodromy admits no complex mode: marginal point");
    }
    double mu = std::atan2(lambda.imag(), lambda.real()) / constants::pi;
    if (mu < 0.0) mu += 2.0;
    e.mu = mu;
    e.lambda = lambda;
    e.df0 = df0;
    return e;
}

} // namespace detail

// Characteristic exponent only (no mode sampling); cheap enough for root
// finding and stability scans.
inline detail::Exponent characteristic_exponent(const HillCoefficient& p,
                                                double rtol = 1e-10, double atol = 1e-12,
                                                double eps_marginal = 1e-6) {
    return detail::exponent_of(monodromy(p, rtol, atol), eps_marginal);
}

// Full Floquet mode: exponent, sampled f and f', Fourier coefficients.
// Throws UnstableError inside a resonance tongue unless allow_unstable, in
// which case the returned skeleton carries the exponent but no samples.
inline FloquetSolution solve(const HillCoefficient& p, std::size_t n_samples = 4096,
                             double rtol = 1e-10, double atol = 1e-12,
                             bool allow_unstable = false, double eps_marginal = 1e-6,
                             int k_window = 40) {
    if (n_samples < 4) throw ParamError("n_samples must be at least 4");
    const auto ex = detail::exponent_of(monodromy(p, rtol, atol), eps_marginal);

    FloquetSolution sol;
    sol.mu = ex.mu;
    sol.mu_im = ex.mu_im;
    sol.stable = ex.stable;
    sol.marginal = ex.marginal;
    sol.trace = ex.trace;

    if (!ex.stable) {
        if (!allow_unstable) {
            throw UnstableError("operating point is parametrically unstable, growth " +
                                    std::to_string(ex.mu_im) + " per pi of phase",
                                ex.mu_im);
        }
        return sol;
    }

    sol.n_samples = n_samples;
    sol.f.resize(n_samples);
    sol.df.resize(n_samples);

    auto rhs = [&p](double u, const State<4>& y, State<4>& dy) {
        detail::hill_rhs(p, u, y, dy);
    };
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    Dop853<4, decltype(rhs)> stepper(rhs, 0.0, {1.0, 0.0, ex.df0.real(), ex.df0.imag()},
                                     opts);
    const double du = constants::pi / static_cast<double>(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j) {
        stepper.advance_to(j * du);
        const auto& y = stepper.y();
        sol.f[j] = {y[0], y[1]};
        sol.df[j] = {y[2], y[3]};
    }
    sol.wronskian = ex.df0.imag(); // Im(conj(f) f') at u = 0, f(0) = 1

    const int kw = std::min<int>(k_window, static_cast<int>(n_samples) / 2 - 1);
    for (int k = -kw; k <= kw; ++k) {
        sol.coefficients[k] = 0.0; // filled below
    }
    // c_k = (1/n) sum_j f(u_j) e^{-i mu u_j} e^{-2ik u_j}; the twiddle
    // e^{-2ik u_j} = e^{-2 pi i (k j mod n) / n} is looked up exactly.
    std::vector<std::complex<double>> detrended(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j) {
        const double phase = -sol.mu * (j * du);
        detrended[j] = sol.f[j] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    std::vector<std::complex<double>> twiddle(n_samples);
    for (std::size_t m = 0; m < n_samples; ++m) {
        const double phase = -constants::two_pi * static_cast<double>(m) /
                             static_cast<double>(n_samples);
        twiddle[m] = {std::cos(phase), std::sin(phase)};
    }
    const long long n = static_cast<long long>(n_samples);
    for (auto& [k, ck] : sol.coefficients) {
        std::complex<double> acc = 0.0;
        for (long long j = 0; j < n; ++j) {
            long long m = (static_cast<long long>(k) * j) % n;
            if (m < 0) m += n;
            acc += detrended[static_cast<std::size_t>(j)] * twiddle[static_cast<std::size_t>(m)];
        }
        ck = acc / static_cast<double>(n);
    }
    return sol;
}

// Recompute coefficients over an arbitrary window from the stored samples.
inline std::map<int, std::complex<double>> fourier_coefficients(const FloquetSolution& sol,
                                                                int k_min, int k_max) {
    if (k_min > k_max) throw ParamError("empty coefficient window");
    if (sol.f.empty()) throw ParamError("solution carries no samples");
    const long long n = static_cast<long long>(sol.n_samples);
    const int nyquist = static_cast<int>(n / 2);
    if (k_min <= -nyquist || k_max >= nyquist) {
        throw ResolutionError("coefficient index |k| must stay below n_samples / 2");
    }
    const double du = constants::pi / static_cast<double>(n);
    std::vector<std::complex<double>> detrended(sol.n_samples);
    for (std::size_t j = 0; j < sol.n_samples; ++j) {
        const double phase = -sol.mu * (j * du);
        detrended[j] = sol.f[j] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    std::vector<std::complex<double>> twiddle(sol.n_samples);
    for (std::size_t m = 0; m < sol.n_samples; ++m) {
        const double phase = -constants::two_pi * static_cast<double>(m) /
                             static_cast<double>(sol.n_samples);
        twiddle[m] = {std::cos(phase), std::sin(phase)};
    }
    std::map<int, std::complex<double>> out;
    for (int k = k_min; k <= k_max; ++k) {
        std::complex<double> acc = 0.0;
        for (long long j = 0; j < n; ++j) {
            long long m = (static_cast<long long>(k) * j) % n;
            if (m < 0) m += n;
            acc += detrended[static_cast<std::size_t>(j)] * twiddle[static_cast<std::size_t>(m)];
        }
        out[k] = acc / static_cast<double>(n);
    }
    return out;
}

// JSON round trip. Complex samples serialize as [re, im] pairs; doubles are
// emitted in shortest-exact form, so deserialization reproduces every field
// bit for bit.
inline nlohmann::ordered_json to_json(const FloquetSolution& sol) {
    nlohmann::ordered_json j;
    j["mu"] = sol.mu;
    j["mu_im"] = sol.mu_im;
    j["stable"] = sol.stable;
    j["marginal"] = sol.marginal;
    j["trace"] = sol.trace;
    j["wronskian"] = sol.wronskian;
    j["n_samples"] = sol.n_samples;
    auto pack = [](const std::vector<std::complex<double>>& v) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& z : v) arr.push_back({z.real(), z.imag()});
        return arr;
    };
    j["f"] = pack(sol.f);
    j["df"] = pack(sol.df);
    nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
    for (const auto& [k, c] : sol.coefficients) {
        coeffs.push_back({static_cast<double>(k), c.real(), c.imag()});
    }
    j["coefficients"] = coeffs;
    return j;
}

inline FloquetSolution solution_from_json(const nlohmann::json& j) {
    FloquetSolution sol;
    try {
        sol.mu = j.at("mu").get<double>();
        sol.mu_im = j.at("mu_im").get<double>();
        sol.stable = j.at("stable").get<bool>();
        sol.marginal = j.at("marginal").get<bool>();
        sol.trace = j.at("trace").get<double>();
        sol.wronskian = j.at("wronskian").get<double>();
        sol.n_samples = j.at("n_samples").get<std::size_t>();
        auto unpack = [](const nlohmann::json& arr) {
            std::vector<std::complex<double>> v;
            v.reserve(arr.size());
            for (const auto& pair : arr) {
                v.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
            }
            return v;
        };
        sol.f = unpack(j.at("f"));
        sol.df = unpack(j.at("df"));
        for (const auto& entry : j.at("coefficients")) {
            const int k = static_cast<int>(entry.at(0).get<double>());
            sol.coefficients[k] = {entry.at(1).get<double>(), entry.at(2).get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParamError(std::string("malformed Floquet solution document: ") + e.what());
    }
    return sol;
}

struct PolarDecomposition {
    std::vector<double> r;     // |f|, r(0) = 1
    std::vector<double> theta; // arg f, unwrapped from theta(0) = 0
    std::vector<double> chi;   // (c_sigma/2) (dr/dt) / r
    std::vector<double> big_f; // (1/2) log r
};

// Amplitude/phase split f = r e^{i theta}. The phase obeys r^2 theta' = W
// pointwise; the amplitude velocity r' = Re(conj(f) f') / r comes from the
// stored derivative samples, not finite differences. chi is reported against
// laboratory time t = 2u / omega_d; the default scales reduce it to
// d(log r)/du.
inline PolarDecomposition polar(const FloquetSolution& sol, double c_sigma = 2.0,
                                double omega_d = 2.0) {
    if (sol.f.empty()) throw ParamError("solution carries no samples");
    PolarDecomposition pd;
    const std::size_t n = sol.n_samples;
    pd.r.resize(n);
    pd.theta.resize(n);
    pd.chi.resize(n);
    pd.big_f.resize(n);
    const double chi_scale = 0.25 * c_sigma * omega_d; // (c_sigma/2) dt->du
    double prev = 0.0;
    double offset = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto f = sol.f[j];
        const auto df = sol.df[j];
        const double r2 = std::norm(f);
        if (r2 == 0.0) {
            throw NumericalError("mode modulus vanished: polar decomposition undefined");
        }
        pd.r[j] = std::sqrt(r2);
        double th = std::atan2(f.imag(), f.real());
        if (j > 0) {
            while (th + offset - prev > constants::pi) offset -= constants::two_pi;
            while (th + offset - prev < -constants::pi) offset += constants::two_pi;
        }
        th += offset;
        pd.theta[j] = th;
        prev = th;
        const double r_prime_over_r = (f.real() * df.real() + f.imag() * df.imag()) / r2;
        pd.chi[j] = chi_scale * r_prime_over_r;
        pd.big_f[j] = 0.5 * std::log(pd.r[j]);
    }
    return pd;
}

} // namespace fluxion
