// Release gate: twelve numbered checks against the documented performance
// targets of the toolkit. Each invocation `acceptance <n>` runs one check and
// prints a single [PASS]/[FAIL] line with the measured values; the exit code
// mirrors the verdict. With no argument all checks run in order.
//
// Checks that miss their target are reported honestly: the measured value and
// the required band are both printed so the gap is visible in the log.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "fluxion/fluxion.hpp"

namespace {

using namespace fluxion;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// 01: flux-to-phase conversion factor of the bare mode, C_sigma = 46 fF at
// 2 pi x 1 GHz, required to land within 1.30 +/- 0.05.
Verdict check_flux_parameter() {
    const double gamma = flux_parameter(46e-15, constants::two_pi * 1e9);
    Verdict v;
    v.pass = std::abs(gamma - 1.30) <= 0.05;
    v.detail = fmt("gamma = %.10f (band 1.25..1.35)", gamma);
    return v;
}

// 02: ion zero-point length at the reference mass and mode frequency,
// required to land within 25 +/- 1 nm.
Verdict check_zero_point_motion() {
    const DerivedQuantities der = derive(reference_system());
    const double z0_nm = der.z_0 * 1e9;
    Verdict v;
    v.pass = z0_nm >= 24.0 && z0_nm <= 26.0;
    v.detail = fmt("z_0 = %.4f nm (band 24..26 nm)", z0_nm);
    return v;
}

// 03: full sideband pipeline at the reference circuit with eta raised to the
// parametric-boundary estimate 2 sqrt(omega_i/omega_0); the exchange rate is
// required to land in [0.5, 2] Hz.
Verdict check_exchange_rate_scale() {
    SystemParams p = reference_system();
    const DerivedQuantities der = derive(p);
    p.drive.eta = 2.0 * std::sqrt(der.omega_i / der.omega_0);
    const CouplingResult r = evaluate_coupling(p);
    const double hz = r.Omega / constants::two_pi;
    Verdict v;
    v.pass = hz >= 0.5 && hz <= 2.0;
    v.detail = fmt("Omega = %.4f Hz at eta = %.6f (band 0.5..2 Hz; resonant form %.4f Hz)",
                   hz, p.drive.eta, r.Omega_resonant / constants::two_pi);
    return v;
}

// 04: closed-form small-eta rate vs the full pipeline at a quarter of the
// stability boundary; relative difference must stay below 10%.
Verdict check_perturbative_limit() {
    SystemParams p = reference_system();
    const DerivedQuantities der = derive(p);
    const double ratio = der.omega_i / der.omega_0;
    p.drive.eta = 0.25 * boundary_eta(ratio);
    const CouplingResult full = evaluate_coupling(p);
    const PerturbativeCoupling pert = perturbative_coupling(p);
    const double rel = std::abs(full.Omega - pert.Omega) / full.Omega;
    Verdict v;
    v.pass = rel < 0.10;
    v.detail = fmt("relative difference %.4f%% at eta = %.8f (bound 10%%)", 100.0 * rel,
                   p.drive.eta);
    return v;
}

// 05: bisected instability thresholds at three frequency ratios within 10% of
// the square-root estimate 2 sqrt(ratio); the reference operating point
// (ratio 1e-3, eta 0.06) must classify stable.
Verdict check_stability_boundaries() {
    const double ratios[] = {1e-3, 4e-3, 1e-2};
    double worst = 0.0;
    for (const double r : ratios) {
        const double estimate = 2.0 * std::sqrt(r);
        const double dev = std::abs(boundary_eta(r) - estimate) / estimate;
        worst = std::max(worst, dev);
    }
    const bool ref_stable = is_stable(1e-3, 0.06).stable;
    Verdict v;
    v.pass = worst <= 0.10 && ref_stable;
    v.detail = fmt("worst deviation from 2 sqrt(ratio) = %.4f%% (bound 10%%); "
                   "reference point stable = %d",
                   100.0 * worst, ref_stable ? 1 : 0);
    return v;
}

// 06: the default 50x50 stability map finishes inside 60 s and every cell
// agrees with an independent single-point classification.
Verdict check_stability_map_runtime() {
    const GridSpec grid;
    const auto t0 = std::chrono::steady_clock::now();
    const StabilityMap map = stability_map(grid);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t mismatches = 0;
    std::size_t n_unstable = 0;
    for (const auto& cell : map.cells) {
        if (is_stable(cell.ratio, cell.eta).stable != cell.stable) ++mismatches;
        if (!cell.stable) ++n_unstable;
    }
    Verdict v;
    v.pass = seconds < 60.0 && mismatches == 0;
    v.detail = fmt("%zu cells in %.2f s (bound 60 s), %zu unstable, %zu mismatches",
                   map.cells.size(), seconds, n_unstable, mismatches);
    return v;
}

// 07: synthesized flux program at eta 0.06, beta 0.08, omega_d 0.999 omega_0
// replayed through the circuit equation for 10 periods reproduces the target
// modulation to 1e-6.
Verdict check_drive_roundtrip() {
    ClassicalDrive d = classical_solution(0.06, 0.08, 0.999, 1.0, 4096);
    d = synthesize_flux(d, 1.0);
    Verdict v;
    try {
        const double residual = verify_roundtrip(d, 1.0, 10, 1e-6);
        v.pass = true;
        v.detail = fmt("max residual %.3e over 10 periods (bound 1e-6)", residual);
    } catch (const NumericalError& e) {
        v.pass = false;
        v.detail = fmt("round trip failed: %s", e.what());
    }
    return v;
}

// 08: structural invariants over 100 random stable operating points:
// unit-determinant propagator (1e-9), Floquet quasi-periodicity (1e-6),
// Wronskian conservation across 100 periods (1e-8), and coefficient
// normalization (1e-6).
Verdict check_floquet_invariants() {
    std::mt19937_64 rng(0x5eedf10e7ull);
    std::uniform_real_distribution<double> draw_a(0.3, 12.0);
    std::uniform_real_distribution<double> draw_q(-0.35, 0.35);

    double worst_det = 0.0, worst_qp = 0.0, worst_wr = 0.0, worst_sum = 0.0;
    int accepted = 0, attempts = 0;
    while (accepted < 100 && attempts < 3000) {
        ++attempts;
        const double a = draw_a(rng);
        const double q = draw_q(rng);
        const HillCoefficient hill = HillCoefficient::mathieu(a, q);
        FloquetSolution sol;
        try {
            sol = solve(hill, 1024, 1e-10, 1e-12, false, 1e-6, 30);
        } catch (const UnstableError&) {
            continue;
        } catch (const MarginalError&) {
            continue;
        }
        if (sol.marginal) continue;
        ++accepted;

        const Monodromy m = monodromy(hill);
        worst_det = std::max(worst_det, std::abs(m.det() - 1.0));

        // f(u + pi) = exp(i mu pi) f(u), applied through the propagator.
        const std::complex<double> lam = std::polar(1.0, sol.mu * constants::pi);
        const std::complex<double> f0 = sol.f.front();
        const std::complex<double> df0 = sol.df.front();
        const std::complex<double> r0 = m.m00 * f0 + m.m01 * df0 - lam * f0;
        const std::complex<double> r1 = m.m10 * f0 + m.m11 * df0 - lam * df0;
        const double scale = std::max(std::abs(f0), std::abs(df0));
        worst_qp = std::max(worst_qp, std::max(std::abs(r0), std::abs(r1)) / scale);

        auto rhs = [&hill](double u, const State<4>& y, State<4>& dy) {
            const double p = hill(u);
            dy[0] = y[1];
            dy[1] = -p * y[0];
            dy[2] = y[3];
            dy[3] = -p * y[2];
        };
        const State<4> end =
            integrate_ode<4>(rhs, 0.0, 100.0 * constants::pi, State<4>{1.0, 0.0, 0.0, 1.0});
        worst_wr = std::max(worst_wr, std::abs(end[0] * end[3] - end[1] * end[2] - 1.0));

        std::complex<double> sum = 0.0;
        for (const auto& [k, c] : sol.coefficients) sum += c;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }

    Verdict v;
    v.pass = accepted == 100 && worst_det <= 1e-9 && worst_qp <= 1e-6 &&
             worst_wr <= 1e-8 && worst_sum <= 1e-6;
    v.detail = fmt("%d points: |det-1| %.2e (1e-9), quasi-periodicity %.2e (1e-6), "
                   "100-period Wronskian drift %.2e (1e-8), |sum c_k - 1| %.2e (1e-6)",
                   accepted, worst_det, worst_qp, worst_wr, worst_sum);
    return v;
}

// 09: weak-drive sideband weight just below the second band edge: c_{-1}
// matches Q/4 within 5% for |Q| <= 0.02.
Verdict check_fourier_weight_near_resonance() {
    const double as[] = {3.84, 3.90, 3.96};
    const double qs[] = {-0.02, -0.01, 0.01, 0.02};
    double worst = 0.0;
    for (const double a : as) {
        for (const double q : qs) {
            const FloquetSolution sol = solve(HillCoefficient::mathieu(a, q), 2048);
            const std::complex<double> c = fourier_coefficients(sol, -1, -1).at(-1);
            const double ref = q / 4.0;
            worst = std::max(worst, std::abs(c - ref) / std::abs(ref));
        }
    }
    Verdict v;
    v.pass = worst <= 0.05;
    v.detail = fmt("worst |c_-1 - Q/4| / |Q/4| = %.4f%% over 12 points (bound 5%%)",
                   100.0 * worst);
    return v;
}

// 10: time-domain exchange at scaled ratios 1/50 and 1/100 with the drive
// retuned onto the sideband: measured rate within 5% of the prediction at
// half and quarter boundary depth, and the half/quarter rate ratio within
// 2 +/- 0.1.
Verdict check_exchange_validation() {
    ValidationOptions opts;
    const double b50 = boundary_eta(0.02);
    const double b100 = boundary_eta(0.01);
    const ExchangeReport half50 = rwa_validate(0.02, 0.5 * b50, 3e-4, opts);
    const ExchangeReport quarter50 = rwa_validate(0.02, 0.25 * b50, 3e-4, opts);
    const ExchangeReport half100 = rwa_validate(0.01, 0.5 * b100, 1e-4, opts);

    const double worst_rel = std::max(
        {half50.relative_error, quarter50.relative_error, half100.relative_error});
    const double lin = half50.Omega_measured / quarter50.Omega_measured;
    Verdict v;
    const bool rel_ok = worst_rel <= 0.05;
    const bool lin_ok = lin >= 1.9 && lin <= 2.1;
    v.pass = rel_ok && lin_ok;
    v.detail = fmt("relative errors %.2e / %.2e / %.2e (bound 5%%); "
                   "Omega(eta)/Omega(eta/2) = %.4f (band 1.9..2.1)",
                   half50.relative_error, quarter50.relative_error,
                   half100.relative_error, lin);
    return v;
}

// 11: capacitive coupling at the same modulation depth beats the inductive
// rate by more than 1e3 and sits within one order of magnitude of
// 2 pi x 60 kHz.
Verdict check_capacitive_comparison() {
    SystemParams p = reference_system();
    const DerivedQuantities der = derive(p);
    const double eta = 2.0 * std::sqrt(der.omega_i / der.omega_0);
    p.drive.eta = eta;
    const CouplingResult full = evaluate_coupling(p);
    const CapacitiveComparison cap = capacitive_comparison(p, eta);

    const double contrast = cap.Omega_cap / full.Omega;
    const double ref = constants::two_pi * 60e3;
    const double factor =
        std::max(cap.Omega_cap, ref) / std::min(cap.Omega_cap, ref);
    Verdict v;
    v.pass = contrast > 1e3 && factor <= 10.0;
    v.detail = fmt("Omega_cap / Omega = %.1f (bound > 1e3); Omega_cap = 2 pi x %.2f kHz, "
                   "%.2fx from 2 pi x 60 kHz (bound 10x)",
                   contrast, cap.Omega_cap / constants::two_pi / 1e3, factor);
    return v;
}

// 12: junction-expansion identities: normalized c_3^2 + c_4^2 = 1 pointwise
// to 1e-12, leading correction magnitude near 1.08e4 at gamma 1.3, beta 0.08,
// frequency ratio 1e3, and exact N^-4 rescaling for an array of 100.
Verdict check_correction_magnitude() {
    const double beta = 0.08, eta = 0.06;
    double worst = 0.0;
    for (int i = 0; i < 629; ++i) {
        const double s = 0.01 * static_cast<double>(i);
        const double t3 = taylor_coefficient(3, beta, eta, s);
        const double t4 = taylor_coefficient(4, beta, eta, s);
        worst = std::max(worst, std::abs((t3 * t3 + t4 * t4) / (beta * beta) - 1.0));
    }
    const CorrectionEstimate single = correction_estimate(1.3, beta, eta, 1000.0, 1);
    const CorrectionEstimate arrayed = correction_estimate(1.3, beta, eta, 1000.0, 100);
    const double lead = single.leading_magnitude;
    const bool lead_ok = std::abs(lead - 1.08e4) / 1.08e4 <= 0.02;
    const bool rescale_ok = arrayed.leading_magnitude == single.leading_magnitude / 1e8;
    Verdict v;
    v.pass = worst <= 1e-12 && lead_ok && rescale_ok;
    v.detail = fmt("identity defect %.2e (1e-12); leading %.1f (1.08e4 +/- 2%%); "
                   "N = 100 rescale exact = %d",
                   worst, lead, rescale_ok ? 1 : 0);
    return v;
}

struct Entry {
    const char* name;
    Verdict (*fn)();
};

const Entry kChecks[] = {
    {"flux_parameter", check_flux_parameter},
    {"zero_point_motion", check_zero_point_motion},
    {"exchange_rate_scale", check_exchange_rate_scale},
    {"perturbative_limit", check_perturbative_limit},
    {"stability_boundaries", check_stability_boundaries},
    {"stability_map_runtime", check_stability_map_runtime},
    {"drive_roundtrip", check_drive_roundtrip},
    {"floquet_invariants", check_floquet_invariants},
    {"fourier_weight_near_resonance", check_fourier_weight_near_resonance},
    {"exchange_validation", check_exchange_validation},
    {"capacitive_comparison", check_capacitive_comparison},
    {"correction_magnitude", check_correction_magnitude},
};
constexpr int kNumChecks = static_cast<int>(sizeof(kChecks) / sizeof(kChecks[0]));

int run_one(int index) {
    const Entry& e = kChecks[index - 1];
    Verdict v;
    try {
        v = e.fn();
    } catch (const std::exception& ex) {
        v.pass = false;
        v.detail = fmt("unexpected exception: %s", ex.what());
    }
    std::printf("[%s] %02d %s: %s\n", v.pass ? "PASS" : "FAIL", index, e.name,
                v.detail.c_str());
    std::fflush(stdout);
    return v.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 2) {
        std::fprintf(stderr, "usage: acceptance [1..%d]\n", kNumChecks);
        return 2;
    }
    if (argc == 2) {
        const int index = std::atoi(argv[1]);
        if (index < 1 || index > kNumChecks) {
            std::fprintf(stderr, "usage: acceptance [1..%d]\n", kNumChecks);
            return 2;
        }
        return run_one(index);
    }
    int failures = 0;
    for (int i = 1; i <= kNumChecks; ++i) failures += run_one(i);
    return failures == 0 ? 0 : 1;
}
