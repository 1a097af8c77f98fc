#pragma once

// Parametric stability of the driven mode near the difference-frequency
// operating point omega_d = omega_0 - omega_i, scanned over the frequency
// ratio omega_i / omega_0 and the modulation depth eta. A point is stable
// when the monodromy trace satisfies |tr| < 2.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "floquet.hpp"
#include "hill.hpp"

namespace fluxion {

// Canonical Mathieu parameters of the operating point (omega_0 = 1 units,
// omega_d = 1 - ratio).
inline HillCoefficient operating_point(double ratio, double eta) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ParamError("frequency ratio must lie in (0, 1)");
    }
    if (!(eta >= 0.0)) throw ParamError("eta must be nonnegative");
    const double omega_d = 1.0 - ratio;
    const double a = 4.0 / (omega_d * omega_d);
    return HillCoefficient::mathieu(a, -0.5 * eta * a);
}

struct StabilityPoint {
    bool stable = false;
    double trace_abs = 0.0;
    double growth = 0.0; // e-foldings per pi of phase; 0 when stable
};

inline StabilityPoint is_stable(double ratio, double eta, double rtol = 1e-10) {
    const Monodromy m = monodromy(operating_point(ratio, eta), rtol);
    StabilityPoint p;
    p.trace_abs = std::abs(m.trace());
    p.stable = p.trace_abs <= 2.0;
    p.growth = p.stable ? 0.0 : std::acosh(p.trace_abs / 2.0) / constants::pi;
    return p;
}

// First instability threshold in eta at fixed ratio: coarse upward scan for a
// sign change of 2 - |tr|, then bisection to eta_tol.
inline double boundary_eta(double ratio, double eta_max = 0.5, double eta_tol = 1e-4,
                           std::size_t coarse_steps = 64, double rtol = 1e-10) {
    if (!(eta_max > 0.0)) throw ParamError("eta_max must be positive");
    if (!(eta_tol > 0.0)) throw ParamError("eta_tol must be positive");
    auto margin = [&](double eta) { return 2.0 - is_stable(ratio, eta, rtol).trace_abs; };

    double lo = 0.0;
    double m_lo = margin(lo);
    if (m_lo <= 0.0) {
        throw BoundaryError("operating point is already unstable at eta = 0");
    }
    double hi = 0.0;
    double step = eta_max / static_cast<double>(coarse_steps);
    bool found = false;
    for (std::size_t i = 1; i <= coarse_steps; ++i) {
        hi = step * static_cast<double>(i);
        const double m_hi = margin(hi);
        if (m_hi <= 0.0) {
            found = true;
            break;
        }
        lo = hi;
        m_lo = m_hi;
    }
    if (!found) {
        throw BoundaryError("no stability boundary below eta_max: widen the scan");
    }
    while (hi - lo > eta_tol) {
        const double mid = 0.5 * (lo + hi);
        if (margin(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct GridSpec {
    double ratio_min = 1e-3;
    double ratio_max = 1e-1;
    std::size_t n_ratio = 50;
    bool log_ratio = true; // geometric spacing in ratio
    double eta_min = 0.0;
    double eta_max = 0.5;
    std::size_t n_eta = 50;
};

struct MapCell {
    double ratio = 0.0;
    double eta = 0.0;
    double trace_abs = 0.0;
    double growth = 0.0;
    bool stable = false;
};

struct StabilityMap {
    GridSpec grid;
    std::vector<MapCell> cells; // ratio-major, eta fastest
};

inline std::vector<double> grid_axis(double lo, double hi, std::size_t n, bool log_spaced) {
    if (n < 1) throw ParamError("grid axis needs at least 1 point");
    if (n == 1) {
        if (hi != lo) throw ParamError("single-point axis needs equal bounds");
        return {lo};
    }
    if (!(hi > lo)) throw ParamError("grid axis bounds must be increasing");
    if (log_spaced && !(lo > 0.0)) throw ParamError("log axis needs positive bounds");
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        axis[i] = log_spaced ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
    }
    return axis;
}

// Full grid scan. Cells are independent; they are distributed over worker
// threads and written to fixed indices, so the result is identical for any
// thread count.
inline StabilityMap stability_map(const GridSpec& grid, unsigned threads = 0,
                                  double rtol = 1e-10) {
    const auto ratios = grid_axis(grid.ratio_min, grid.ratio_max, grid.n_ratio,
                                  grid.log_ratio);
    const auto etas = grid_axis(grid.eta_min, grid.eta_max, grid.n_eta, false);
    StabilityMap map;
    map.grid = grid;
    map.cells.resize(grid.n_ratio * grid.n_eta);

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    std::atomic<std::size_t> next{0};
    const std::size_t total = map.cells.size();
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            const std::size_t i = idx / grid.n_eta;
            const std::size_t j = idx % grid.n_eta;
            MapCell& cell = map.cells[idx];
            cell.ratio = ratios[i];
            cell.eta = etas[j];
            const StabilityPoint p = is_stable(cell.ratio, cell.eta, rtol);
            cell.trace_abs = p.trace_abs;
            cell.growth = p.growth;
            cell.stable = p.stable;
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return map;
}

// Refined boundary per ratio column; empty where no transition occurs in the
// scanned eta range.
inline std::vector<std::optional<double>> map_boundaries(const StabilityMap& map,
                                                         double eta_tol = 1e-4,
                                                         double rtol = 1e-10) {
    const auto ratios = grid_axis(map.grid.ratio_min, map.grid.ratio_max,
                                  map.grid.n_ratio, map.grid.log_ratio);
    std::vector<std::optional<double>> out(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        try {
            out[i] = boundary_eta(ratios[i], map.grid.eta_max, eta_tol, 64, rtol);
        } catch (const BoundaryError&) {
            out[i] = std::nullopt;
        }
    }
    return out;
}

} // namespace fluxion
