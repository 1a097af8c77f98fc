#pragma once

// Adaptive explicit Runge-Kutta integrator of order 8(5,3), the Dormand-Prince
// 13-stage scheme with the dual 5th/3rd order error estimate (Hairer, Norsett,
// Wanner, "Solving Ordinary Differential Equations I", tableau DOP853).
// No dense output: callers advance exactly onto every output point, and the
// stepper keeps its adapted step size across those truncated steps.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "errors.hpp"

namespace fluxion {

template <std::size_t N>
using State = std::array<double, N>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 400000000; // accepted + rejected
};

struct OdeStats {
    std::size_t n_accepted = 0;
    std::size_t n_rejected = 0;
    std::size_t n_rhs = 0;
};

namespace dop853 {

inline constexpr std::size_t n_stages = 12;

inline constexpr std::array<double, n_stages> c = {
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
};

// Strictly lower triangular coupling matrix, rows 1..11.
inline constexpr std::array<std::array<double, n_stages>, n_stages> a = {{
    {},
    {5.26001519587677318785587544488e-2},
    {1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2},
    {2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2},
    {2.41365134159266685502369798665e-1, 0.0, -8.84549479328286085344864962717e-1,
     9.24834003261792003115737966543e-1},
    {3.7037037037037037037037037037e-2, 0.0, 0.0, 1.70828608729473871279604482173e-1,
     1.25467687566822425016691814123e-1},
    {3.7109375e-2, 0.0, 0.0, 1.70252211019544039314978060272e-1,
     6.02165389804559606850219397283e-2, -1.7578125e-2},
    {3.70920001185047927108779319836e-2, 0.0, 0.0, 1.70383925712239993810214054705e-1,
     1.07262030446373284651809199168e-1, -1.53194377486244017527936158236e-2,
     8.27378916381402288758473766002e-3},
    {6.24110958716075717114429577812e-1, 0.0, 0.0, -3.36089262944694129406857109825,
     -8.68219346841726006818189891453e-1, 2.75920996994467083049415600797e1,
     2.01540675504778934086186788979e1, -4.34898841810699588477366255144e1},
    {4.77662536438264365890433908527e-1, 0.0, 0.0, -2.48811461997166764192642586468,
     -5.90290826836842996371446475743e-1, 2.12300514481811942347288949897e1,
     1.52792336328824235832596922938e1, -3.32882109689848629194453265587e1,
     -2.03312017085086261358222928593e-2},
    {-9.3714243008598732571704021658e-1, 0.0, 0.0, 5.18637242884406370830023853209,
     1.09143734899672957818500254654, -8.14978701074692612513997267357,
     -1.85200656599969598641566180701e1, 2.27394870993505042818970056734e1,
     2.49360555267965238987089396762, -3.0467644718982195003823669022},
    {2.27331014751653820792359768449, 0.0, 0.0, -1.05344954667372501984066689879e1,
     -2.00087205822486249909675718444, -1.79589318631187989172765950534e1,
     2.79488845294199600508499808837e1, -2.85899827713502369474065508674,
     -8.87285693353062954433549289258, 1.23605671757943030647266201528e1,
     6.43392746015763530355970484046e-1},
}};

inline constexpr std::array<double, n_stages> b = {
    5.42937341165687622380535766363e-2, 0.0, 0.0, 0.0, 0.0,
    4.45031289275240888144113950566, 1.89151789931450038304281599044,
    -5.8012039600105847814672114227, 3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1, 2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2,
};

// 3rd order error weights: b minus the embedded 3rd order solution.
inline constexpr std::array<double, n_stages> e3 = {
    b[0] - 0.244094488188976377952755905512, b[1], b[2], b[3], b[4],
    b[5], b[6], b[7],
    b[8] - 0.733846688281611857341361741547,
    b[9], b[10],
    b[11] - 0.220588235294117647058823529412e-1,
};

// 5th order error weights.
inline constexpr std::array<double, n_stages> e5 = {
    0.1312004499419488073250102996e-1, 0.0, 0.0, 0.0, 0.0,
    -0.1225156446376204440720569753e1, -0.4957589496572501915214079952,
    0.1664377182454986536961530415e1, -0.3503288487499736816886487290,
    0.3341791187130174790297318841, 0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1,
};

inline constexpr double safety = 0.9;
inline constexpr double min_factor = 0.2;
inline constexpr double max_factor = 10.0;
// Error estimate is order 7, so steps scale with the 1/8 power.
inline constexpr double error_exponent = -1.0 / 8.0;

} // namespace dop853

// One independent integration. Rhs is any callable
// void(double t, const State<N>& y, State<N>& dydt).
template <std::size_t N, typename Rhs>
class Dop853 {
public:
    Dop853(Rhs rhs, double t0, const State<N>& y0, OdeOptions opts = {})
        : rhs_(rhs), opts_(opts), t_(t0), y_(y0) {
        if (!(opts_.rtol > 0.0) || !(opts_.atol >= 0.0)) {
            throw ParamError("integrator tolerances must be positive");
        }
        eval(t_, y_, f_);
        h_ = initial_step();
    }

    double t() const noexcept { return t_; }
    const State<N>& y() const noexcept { return y_; }
    const OdeStats& stats() const noexcept { return stats_; }

    // Advance to exactly t_target (which must not be behind the current time).
    void advance_to(double t_target) {
        if (t_target < t_) {
            throw ParamError("integration target lies behind current time");
        }
        while (t_ < t_target) {
            const double remaining = t_target - t_;
            const double min_step =
                10.0 * (std::nextafter(t_, std::numeric_limits<double>::infinity()) - t_);
            if (remaining <= min_step) {
                // A step this small contributes error far below round-off.
                take_step(remaining);
                t_ = t_target;
                ++stats_.n_accepted;
                commit();
                continue;
            }
            double h = std::min({h_, opts_.max_step, remaining});
            const bool truncated = h < h_;
            if (h < min_step) h = min_step;

            const double err = take_step(h);
            ++stats_.n_accepted; // provisional, undone on rejection
            if (err <= 1.0) {
                t_ += h;
                commit();
                double factor = (err == 0.0)
                                    ? dop853::max_factor
                                    : std::min(dop853::max_factor,
                                               dop853::safety *
                                                   std::pow(err, dop853::error_exponent));
                if (rejected_last_) factor = std::min(1.0, factor);
                rejected_last_ = false;
                if (!truncated) {
                    h_ = h * factor;
                } else if (factor < 1.0) {
                    h_ = std::min(h_, h * factor);
                }
            } else {
                --stats_.n_accepted;
                ++stats_.n_rejected;
                rejected_last_ = true;
                h_ = h * std::max(dop853::min_factor,
                                  dop853::safety * std::pow(err, dop853::error_exponent));
                if (h_ < min_step) {
                    throw NumericalError("step size underflow at t = " + std::to_string(t_));
                }
            }
            if (stats_.n_accepted + stats_.n_rejected > opts_.max_steps) {
                throw NumericalError("step budget exceeded at t = " + std::to_string(t_));
            }
            for (double v : y_) {
                if (!std::isfinite(v)) {
                    throw NumericalError("state diverged at t = " + std::to_string(t_));
                }
            }
        }
    }

private:
    void eval(double t, const State<N>& y, State<N>& dydt) {
        rhs_(t, y, dydt);
        ++stats_.n_rhs;
    }

    // Hairer's starting step heuristic.
    double initial_step() {
        State<N> scale{};
        for (std::size_t i = 0; i < N; ++i) {
            scale[i] = opts_.atol + opts_.rtol * std::abs(y_[i]);
        }
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            d0 += (y_[i] / scale[i]) * (y_[i] / scale[i]);
            d1 += (f_[i] / scale[i]) * (f_[i] / scale[i]);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;

        State<N> y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h0 * f_[i];
        eval(t_ + h0, y1, f1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double df = (f1[i] - f_[i]) / scale[i];
            d2 += df * df;
        }
        d2 = std::sqrt(d2 / N) / h0;

        double h1;
        if (d1 <= 1e-15 && d2 <= 1e-15) {
            h1 = std::max(1e-6, h0 * 1e-3);
        } else {
            h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
        }
        return std::min({100.0 * h0, h1, opts_.max_step});
    }

    // Evaluate one trial step of size h from (t_, y_); fills y_new_/f_new_
    // and returns the scaled error norm.
    double take_step(double h) {
        for (std::size_t i = 0; i < N; ++i) k_[0][i] = f_[i];
        State<N> yi;
        for (std::size_t s = 1; s < dop853::n_stages; ++s) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < s; ++j) acc += dop853::a[s][j] * k_[j][i];
                yi[i] = y_[i] + h * acc;
            }
            eval(t_ + dop853::c[s] * h, yi, k_[s]);
        }
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < dop853::n_stages; ++j) acc += dop853::b[j] * k_[j][i];
            y_new_[i] = y_[i] + h * acc;
        }
        eval(t_ + h, y_new_, f_new_);

        double err5sq = 0.0, err3sq = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc =
                opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
            double a5 = 0.0, a3 = 0.0;
            for (std::size_t j = 0; j < dop853::n_stages; ++j) {
                a5 += dop853::e5[j] * k_[j][i];
                a3 += dop853::e3[j] * k_[j][i];
            }
            a5 /= sc;
            a3 /= sc;
            err5sq += a5 * a5;
            err3sq += a3 * a3;
        }
        if (err5sq == 0.0 && err3sq == 0.0) return 0.0;
        const double denom = err5sq + 0.01 * err3sq;
        return std::abs(h) * err5sq / std::sqrt(denom * static_cast<double>(N));
    }

    void commit() {
        y_ = y_new_;
        f_ = f_new_;
    }

    Rhs rhs_;
    OdeOptions opts_;
    double t_;
    State<N> y_;
    State<N> f_{};
    State<N> y_new_{}, f_new_{};
    std::array<State<N>, dop853::n_stages> k_{};
    double h_ = 0.0;
    bool rejected_last_ = false;
    OdeStats stats_;
};

// Convenience: integrate from t0 to t1 and return the final state.
template <std::size_t N, typename Rhs>
State<N> integrate_ode(Rhs rhs, double t0, double t1, const State<N>& y0,
                       const OdeOptions& opts = {}, OdeStats* stats = nullptr) {
    Dop853<N, Rhs> stepper(rhs, t0, y0, opts);
    stepper.advance_to(t1);
    if (stats) *stats = stepper.stats();
    return stepper.y();
}

} // namespace fluxion
