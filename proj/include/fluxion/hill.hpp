#pragma once

// Periodic stiffness coefficient for Hill equations f'' + P(u) f = 0 with
// P(u + pi) = P(u), expressed as a mean plus harmonics in exp(2inu). The
// single-harmonic factory produces the Mathieu form A - 2Q cos(2u).

#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace fluxion {

struct Harmonic {
    int n;                          // harmonic index, n >= 1
    std::complex<double> amplitude; // coefficient of exp(2inu); P gains Re(amp e^{2inu})
};

class HillCoefficient {
public:
    HillCoefficient(double mean, std::vector<Harmonic> harmonics)
        : mean_(mean), harmonics_(std::move(harmonics)) {
        for (std::size_t i = 0; i < harmonics_.size(); ++i) {
            if (harmonics_[i].n < 1) {
                throw ParamError("harmonic index must be >= 1");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (harmonics_[j].n == harmonics_[i].n) {
                    throw ParamError("duplicate harmonic index");
                }
            }
        }
    }

    // P(u); real by construction.
    double operator()(double u) const {
        double p = mean_;
        for (const auto& h : harmonics_) {
            const double phase = 2.0 * h.n * u;
            p += h.amplitude.real() * std::cos(phase) - h.amplitude.imag() * std::sin(phase);
        }
        return p;
    }

    double mean() const noexcept { return mean_; }
    const std::vector<Harmonic>& harmonics() const noexcept { return harmonics_; }

    // A - 2Q cos(2u): amplitude -2Q on the first harmonic.
    static HillCoefficient mathieu(double a, double q) {
        return HillCoefficient(a, {{1, std::complex<double>(-2.0 * q, 0.0)}});
    }

private:
    double mean_;
    std::vector<Harmonic> harmonics_;
};

} // namespace fluxion
