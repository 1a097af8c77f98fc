#pragma once

// Physical inputs in SI, derived quantities, and the conversion to the
// dimensionless unit system shared by all solvers (time in units of
// 2/omega_d, flux in units of phi0_bar, frequency in units of omega_0).
// Physical constants are compiled in, not configurable.

#include <cmath>
#include <string>

#include "constants.hpp"
#include "errors.hpp"

#include <json.hpp>

namespace fluxion {

struct CircuitParams {
    double L = 0.0;   // inductance, H
    double C = 0.0;   // coupling capacitance, F
    double C_J = 0.0; // junction capacitance, F
    double E_J = 0.0; // Josephson energy, J

    double c_sigma() const noexcept { return C + C_J; }
    // I_c = E_J / phi0_bar, A
    double critical_current() const noexcept { return E_J / constants::phi0_bar; }
};

struct IonParams {
    double m = 0.0;       // mass, kg
    double omega_z = 0.0; // bare trap frequency, rad/s
    double d = 0.0;       // plate separation, m
    double xi = 0.0;      // geometric factor, 0 <= xi <= 1
};

struct DriveParams {
    double eta = 0.0;     // modulation amplitude
    double omega_d = 0.0; // drive angular frequency, rad/s

    double period() const noexcept { return constants::two_pi / omega_d; }
};

struct SystemParams {
    CircuitParams circuit;
    IonParams ion;
    DriveParams drive;
};

struct DerivedQuantities {
    double omega_0 = 0.0;        // 1/sqrt(L C_sigma), rad/s
    double beta = 0.0;           // L E_J / phi0_bar^2
    double omega_i = 0.0;        // dressed trap frequency, rad/s
    double z_0 = 0.0;            // sqrt(hbar / (2 m omega_i)), m
    double c_sigma = 0.0;        // C + C_J, F
    double dressing_shift = 0.0; // sqrt(e^2 xi^2 / (d^2 C_sigma m)), rad/s
    double kappa = 0.0;          // dressing_shift / omega_0, dimensionless coupling
};

namespace detail {

inline void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParamError(std::string(field) + " must be positive and finite");
    }
}

inline void require_nonnegative(double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ParamError(std::string(field) + " must be nonnegative and finite");
    }
}

} // namespace detail

inline void validate(const CircuitParams& c) {
    detail::require_positive(c.L, "circuit.L");
    detail::require_nonnegative(c.C, "circuit.C");
    detail::require_nonnegative(c.C_J, "circuit.C_J");
    detail::require_positive(c.c_sigma(), "circuit.C + circuit.C_J");
    detail::require_positive(c.E_J, "circuit.E_J");
}

inline void validate(const IonParams& i) {
    detail::require_positive(i.m, "ion.m");
    detail::require_positive(i.omega_z, "ion.omega_z");
    detail::require_positive(i.d, "ion.d");
    detail::require_nonnegative(i.xi, "ion.xi");
    if (i.xi > 1.0) throw ParamError("ion.xi must not exceed 1");
}

inline void validate(const DriveParams& d) {
    detail::require_nonnegative(d.eta, "drive.eta");
    detail::require_positive(d.omega_d, "drive.omega_d");
}

inline void validate(const SystemParams& p) {
    validate(p.circuit);
    validate(p.ion);
    validate(p.drive);
}

// Dressed trap frequency, zero-point length, and circuit scales.
inline DerivedQuantities derive(const CircuitParams& circuit, const IonParams& ion) {
    validate(circuit);
    validate(ion);
    DerivedQuantities d;
    d.c_sigma = circuit.c_sigma();
    d.omega_0 = 1.0 / std::sqrt(circuit.L * d.c_sigma);
    d.beta = circuit.L * circuit.E_J / (constants::phi0_bar * constants::phi0_bar);
    d.dressing_shift = constants::elementary_charge * ion.xi /
                       (ion.d * std::sqrt(d.c_sigma * ion.m));
    d.omega_i = std::sqrt(ion.omega_z * ion.omega_z + d.dressing_shift * d.dressing_shift);
    d.z_0 = std::sqrt(constants::hbar / (2.0 * ion.m * d.omega_i));
    d.kappa = d.dressing_shift / d.omega_0;
    return d;
}

inline DerivedQuantities derive(const SystemParams& p) {
    validate(p.drive);
    return derive(p.circuit, p.ion);
}

struct ScaledParams {
    double A = 0.0;     // 4 (omega_0 / omega_d)^2
    double Q = 0.0;     // -eta A / 2
    double ratio = 0.0; // omega_i / omega_0
    double beta = 0.0;
    double eta = 0.0;
};

inline ScaledParams to_dimensionless(const SystemParams& p) {
    const DerivedQuantities d = derive(p);
    ScaledParams s;
    const double w = d.omega_0 / p.drive.omega_d;
    s.A = 4.0 * w * w;
    s.Q = -0.5 * p.drive.eta * s.A;
    s.ratio = d.omega_i / d.omega_0;
    s.beta = d.beta;
    s.eta = p.drive.eta;
    return s;
}

struct ReconstructedFrequencies {
    double omega_d = 0.0;
    double omega_i = 0.0;
    double eta = 0.0;
};

// Inverse of to_dimensionless on the frequency content, given omega_0.
inline ReconstructedFrequencies from_dimensionless(const ScaledParams& s, double omega_0) {
    detail::require_positive(omega_0, "omega_0");
    if (!(s.A > 0.0)) throw ParamError("scaled A must be positive");
    ReconstructedFrequencies r;
    r.omega_d = 2.0 * omega_0 / std::sqrt(s.A);
    r.omega_i = s.ratio * omega_0;
    r.eta = -2.0 * s.Q / s.A;
    return r;
}

// Reference parameter set used by the CLI defaults and the examples:
// C_sigma = 46 fF split 42 + 4, omega_0 = 2 pi x 1 GHz, beta = 0.08,
// m = 1.5e-26 kg, d = 25 um, xi = 0.25, dressed omega_i = 2 pi x 1 MHz,
// drive at omega_d = omega_0 - omega_i with eta = 0.06.
inline SystemParams reference_system() {
    SystemParams p;
    const double omega_0 = constants::two_pi * 1e9;
    const double c_sigma = 46e-15;
    p.circuit.C = 42e-15;
    p.circuit.C_J = 4e-15;
    p.circuit.L = 1.0 / (omega_0 * omega_0 * c_sigma);
    p.circuit.E_J = 0.08 * constants::phi0_bar * constants::phi0_bar / p.circuit.L;
    p.ion.m = 1.4965e-26; // 9Be+ (9.012 u)
    p.ion.d = 25e-6;
    p.ion.xi = 0.25;
    const double omega_i = constants::two_pi * 1e6;
    const double shift = constants::elementary_charge * p.ion.xi /
                         (p.ion.d * std::sqrt(c_sigma * p.ion.m));
    p.ion.omega_z = std::sqrt(omega_i * omega_i - shift * shift);
    p.drive.eta = 0.06;
    p.drive.omega_d = omega_0 - omega_i;
    return p;
}

namespace detail {

inline double number_field(const nlohmann::json& obj, const std::string& section,
                           const std::string& key) {
    if (!obj.contains(key)) {
        throw ParamError("missing field " + section + "." + key);
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        throw ParamError("field " + section + "." + key + " must be a number");
    }
    return v.get<double>();
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& section,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ParamError("unknown key " +
                             (section.empty() ? key : section + "." + key));
        }
    }
}

} // namespace detail

// Ingest {"circuit": {...}, "ion": {...}, "drive": {...}} with SI values.
// Unknown keys are an error: they are almost always typos.
inline SystemParams system_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParamError("config root must be a JSON object");
    detail::reject_unknown(j, "", {"circuit", "ion", "drive"});
    for (const char* section : {"circuit", "ion", "drive"}) {
        if (!j.contains(section)) throw ParamError(std::string("missing section ") + section);
        if (!j.at(section).is_object()) {
            throw ParamError(std::string("section ") + section + " must be an object");
        }
    }
    const auto& jc = j.at("circuit");
    const auto& ji = j.at("ion");
    const auto& jd = j.at("drive");
    detail::reject_unknown(jc, "circuit", {"L", "C", "C_J", "E_J"});
    detail::reject_unknown(ji, "ion", {"m", "omega_z", "d", "xi"});
    detail::reject_unknown(jd, "drive", {"eta", "omega_d"});

    SystemParams p;
    p.circuit.L = detail::number_field(jc, "circuit", "L");
    p.circuit.C = detail::number_field(jc, "circuit", "C");
    p.circuit.C_J = detail::number_field(jc, "circuit", "C_J");
    p.circuit.E_J = detail::number_field(jc, "circuit", "E_J");
    p.ion.m = detail::number_field(ji, "ion", "m");
    p.ion.omega_z = detail::number_field(ji, "ion", "omega_z");
    p.ion.d = detail::number_field(ji, "ion", "d");
    p.ion.xi = detail::number_field(ji, "ion", "xi");
    p.drive.eta = detail::number_field(jd, "drive", "eta");
    p.drive.omega_d = detail::number_field(jd, "drive", "omega_d");
    validate(p);
    return p;
}

inline nlohmann::ordered_json system_to_json(const SystemParams& p) {
    nlohmann::ordered_json j;
    j["circuit"] = {{"L", p.circuit.L}, {"C", p.circuit.C}, {"C_J", p.circuit.C_J},
                    {"E_J", p.circuit.E_J}};
    j["ion"] = {{"m", p.ion.m}, {"omega_z", p.ion.omega_z}, {"d", p.ion.d},
                {"xi", p.ion.xi}};
    j["drive"] = {{"eta", p.drive.eta}, {"omega_d", p.drive.omega_d}};
    return j;
}

} // namespace fluxion
