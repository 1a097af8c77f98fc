// Command-line front end: stability maps, drive synthesis, coupling
// evaluation, exchange-rate validation, and eta sweeps, with CSV/JSON output
// suitable for plotting. Exit codes: 0 success, 1 validation above tolerance,
// 2 configuration error, 3 drive domain error, 4 parametric instability,
// 5 numerical failure.

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluxion/fluxion.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    unsigned threads = 0;
    double tol = 1e-10;
};

ordered_json load_config(const std::string& path) {
    if (path.empty()) return ordered_json::object();
    std::ifstream in(path);
    if (!in) throw fluxion::ParamError("cannot open config file " + path);
    ordered_json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw fluxion::ParamError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw fluxion::ParamError("config root must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        (void)value;
        if (key != "circuit" && key != "ion" && key != "drive" && key != "stability" &&
            key != "waveform" && key != "validate" && key != "sweep") {
            throw fluxion::ParamError("unknown config key " + key);
        }
    }
    return cfg;
}

// System parameters: the reference set unless the config carries explicit
// circuit/ion/drive sections (all three required together).
fluxion::SystemParams resolve_system(const ordered_json& cfg) {
    const bool has_any =
        cfg.contains("circuit") || cfg.contains("ion") || cfg.contains("drive");
    if (!has_any) return fluxion::reference_system();
    if (!(cfg.contains("circuit") && cfg.contains("ion") && cfg.contains("drive"))) {
        throw fluxion::ParamError(
            "config must provide circuit, ion, and drive sections together");
    }
    json sys;
    sys["circuit"] = cfg.at("circuit");
    sys["ion"] = cfg.at("ion");
    sys["drive"] = cfg.at("drive");
    return fluxion::system_from_json(sys);
}

double section_number(const ordered_json& cfg, const std::string& section,
                      const std::string& key, double fallback) {
    if (!cfg.contains(section)) return fallback;
    const auto& s = cfg.at(section);
    if (!s.contains(key)) return fallback;
    if (!s.at(key).is_number()) {
        throw fluxion::ParamError("config " + section + "." + key + " must be a number");
    }
    return s.at(key).get<double>();
}

bool section_bool(const ordered_json& cfg, const std::string& section,
                  const std::string& key, bool fallback) {
    if (!cfg.contains(section)) return fallback;
    const auto& s = cfg.at(section);
    if (!s.contains(key)) return fallback;
    if (!s.at(key).is_boolean()) {
        throw fluxion::ParamError("config " + section + "." + key + " must be a boolean");
    }
    return s.at(key).get<bool>();
}

void check_section_keys(const ordered_json& cfg, const std::string& section,
                        std::initializer_list<const char*> known) {
    if (!cfg.contains(section)) return;
    if (!cfg.at(section).is_object()) {
        throw fluxion::ParamError("config section " + section + " must be an object");
    }
    for (const auto& [key, value] : cfg.at(section).items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw fluxion::ParamError("unknown config key " + section + "." + key);
    }
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    if (g.out_dir.empty() || g.out_dir == ".") return name;
    return g.out_dir + "/" + name;
}

std::string flag(bool b) { return b ? "1" : "0"; }

// ---------------------------------------------------------------- stability

int cmd_stability(const GlobalOpts& g, const ordered_json& cfg,
                  const std::string& grid_flag) {
    check_section_keys(cfg, "stability",
                       {"ratio_min", "ratio_max", "n_ratio", "log_ratio", "eta_min",
                        "eta_max", "n_eta", "eta_tol"});
    fluxion::GridSpec grid;
    grid.ratio_min = section_number(cfg, "stability", "ratio_min", 1e-3);
    grid.ratio_max = section_number(cfg, "stability", "ratio_max", 1e-1);
    grid.n_ratio = static_cast<std::size_t>(section_number(cfg, "stability", "n_ratio", 50));
    grid.log_ratio = section_bool(cfg, "stability", "log_ratio", true);
    grid.eta_min = section_number(cfg, "stability", "eta_min", 0.0);
    grid.eta_max = section_number(cfg, "stability", "eta_max", 0.5);
    grid.n_eta = static_cast<std::size_t>(section_number(cfg, "stability", "n_eta", 50));
    const double eta_tol = section_number(cfg, "stability", "eta_tol", 1e-4);

    if (!grid_flag.empty()) {
        std::size_t nr = 0, ne = 0;
        if (std::sscanf(grid_flag.c_str(), "%zux%zu", &nr, &ne) != 2 || nr == 0 || ne == 0) {
            throw fluxion::ParamError("--grid expects RxE with positive counts, e.g. 50x50");
        }
        grid.n_ratio = nr;
        grid.n_eta = ne;
    }
    if (!(grid.ratio_min > 0.0) || !(grid.ratio_max < 1.0)) {
        throw fluxion::ParamError("stability ratios must lie strictly inside (0, 1)");
    }

    ordered_json resolved;
    resolved["command"] = "stability";
    resolved["grid"] = {{"ratio_min", grid.ratio_min}, {"ratio_max", grid.ratio_max},
                        {"n_ratio", grid.n_ratio},     {"log_ratio", grid.log_ratio},
                        {"eta_min", grid.eta_min},     {"eta_max", grid.eta_max},
                        {"n_eta", grid.n_eta}};
    resolved["eta_tol"] = eta_tol;
    resolved["rtol"] = g.tol;

    const fluxion::StabilityMap map = fluxion::stability_map(grid, g.threads, g.tol);
    const auto boundaries = fluxion::map_boundaries(map, eta_tol, g.tol);

    fluxion::CsvWriter csv(out_path(g, "stability_map.csv"));
    csv.metadata("config", resolved.dump());
    csv.header({"ratio", "eta", "trace_abs", "im_mu", "stable"});
    for (const auto& cell : map.cells) {
        csv.raw_row({fluxion::format_double(cell.ratio), fluxion::format_double(cell.eta),
                     fluxion::format_double(cell.trace_abs),
                     fluxion::format_double(cell.growth), flag(cell.stable)});
    }

    const auto ratios =
        fluxion::grid_axis(grid.ratio_min, grid.ratio_max, grid.n_ratio, grid.log_ratio);
    ordered_json side;
    side["version"] = fluxion::constants::version;
    side["config"] = resolved;
    ordered_json blist = ordered_json::array();
    std::size_t n_missing = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        ordered_json entry;
        entry["ratio"] = ratios[i];
        if (boundaries[i]) {
            entry["eta_boundary"] = *boundaries[i];
        } else {
            entry["eta_boundary"] = nullptr;
            ++n_missing;
            std::cerr << "warning: no stability boundary below eta_max for ratio "
                      << ratios[i] << "\n";
        }
        blist.push_back(entry);
    }
    side["boundaries"] = blist;
    std::size_t n_unstable = 0;
    for (const auto& c : map.cells) n_unstable += c.stable ? 0 : 1;
    side["n_unstable_cells"] = n_unstable;
    side["n_columns_without_boundary"] = n_missing;
    fluxion::write_json(out_path(g, "stability_map.json"), side);
    return 0;
}

// -------------------------------------------------------------------- drive

int cmd_drive(const GlobalOpts& g, const ordered_json& cfg, std::optional<double> eta_f,
              std::optional<double> beta_f, std::optional<double> omega_d_f) {
    check_section_keys(cfg, "waveform", {"n_samples", "periods", "tol"});
    fluxion::SystemParams p = resolve_system(cfg);
    if (eta_f) p.drive.eta = *eta_f;
    if (omega_d_f) p.drive.omega_d = *omega_d_f;
    if (beta_f) {
        // beta is derived from L and E_J; realize the override through E_J.
        p.circuit.E_J = *beta_f * fluxion::constants::phi0_bar *
                        fluxion::constants::phi0_bar / p.circuit.L;
    }
    const fluxion::DerivedQuantities der = fluxion::derive(p);
    const auto n_samples =
        static_cast<std::size_t>(section_number(cfg, "waveform", "n_samples", 4096));
    const auto periods =
        static_cast<std::size_t>(section_number(cfg, "waveform", "periods", 10));
    const double rt_tol = section_number(cfg, "waveform", "tol", 1e-6);

    fluxion::ClassicalDrive d = fluxion::classical_solution(
        p.drive.eta, der.beta, p.drive.omega_d, der.c_sigma, n_samples);
    d = fluxion::synthesize_flux(d, der.omega_0);
    const double residual = fluxion::verify_roundtrip(d, der.omega_0, periods, rt_tol, g.tol);

    ordered_json resolved;
    resolved["command"] = "drive";
    resolved["system"] = fluxion::system_to_json(p);
    resolved["beta"] = der.beta;
    resolved["n_samples"] = n_samples;
    resolved["roundtrip_periods"] = periods;
    resolved["roundtrip_tol"] = rt_tol;
    resolved["rtol"] = g.tol;

    fluxion::CsvWriter csv(out_path(g, "drive_waveforms.csv"));
    csv.metadata("config", resolved.dump());
    csv.header({"t_over_tau", "phi_c", "q_c", "phi_x"});
    for (std::size_t j = 0; j < d.phi_c.size(); ++j) {
        csv.row({d.t_over_tau[j], d.phi_c[j], d.q_c[j], d.phi_x[j]});
    }

    ordered_json side;
    side["version"] = fluxion::constants::version;
    side["config"] = resolved;
    side["roundtrip_residual"] = residual;
    fluxion::write_json(out_path(g, "drive.json"), side);
    std::cout << "round-trip residual " << fluxion::format_double(residual) << "\n";
    return 0;
}

// ------------------------------------------------------------------- couple

ordered_json coupling_report(const fluxion::SystemParams& p,
                             const fluxion::CouplingResult& r) {
    ordered_json j;
    j["k"] = r.k;
    j["detuning"] = r.detuning;
    j["detuned_warning"] = r.detuned;
    j["gamma"] = r.gamma;
    j["c_k"] = {r.c_k.real(), r.c_k.imag()};
    j["c_k_abs"] = std::abs(r.c_k);
    j["mu"] = r.mu;
    j["wronskian_si"] = r.wronskian_si;
    j["Omega_rad_s"] = r.Omega;
    j["Omega_hz"] = r.Omega / fluxion::constants::two_pi;
    j["Omega_resonant_rad_s"] = r.Omega_resonant;
    j["Omega_resonant_hz"] = r.Omega_resonant / fluxion::constants::two_pi;
    j["Omega_cap_rad_s"] = r.Omega_cap;
    j["Omega_cap_hz"] = r.Omega_cap / fluxion::constants::two_pi;
    j["Q_0_coulomb"] = r.Q_0;
    (void)p;
    return j;
}

int cmd_couple(const GlobalOpts& g, const ordered_json& cfg, std::optional<double> eta_f,
               std::optional<double> omega_d_f, bool with_corrections, int junctions) {
    fluxion::SystemParams p = resolve_system(cfg);
    if (eta_f) p.drive.eta = *eta_f;
    if (omega_d_f) p.drive.omega_d = *omega_d_f;
    const fluxion::ScaledParams s = fluxion::to_dimensionless(p);

    fluxion::FloquetSolution sol;
    try {
        sol = fluxion::solve(fluxion::HillCoefficient::mathieu(s.A, s.Q), 4096, g.tol);
    } catch (const fluxion::UnstableError& e) {
        const double boundary = fluxion::boundary_eta(s.ratio);
        std::cerr << "error: " << e.what() << "\n"
                  << "hint: the stability boundary at this drive frequency is near eta = "
                  << fluxion::format_double(boundary) << "; reduce eta below it\n";
        return 4;
    }
    const fluxion::CouplingResult r = fluxion::coupling_strength(sol, p);
    const fluxion::PerturbativeCoupling pert = fluxion::perturbative_coupling(p);

    ordered_json doc;
    doc["version"] = fluxion::constants::version;
    doc["command"] = "couple";
    doc["system"] = fluxion::system_to_json(p);
    doc["scaled"] = {{"A", s.A}, {"Q", s.Q}, {"ratio", s.ratio}, {"beta", s.beta},
                     {"eta", s.eta}};
    doc["rtol"] = g.tol;
    doc["floquet"] = {{"mu", sol.mu},
                      {"trace", sol.trace},
                      {"marginal", sol.marginal},
                      {"wronskian_u", sol.wronskian}};
    doc["coupling"] = coupling_report(p, r);
    doc["perturbative"] = {{"Omega_rad_s", pert.Omega},
                           {"Omega_hz", pert.Omega / fluxion::constants::two_pi},
                           {"Omega_bound_rad_s", pert.Omega_bound},
                           {"Omega_bound_hz", pert.Omega_bound / fluxion::constants::two_pi},
                           {"eta_bound", pert.eta_bound},
                           {"gamma_0", pert.gamma_0}};
    if (with_corrections) {
        const fluxion::CorrectionEstimate est =
            fluxion::junction_array(p, sol, junctions);
        const fluxion::DerivedQuantities der = fluxion::derive(p);
        ordered_json corr;
        corr["leading_magnitude"] = est.leading_magnitude;
        corr["N"] = est.N;
        corr["beta_rescaled"] = est.beta_rescaled;
        corr["gamma_rescaled"] = est.gamma_rescaled;
        corr["k_terms"] = est.k_terms;
        corr["k_max"] = est.k_max;
        corr["required_N_unity"] = fluxion::required_N(
            r.gamma, der.beta, der.omega_0 / der.omega_i, 1.0);
        doc["corrections"] = corr;
    }
    if (r.detuned) {
        std::cerr << "warning: sideband detuning exceeds Omega/10; the exchange picture "
                     "needs a retuned drive (see the validate command)\n";
    }
    fluxion::write_json(out_path(g, "couple.json"), doc);
    std::cout << "Omega = " << fluxion::format_double(r.Omega / fluxion::constants::two_pi)
              << " Hz (k = " << r.k << ", |c_k| = "
              << fluxion::format_double(std::abs(r.c_k)) << ")\n";
    return 0;
}

// ----------------------------------------------------------------- validate

int cmd_validate(const GlobalOpts& g, const ordered_json& cfg,
                 std::optional<double> ratio_f, std::optional<double> eta_f,
                 std::optional<double> kappa_f, bool allow_large,
                 std::optional<double> max_err_f, const std::string& traj_path,
                 std::size_t traj_stride) {
    check_section_keys(cfg, "validate",
                       {"ratio", "eta", "eta_fraction", "kappa", "tolerance",
                        "duration_cycles", "samples_per_ion_period"});
    double ratio = section_number(cfg, "validate", "ratio", 0.01);
    if (ratio_f) ratio = *ratio_f;
    double kappa = section_number(cfg, "validate", "kappa", 1e-4);
    if (kappa_f) kappa = *kappa_f;
    const double tolerance =
        max_err_f ? *max_err_f : section_number(cfg, "validate", "tolerance", 0.05);

    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw fluxion::ParamError("validate ratio omega_i/omega_0 must lie in (0, 1)");
    }
    if (1.0 / ratio > 500.0 && !allow_large) {
        throw fluxion::ParamError(
            "omega_0/omega_i = " + std::to_string(1.0 / ratio) +
            " exceeds 500; the exchange would take too long to integrate at desk "
            "scale. Pass --allow-large-ratio to proceed anyway, or validate at a "
            "larger ratio: the exchange formula is ratio-agnostic");
    }

    double eta;
    if (eta_f) {
        eta = *eta_f;
    } else if (cfg.contains("validate") && cfg.at("validate").contains("eta")) {
        eta = section_number(cfg, "validate", "eta", 0.0);
    } else {
        const double fraction = section_number(cfg, "validate", "eta_fraction", 0.5);
        eta = (fraction > 0.0) ? fraction * fluxion::boundary_eta(ratio) : 0.0;
    }

    fluxion::ValidationOptions opts;
    opts.rtol = g.tol;
    opts.allow_large_ratio = allow_large;
    opts.duration_cycles = section_number(cfg, "validate", "duration_cycles", 0.85);
    opts.samples_per_ion_period = static_cast<std::size_t>(
        section_number(cfg, "validate", "samples_per_ion_period", 8));

    const fluxion::ExchangeReport rep = fluxion::rwa_validate(ratio, eta, kappa, opts);

    ordered_json doc;
    doc["version"] = fluxion::constants::version;
    doc["command"] = "validate";
    doc["inputs"] = {{"ratio", ratio},
                     {"eta", eta},
                     {"kappa", kappa},
                     {"tolerance", tolerance},
                     {"rtol", opts.rtol},
                     {"duration_cycles", opts.duration_cycles},
                     {"samples_per_ion_period", opts.samples_per_ion_period}};
    doc["report"] = {{"Omega_measured", rep.Omega_measured},
                     {"Omega_predicted", rep.Omega_predicted},
                     {"relative_error", rep.relative_error},
                     {"contrast", rep.contrast},
                     {"fit_residual", rep.fit_residual},
                     {"omega_d_tuned", rep.omega_d},
                     {"mu", rep.mu},
                     {"k", rep.k},
                     {"c_k_abs", rep.c_k_abs},
                     {"degenerate", rep.degenerate}};
    const bool pass = rep.degenerate || rep.relative_error <= tolerance;
    doc["pass"] = pass;
    fluxion::write_json(out_path(g, "validate.json"), doc);

    if (!traj_path.empty() && !rep.degenerate) {
        fluxion::ScaledSystem sys{ratio, rep.omega_d, eta, kappa};
        const double duration =
            opts.duration_cycles * fluxion::constants::pi / rep.Omega_predicted;
        const fluxion::Trajectory traj = fluxion::integrate(
            sys, fluxion::InitialState{}, duration, opts.rtol, opts.samples_per_ion_period);
        fluxion::CsvWriter csv(out_path(g, traj_path));
        csv.metadata("config", doc["inputs"].dump());
        csv.header({"t", "phi", "q", "z", "p", "E_ion", "E_circ"});
        const std::size_t stride = std::max<std::size_t>(1, traj_stride);
        for (std::size_t j = 0; j < traj.times.size(); j += stride) {
            csv.row({traj.times[j], traj.state[j][0], traj.state[j][1], traj.state[j][2],
                     traj.state[j][3], traj.ion_energy[j], traj.circuit_energy[j]});
        }
    }

    if (rep.degenerate) {
        std::cerr << "warning: eta = 0 drives nothing; degenerate validation report\n";
        std::cout << "degenerate: no exchange (eta = 0)\n";
        return 0;
    }
    std::cout << "Omega measured " << fluxion::format_double(rep.Omega_measured)
              << ", predicted " << fluxion::format_double(rep.Omega_predicted)
              << ", relative error " << fluxion::format_double(rep.relative_error) << "\n";
    if (!pass) {
        std::cerr << "validation failed: relative error "
                  << fluxion::format_double(rep.relative_error) << " > tolerance "
                  << fluxion::format_double(tolerance) << "\n";
        return 1;
    }
    return 0;
}

// -------------------------------------------------------------------- sweep

int cmd_sweep(const GlobalOpts& g, const ordered_json& cfg, std::optional<double> omega_d_f,
              std::optional<std::size_t> steps_f) {
    check_section_keys(cfg, "sweep", {"eta_min", "eta_max", "steps"});
    fluxion::SystemParams base = resolve_system(cfg);
    if (omega_d_f) base.drive.omega_d = *omega_d_f;
    const fluxion::ScaledParams s0 = fluxion::to_dimensionless(base);

    const double eta_min = section_number(cfg, "sweep", "eta_min", 0.0);
    double eta_max = section_number(cfg, "sweep", "eta_max", 0.0);
    auto steps = static_cast<std::size_t>(section_number(cfg, "sweep", "steps", 20));
    if (steps_f) steps = *steps_f;
    if (steps < 2) throw fluxion::ParamError("sweep needs at least 2 steps");
    if (eta_max <= 0.0) {
        eta_max = 0.98 * fluxion::boundary_eta(s0.ratio);
    }
    if (!(eta_max > eta_min) || eta_min < 0.0) {
        throw fluxion::ParamError("sweep eta range must satisfy 0 <= eta_min < eta_max");
    }

    ordered_json resolved;
    resolved["command"] = "sweep";
    resolved["system"] = fluxion::system_to_json(base);
    resolved["eta_min"] = eta_min;
    resolved["eta_max"] = eta_max;
    resolved["steps"] = steps;
    resolved["rtol"] = g.tol;

    struct Row {
        bool ok = false;
        double eta = 0.0;
        fluxion::CouplingResult r;
    };
    std::vector<Row> rows(steps);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= steps) return;
            Row& row = rows[i];
            row.eta = eta_min + (eta_max - eta_min) * static_cast<double>(i) /
                                    static_cast<double>(steps - 1);
            fluxion::SystemParams p = base;
            p.drive.eta = row.eta;
            try {
                row.r = fluxion::evaluate_coupling(p, 4096, g.tol);
                row.ok = true;
            } catch (const fluxion::UnstableError&) {
                row.ok = false;
            }
        }
    };
    unsigned threads = g.threads ? g.threads : std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || steps < 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    const double w_ratio = base.drive.omega_d / fluxion::derive(base).omega_0;
    fluxion::CsvWriter csv(out_path(g, "coupling_sweep.csv"));
    csv.metadata("config", resolved.dump());
    csv.header({"eta", "omega_d_over_omega_0", "mu", "k", "detuning", "c_k_abs", "gamma",
                "Omega_hz", "Omega_cap_hz"});
    std::size_t skipped = 0;
    for (const auto& row : rows) {
        if (!row.ok) {
            ++skipped;
            std::cerr << "warning: eta = " << fluxion::format_double(row.eta)
                      << " is parametrically unstable; row skipped\n";
            continue;
        }
        csv.raw_row({fluxion::format_double(row.eta), fluxion::format_double(w_ratio),
                     fluxion::format_double(row.r.mu), std::to_string(row.r.k),
                     fluxion::format_double(row.r.detuning),
                     fluxion::format_double(std::abs(row.r.c_k)),
                     fluxion::format_double(row.r.gamma),
                     fluxion::format_double(row.r.Omega / fluxion::constants::two_pi),
                     fluxion::format_double(row.r.Omega_cap / fluxion::constants::two_pi)});
    }
    ordered_json side;
    side["version"] = fluxion::constants::version;
    side["config"] = resolved;
    side["n_rows"] = steps - skipped;
    side["n_skipped_unstable"] = skipped;
    fluxion::write_json(out_path(g, "coupling_sweep.json"), side);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"parametric circuit-ion coupling toolkit"};
    app.set_version_flag("--version",
                         std::string("fluxion ") + fluxion::constants::version);
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--out-dir", g.out_dir, "output directory (default .)");
    app.add_option("--threads", g.threads, "worker threads (default: hardware)");
    app.add_option("--tol", g.tol, "integrator relative tolerance (default 1e-10)");

    auto* stab = app.add_subcommand("stability", "scan the parametric stability map");
    std::string grid_flag;
    stab->add_option("--grid", grid_flag, "grid size RxE, e.g. 50x50");

    auto* drv = app.add_subcommand("drive", "synthesize the external flux program");
    std::optional<double> d_eta, d_beta, d_omega_d;
    drv->add_option("--eta", d_eta, "modulation depth override");
    drv->add_option("--beta", d_beta, "nonlinearity override");
    drv->add_option("--omega-d", d_omega_d, "drive frequency override, rad/s");

    auto* cpl = app.add_subcommand("couple", "evaluate the ion-circuit coupling");
    std::optional<double> c_eta, c_omega_d;
    bool with_corr = false;
    int junctions = 1;
    cpl->add_option("--eta", c_eta, "modulation depth override");
    cpl->add_option("--omega-d", c_omega_d, "drive frequency override, rad/s");
    cpl->add_flag("--with-corrections", with_corr, "embed the nonlinear correction report");
    cpl->add_option("--junctions", junctions, "junction array size for the correction report");

    auto* val = app.add_subcommand("validate", "time-domain check of the exchange rate");
    std::optional<double> v_ratio, v_eta, v_kappa, v_max_err;
    bool allow_large = false;
    std::string traj_path;
    std::size_t traj_stride = 1;
    val->add_option("--ratio", v_ratio, "omega_i/omega_0 for the scaled run");
    val->add_option("--eta", v_eta, "modulation depth override");
    val->add_option("--kappa", v_kappa, "scaled charge-position coupling");
    val->add_option("--max-rel-error", v_max_err, "pass/fail threshold (default 0.05)");
    val->add_flag("--allow-large-ratio", allow_large, "permit omega_0/omega_i > 500");
    val->add_option("--trajectory", traj_path, "also write the trajectory CSV to this file");
    val->add_option("--stride", traj_stride, "trajectory decimation stride");

    auto* swp = app.add_subcommand("sweep", "sweep eta and tabulate the coupling");
    std::optional<double> s_omega_d;
    std::optional<std::size_t> s_steps;
    swp->add_option("--omega-d", s_omega_d, "drive frequency override, rad/s");
    swp->add_option("--steps", s_steps, "number of sweep points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (!g.out_dir.empty() && g.out_dir != ".") {
            std::error_code ec;
            std::filesystem::create_directories(g.out_dir, ec);
            if (ec) {
                throw fluxion::Error("cannot create output directory " + g.out_dir +
                                     ": " + ec.message());
            }
        }
        const ordered_json cfg = load_config(g.config_path);
        if (stab->parsed()) return cmd_stability(g, cfg, grid_flag);
        if (drv->parsed()) return cmd_drive(g, cfg, d_eta, d_beta, d_omega_d);
        if (cpl->parsed()) return cmd_couple(g, cfg, c_eta, c_omega_d, with_corr, junctions);
        if (val->parsed()) {
            return cmd_validate(g, cfg, v_ratio, v_eta, v_kappa, allow_large, v_max_err,
                                traj_path, traj_stride);
        }
        if (swp->parsed()) return cmd_sweep(g, cfg, s_omega_d, s_steps);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const fluxion::DriveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fluxion::UnstableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const fluxion::MarginalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const fluxion::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const fluxion::ResolutionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const fluxion::ExchangeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const fluxion::ParamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fluxion::BoundaryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fluxion::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
}
