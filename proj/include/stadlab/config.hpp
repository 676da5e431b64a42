#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "stadlab/common.hpp"
#include "stadlab/damping.hpp"
#include "stadlab/geometry.hpp"
#include "stadlab/io.hpp"

namespace stadlab {

struct DomainConfig {
    std::string shape = "stadium";  ///< "rectangle" or "stadium"
    double Lx = 1.0;                ///< rectangle width
    double Ly = kPi;                ///< rectangle height
    double beta = 0.5 * kPi;        ///< stadium wing radius
    double h = kPi / 32.0;          ///< nominal grid spacing
};

struct DampingConfig {
    std::string kind = "wing";  ///< "wing", "smooth", or "constant"
    double x_lo = 0.15;         ///< wing: undamped strip start
    double x_hi = 0.85;         ///< wing: undamped strip end
    double floor = 1.0;         ///< wing: value on the wings
    int m = 4;                  ///< smooth: vanishing order at the strip edge
    double delta = 0.1;         ///< smooth: ramp width
    double amplitude = 1.0;     ///< smooth: edge value
    double value = 1.0;         ///< constant: the value
};

struct SweepConfig {
    std::vector<double> lambdas{5.0, 7.0, 10.0, 14.0, 20.0, 28.0};
    double tol = 1e-6;
    double window_lo = 5.0;
    double window_hi = std::numeric_limits<double>::infinity();
};

struct EvolveConfig {
    double T = 400.0;
    double dt = 0.0;  ///< 0 means the stability ceiling 0.4 min(hx, hy)
    double sample_dt = 0.1;
    int k_norms_upto = 2;
    std::string data = "bouncing-ball";  ///< or "low-mode"
    double packet_x0 = 0.5;
    double packet_width = 0.12;
    int transverse_k = 8;
};

struct QuasimodeConfig {
    std::vector<int> ks{8, 16, 32};
    double horizon = 8.0;  ///< per-k times run 0.5 : 0.5 : min(k/4, horizon)
    double sigma = 1.5;
    double cut = 5.0;
    double hx_nominal = 0.02;
};

struct R0Config {
    std::string profile = "constant";  ///< "constant" or "smooth"
    int n = 200;                       ///< interior unknowns on (0, 1)
    double value = 1.0;                ///< constant profile level
    int m = 4;                         ///< smooth profile order
    double delta = 0.1;
    double amplitude = 1.0;
    double tau_min = 1.0;
    double tau_max = 200.0;
    int samples_per_window = 13;
};

struct DerivativeBoundsConfig {
    std::vector<int> ms{4, 6, 8};
    double delta = 0.1;
    double amplitude = 0.0;  ///< 0 means delta^m (unit-derivative scaling)
    double h = 0.01;
};

struct SpectrumConfig {
    double window_re_min = -std::numeric_limits<double>::infinity();
    double window_re_max = std::numeric_limits<double>::infinity();
    std::vector<Complex> targets;  ///< shift-invert seeds for large systems
    Eigen::Index dense_dimension_limit = 4000;
};

/// Full run description, parsed from one JSON file. Parsing is strict:
/// unknown keys anywhere are an error, so a typo cannot silently fall back
/// to a default. Command-line flags may override `jobs` and `out` after the
/// fact; everything that affects numbers lives in the file and is digested
/// into `hash` (FNV-1a of the canonical dump) for provenance in artifacts.
struct RunConfig {
    DomainConfig domain;
    DampingConfig damping;
    SweepConfig sweep;
    EvolveConfig evolve;
    QuasimodeConfig quasimode;
    R0Config r0;
    DerivativeBoundsConfig derivative_bounds;
    SpectrumConfig spectrum;
    std::uint64_t seed = 0x5EEDull;
    int jobs = 1;
    std::string out = "out";
    std::string hash;
};

namespace detail {

inline void check_keys(const Json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw Error("config: " + where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw Error("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

template <class T>
void get_to(const Json& j, const char* key, T& slot, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(slot);
    } catch (const Json::exception& e) {
        throw Error("config: bad value for \"" + std::string(key) + "\" in " +
                    where + ": " + e.what());
    }
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
    using detail::check_keys;
    using detail::get_to;
    RunConfig c;
    check_keys(j, "top level",
               {"domain", "damping", "sweep", "evolve", "quasimode", "r0",
                "derivative_bounds", "spectrum", "seed", "jobs", "out"});

    if (j.contains("domain")) {
        const Json& d = j.at("domain");
        check_keys(d, "domain", {"shape", "Lx", "Ly", "beta", "h"});
        get_to(d, "shape", c.domain.shape, "domain");
        get_to(d, "Lx", c.domain.Lx, "domain");
        get_to(d, "Ly", c.domain.Ly, "domain");
        get_to(d, "beta", c.domain.beta, "domain");
        get_to(d, "h", c.domain.h, "domain");
        if (c.domain.shape != "rectangle" && c.domain.shape != "stadium")
            throw Error("config: domain.shape must be \"rectangle\" or "
                        "\"stadium\"");
    }
    if (j.contains("damping")) {
        const Json& d = j.at("damping");
        check_keys(d, "damping",
                   {"kind", "x_lo", "x_hi", "floor", "m", "delta", "amplitude",
                    "value"});
        get_to(d, "kind", c.damping.kind, "damping");
        get_to(d, "x_lo", c.damping.x_lo, "damping");
        get_to(d, "x_hi", c.damping.x_hi, "damping");
        get_to(d, "floor", c.damping.floor, "damping");
        get_to(d, "m", c.damping.m, "damping");
        get_to(d, "delta", c.damping.delta, "damping");
        get_to(d, "amplitude", c.damping.amplitude, "damping");
        get_to(d, "value", c.damping.value, "damping");
        if (c.damping.kind != "wing" && c.damping.kind != "smooth" &&
            c.damping.kind != "constant")
            throw Error("config: damping.kind must be \"wing\", \"smooth\", "
                        "or \"constant\"");
    }
    if (j.contains("sweep")) {
        const Json& d = j.at("sweep");
        check_keys(d, "sweep", {"lambdas", "tol", "window_lo", "window_hi"});
        get_to(d, "lambdas", c.sweep.lambdas, "sweep");
        get_to(d, "tol", c.sweep.tol, "sweep");
        get_to(d, "window_lo", c.sweep.window_lo, "sweep");
        get_to(d, "window_hi", c.sweep.window_hi, "sweep");
    }
    if (j.contains("evolve")) {
        const Json& d = j.at("evolve");
        check_keys(d, "evolve",
                   {"T", "dt", "sample_dt", "k_norms_upto", "data", "packet_x0",
                    "packet_width", "transverse_k"});
        get_to(d, "T", c.evolve.T, "evolve");
        get_to(d, "dt", c.evolve.dt, "evolve");
        get_to(d, "sample_dt", c.evolve.sample_dt, "evolve");
        get_to(d, "k_norms_upto", c.evolve.k_norms_upto, "evolve");
        get_to(d, "data", c.evolve.data, "evolve");
        get_to(d, "packet_x0", c.evolve.packet_x0, "evolve");
        get_to(d, "packet_width", c.evolve.packet_width, "evolve");
        get_to(d, "transverse_k", c.evolve.transverse_k, "evolve");
        if (c.evolve.data != "bouncing-ball" && c.evolve.data != "low-mode")
            throw Error("config: evolve.data must be \"bouncing-ball\" or "
                        "\"low-mode\"");
    }
    if (j.contains("quasimode")) {
        const Json& d = j.at("quasimode");
        check_keys(d, "quasimode", {"ks", "horizon", "sigma", "cut",
                                    "hx_nominal"});
        get_to(d, "ks", c.quasimode.ks, "quasimode");
        get_to(d, "horizon", c.quasimode.horizon, "quasimode");
        get_to(d, "sigma", c.quasimode.sigma, "quasimode");
        get_to(d, "cut", c.quasimode.cut, "quasimode");
        get_to(d, "hx_nominal", c.quasimode.hx_nominal, "quasimode");
    }
    if (j.contains("r0")) {
        const Json& d = j.at("r0");
        check_keys(d, "r0",
                   {"profile", "n", "value", "m", "delta", "amplitude",
                    "tau_min", "tau_max", "samples_per_window"});
        get_to(d, "profile", c.r0.profile, "r0");
        get_to(d, "n", c.r0.n, "r0");
        get_to(d, "value", c.r0.value, "r0");
        get_to(d, "m", c.r0.m, "r0");
        get_to(d, "delta", c.r0.delta, "r0");
        get_to(d, "amplitude", c.r0.amplitude, "r0");
        get_to(d, "tau_min", c.r0.tau_min, "r0");
        get_to(d, "tau_max", c.r0.tau_max, "r0");
        get_to(d, "samples_per_window", c.r0.samples_per_window, "r0");
        if (c.r0.profile != "constant" && c.r0.profile != "smooth")
            throw Error("config: r0.profile must be \"constant\" or "
                        "\"smooth\"");
    }
    if (j.contains("derivative_bounds")) {
        const Json& d = j.at("derivative_bounds");
        check_keys(d, "derivative_bounds", {"ms", "delta", "amplitude", "h"});
        get_to(d, "ms", c.derivative_bounds.ms, "derivative_bounds");
        get_to(d, "delta", c.derivative_bounds.delta, "derivative_bounds");
        get_to(d, "amplitude", c.derivative_bounds.amplitude,
               "derivative_bounds");
        get_to(d, "h", c.derivative_bounds.h, "derivative_bounds");
    }
    if (j.contains("spectrum")) {
        const Json& d = j.at("spectrum");
        check_keys(d, "spectrum", {"window_re_min", "window_re_max", "targets",
                                   "dense_dimension_limit"});
        get_to(d, "window_re_min", c.spectrum.window_re_min, "spectrum");
        get_to(d, "window_re_max", c.spectrum.window_re_max, "spectrum");
        if (d.contains("targets")) {
            for (const Json& t : d.at("targets")) {
                if (!t.is_array() || t.size() != 2)
                    throw Error("config: spectrum.targets entries must be "
                                "[re, im] pairs");
                c.spectrum.targets.emplace_back(t[0].get<double>(),
                                                t[1].get<double>());
            }
        }
        long long lim = c.spectrum.dense_dimension_limit;
        get_to(d, "dense_dimension_limit", lim, "spectrum");
        c.spectrum.dense_dimension_limit = lim;
    }
    get_to(j, "seed", c.seed, "top level");
    get_to(j, "jobs", c.jobs, "top level");
    get_to(j, "out", c.out, "top level");
    if (c.jobs < 1) throw Error("config: jobs must be >= 1");

    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    c.hash = buf;
    return c;
}

/// Read and parse a config file; I/O and JSON syntax problems surface as
/// Error with the path in the message.
inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("config: cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw Error("config: " + path.string() + " is not valid JSON: " +
                    e.what());
    }
    return parse_config(j);
}

inline GridMesh build_mesh(const DomainConfig& d) {
    if (d.shape == "rectangle") return build_rectangle(d.Lx, d.Ly, d.h);
    return build_stadium(d.beta, d.h);
}

inline DampingProfile build_damping(const GridMesh& mesh,
                                    const DampingConfig& d) {
    if (d.kind == "wing")
        return build_wing_damping(mesh, d.x_lo, d.x_hi, d.floor);
    if (d.kind == "smooth")
        return build_smooth_m_damping(mesh, d.m, d.delta, d.amplitude);
    return uniform_damping(mesh, d.value);
}

}  // namespace stadlab
