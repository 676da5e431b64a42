// stadium-decay: command-line laboratory for resolvent bounds, spectra, and
// energy decay of the damped wave equation on rectangles and stadium-shaped
// domains. Every task reads one strict JSON config, writes CSV/SVG artifacts
// plus a summary.json with named pass/fail checks, and is bit-reproducible
// for a fixed config and seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stadlab/common.hpp"
#include "stadlab/config.hpp"
#include "stadlab/damping.hpp"
#include "stadlab/evolution.hpp"
#include "stadlab/fitting.hpp"
#include "stadlab/geometry.hpp"
#include "stadlab/io.hpp"
#include "stadlab/mode1d.hpp"
#include "stadlab/quasimode.hpp"
#include "stadlab/resolvent2d.hpp"
#include "stadlab/spectrum.hpp"

namespace {

using namespace stadlab;

namespace fs = std::filesystem;

struct TaskReport {
    std::string task;
    fs::path out_dir;
    std::string config_hash;
    Json checks = Json::array();
    std::vector<std::string> artifacts;

    void add_check(const std::string& name, double value, double bound,
                   bool pass) {
        checks.push_back(
            {{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
        std::printf("  check %-28s value %-14s bound %-12s %s\n", name.c_str(),
                    format_g12(value).c_str(), format_g12(bound).c_str(),
                    pass ? "pass" : "FAIL");
    }

    void add_artifact(const std::string& name) { artifacts.push_back(name); }

    void finish() const {
        Json j{{"task", task},
               {"config_hash", config_hash},
               {"checks", checks},
               {"artifacts", artifacts}};
        write_json(out_dir / "summary.json", j);
    }
};

TaskReport make_report(const std::string& task, const RunConfig& cfg) {
    TaskReport r;
    r.task = task;
    r.out_dir = cfg.out;
    r.config_hash = cfg.hash;
    fs::create_directories(r.out_dir);
    return r;
}

std::vector<double> geomspace(double lo, double hi, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(lo * std::pow(hi / lo, n > 1 ? double(i) / (n - 1) : 0.0));
    return out;
}

/// 1D damping profile on (0, 1) with n interior nodes, mirroring the 2D
/// builders: "constant" is flat, "smooth" vanishes to order m at the edges
/// of the undamped middle strip.
RealField r0_profile(const R0Config& cfg) {
    RealField a(cfg.n);
    const double hx = 1.0 / (cfg.n + 1);
    for (int i = 0; i < cfg.n; ++i) {
        const double x = (i + 1) * hx;
        if (cfg.profile == "constant") {
            a[i] = cfg.value;
        } else {
            const double sl = std::max(0.0, (cfg.delta - x) / cfg.delta);
            const double sr =
                std::max(0.0, (x - (1.0 - cfg.delta)) / cfg.delta);
            a[i] = cfg.amplitude *
                   (std::pow(sl, cfg.m) + std::pow(sr, cfg.m));
        }
    }
    return a;
}

CauchyPair packet_data(const GridMesh& mesh, double x0, double width, int k) {
    CauchyPair data;
    data.u0 = Field::Zero(mesh.n_interior);
    data.u1 = Field::Zero(mesh.n_interior);
    for (Eigen::Index idx = 0; idx < mesh.n_interior; ++idx) {
        const auto [i, j] = mesh.nodes[static_cast<std::size_t>(idx)];
        const double x = mesh.node_x(i);
        const double y = mesh.node_y(j);
        data.u0[idx] = std::exp(-(x - x0) * (x - x0) / (2.0 * width * width)) *
                       std::sin(k * kPi * y / mesh.spec.Ly);
    }
    return data;
}

// ---------------------------------------------------------------------- tasks

int task_mesh_info(const RunConfig& cfg) {
    TaskReport rep = make_report("mesh-info", cfg);
    const GridMesh mesh = build_mesh(cfg.domain);
    Json j{{"shape", cfg.domain.shape},
           {"Lx", mesh.spec.Lx},
           {"Ly", mesh.spec.Ly},
           {"beta", mesh.spec.beta},
           {"h", cfg.domain.h},
           {"hx", mesh.hx},
           {"hy", mesh.hy},
           {"nx", mesh.nx},
           {"ny", mesh.ny},
           {"n_interior", mesh.n_interior},
           {"area_estimate", mesh.area_estimate()}};
    write_json(rep.out_dir / "mesh.json", j);
    rep.add_artifact("mesh.json");
    rep.add_check("n_interior", static_cast<double>(mesh.n_interior), 1.0,
                  mesh.n_interior >= 1);
    rep.finish();
    return 0;
}

int task_sweep(const RunConfig& cfg) {
    TaskReport rep = make_report("sweep", cfg);
    const GridMesh mesh = build_mesh(cfg.domain);
    const DampingProfile damping = build_damping(mesh, cfg.damping);
    reset_identity_residual();

    SweepOptions opt;
    opt.tol = cfg.sweep.tol;
    opt.window_lo = cfg.sweep.window_lo;
    opt.window_hi = cfg.sweep.window_hi;
    opt.jobs = cfg.jobs;
    opt.seed = cfg.seed;
    const SweepResult sweep =
        sweep_and_fit(mesh, damping, cfg.sweep.lambdas, opt);

    CsvTable table;
    table.header = {"lambda", "norm", "iterations", "residual", "failed"};
    for (const SweepEntry& e : sweep.entries)
        table.rows.push_back({csv_number(e.lambda), csv_number(e.norm),
                              csv_int(e.iterations), csv_number(e.residual),
                              e.failed ? "1" : "0"});
    write_csv(rep.out_dir / "sweep.csv", table);
    rep.add_artifact("sweep.csv");

    PlotSpec plot;
    plot.title = "Resolvent norm vs frequency";
    plot.xlabel = "lambda";
    plot.ylabel = "||M(lambda)^-1||";
    plot.logx = plot.logy = true;
    PlotSeries pts;
    for (const SweepEntry& e : sweep.entries)
        if (!e.failed) {
            pts.xs.push_back(e.lambda);
            pts.ys.push_back(e.norm);
        }
    pts.markers = true;
    pts.line = false;
    pts.label = "measured";
    plot.series.push_back(pts);
    if (sweep.fitted) {
        PlotSeries fitline;
        for (const SweepEntry& e : sweep.entries)
            if (!e.failed && e.lambda >= cfg.sweep.window_lo &&
                e.lambda <= cfg.sweep.window_hi) {
                fitline.xs.push_back(e.lambda);
                fitline.ys.push_back(std::pow(10.0, sweep.fit.intercept) *
                                     std::pow(e.lambda, sweep.fit.exponent));
            }
        fitline.color = "#d62728";
        fitline.label = "power-law fit";
        plot.series.push_back(fitline);
    }
    write_svg_plot(rep.out_dir / "sweep.svg", plot);
    rep.add_artifact("sweep.svg");

    int n_failed = 0;
    for (const SweepEntry& e : sweep.entries) n_failed += e.failed ? 1 : 0;
    rep.add_check("entries_failed", n_failed, 0.0, n_failed == 0);
    if (sweep.fitted) {
        rep.add_check("fit_exponent", sweep.fit.exponent, 1.3,
                      sweep.fit.exponent <= 1.3);
        rep.add_check("fit_residual", sweep.fit.residual, 0.2,
                      sweep.fit.residual < 0.2);
    } else {
        rep.add_check("fit_available", 0.0, 1.0, false);
    }
    rep.add_check("identity_residual", worst_identity_residual(), 1e-8,
                  worst_identity_residual() <= 1e-8);
    rep.finish();
    return 0;
}

int task_evolve(const RunConfig& cfg) {
    TaskReport rep = make_report("evolve", cfg);
    const GridMesh mesh = build_mesh(cfg.domain);
    const DampingProfile damping = build_damping(mesh, cfg.damping);

    const CauchyPair data =
        cfg.evolve.data == "bouncing-ball"
            ? packet_data(mesh, cfg.evolve.packet_x0, cfg.evolve.packet_width,
                          cfg.evolve.transverse_k)
            : packet_data(mesh, 0.5, 0.25, 1);
    const double dt = cfg.evolve.dt > 0.0
                          ? cfg.evolve.dt
                          : 0.4 * std::min(mesh.hx, mesh.hy);

    EvolveOptions opt;
    opt.sample_dt = cfg.evolve.sample_dt;
    opt.k_norms_upto = cfg.evolve.k_norms_upto;
    opt.track_dissipation = true;
    const EnergyTrace trace = evolve(mesh, damping, data, cfg.evolve.T, dt, opt);

    CsvTable table;
    table.header = {"t", "E", "sqrtE", "functional_k1", "functional_k2"};
    auto weighted = [&](double t, double e, int k) {
        if (t < 2.0 || cfg.evolve.k_norms_upto < k) return 0.0;
        return std::sqrt(e) * std::pow(t, 0.5 * k) /
               std::pow(std::log(t), 0.5 * k + 1.0) / trace.data_norms.at(k);
    };
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double t = trace.times[i], e = trace.energies[i];
        table.rows.push_back({csv_number(t), csv_number(e),
                              csv_number(std::sqrt(e)),
                              csv_number(weighted(t, e, 1)),
                              csv_number(weighted(t, e, 2))});
    }
    write_csv(rep.out_dir / "trace.csv", table);
    rep.add_artifact("trace.csv");

    PlotSpec plot;
    plot.title = "Energy decay";
    plot.xlabel = "t";
    plot.ylabel = "E(t)";
    plot.logy = true;
    PlotSeries s;
    s.xs = trace.times;
    s.ys = trace.energies;
    s.label = "energy";
    plot.series.push_back(s);
    write_svg_plot(rep.out_dir / "trace.svg", plot);
    rep.add_artifact("trace.svg");

    bool monotone = true;
    double worst_jump = 0.0;
    const double scale = trace.energies.empty() ? 1.0 : trace.energies.front();
    for (std::size_t i = 1; i < trace.energies.size(); ++i) {
        const double jump = trace.energies[i] - trace.energies[i - 1];
        worst_jump = std::max(worst_jump, jump / std::max(scale, 1e-300));
        if (jump > 1e-12 * std::max(scale, 1e-300)) monotone = false;
    }
    const bool damped = damping.a_max > 0.0;
    if (damped)
        rep.add_check("energy_monotone_defect", worst_jump, 1e-12, monotone);
    rep.add_check("dissipation_balance", trace.max_dissipation_defect, 1e-10,
                  trace.max_dissipation_defect <= 1e-10);
    for (int k = 1; k <= std::min(2, cfg.evolve.k_norms_upto); ++k) {
        double ck = 0.0;
        bool finite = true;
        try {
            ck = decay_bound_functional(trace, k);
            finite = std::isfinite(ck);
        } catch (const Error&) {
            finite = false;
        }
        rep.add_check("decay_constant_k" + std::to_string(k), ck, 1e300,
                      finite);
    }
    rep.finish();
    return 0;
}

int task_spectrum(const RunConfig& cfg) {
    TaskReport rep = make_report("spectrum", cfg);
    const GridMesh mesh = build_mesh(cfg.domain);
    const DampingProfile damping = build_damping(mesh, cfg.damping);

    SpectrumOptions opt;
    opt.dense_dimension_limit = cfg.spectrum.dense_dimension_limit;
    opt.targets = cfg.spectrum.targets;
    opt.window_re_min = cfg.spectrum.window_re_min;
    opt.window_re_max = cfg.spectrum.window_re_max;
    const SpectrumResult spec = compute_spectrum(mesh, damping, opt);

    CsvTable table;
    table.header = {"re_lambda", "im_lambda", "residual"};
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
        table.rows.push_back({csv_number(spec.eigenvalues[i].real()),
                              csv_number(spec.eigenvalues[i].imag()),
                              csv_number(spec.residuals[i])});
    write_csv(rep.out_dir / "spectrum.csv", table);
    rep.add_artifact("spectrum.csv");

    PlotSpec plot;
    plot.title = "Generator spectrum (" + spec.method + ")";
    plot.xlabel = "Re lambda";
    plot.ylabel = "Im lambda";
    PlotSeries s;
    for (const Complex& lam : spec.eigenvalues) {
        s.xs.push_back(lam.real());
        s.ys.push_back(lam.imag());
    }
    s.line = false;
    s.markers = true;
    plot.series.push_back(s);
    plot.hlines = {0.0, 2.0 * damping.a_max};
    write_svg_plot(rep.out_dir / "spectrum.svg", plot);
    rep.add_artifact("spectrum.svg");

    double min_im = 0.0, max_im = 0.0, max_res = 0.0;
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
        const double im = spec.eigenvalues[i].imag();
        if (i == 0) min_im = max_im = im;
        min_im = std::min(min_im, im);
        max_im = std::max(max_im, im);
        max_res = std::max(max_res, spec.residuals[i]);
    }
    rep.add_check("eigenvalue_count", double(spec.eigenvalues.size()), 1.0,
                  !spec.eigenvalues.empty());
    rep.add_check("band_lower", min_im, -1e-10, min_im >= -1e-10);
    rep.add_check("band_upper", max_im, 2.0 * damping.a_max + 1e-10,
                  max_im <= 2.0 * damping.a_max + 1e-10);
    rep.add_check("max_eigenpair_residual", max_res, 1e-8, max_res <= 1e-8);
    rep.finish();
    return 0;
}

int task_quasimode(const RunConfig& cfg) {
    TaskReport rep = make_report("quasimode", cfg);
    CsvTable table;
    table.header = {"k", "t", "residual", "residual_over_t_over_k"};

    double max_q = 0.0;
    double r16 = -1.0, r32 = -1.0;
    PlotSpec plot;
    plot.title = "Quasimode drift from rigid oscillation";
    plot.xlabel = "t";
    plot.ylabel = "residual";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    for (std::size_t ki = 0; ki < cfg.quasimode.ks.size(); ++ki) {
        const int k = cfg.quasimode.ks[ki];
        QuasimodeSpec spec;
        spec.k = k;
        spec.sigma = cfg.quasimode.sigma;
        spec.cut = cfg.quasimode.cut;
        spec.horizon = cfg.quasimode.horizon;
        std::vector<double> ts;
        for (double t = 0.5;
             t <= std::min(k / 4.0, cfg.quasimode.horizon) + 1e-9; t += 0.5)
            ts.push_back(t);
        if (ts.empty()) continue;
        const QuasimodeRun run =
            quasimode_residuals(spec, ts, cfg.quasimode.hx_nominal);
        PlotSeries s;
        s.color = colors[ki % 4];
        s.label = "k = " + std::to_string(k);
        s.markers = true;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double q = run.residuals[i] / (ts[i] / k);
            max_q = std::max(max_q, q);
            if (k == 16 && std::abs(ts[i] - 4.0) < 1e-9) r16 = run.residuals[i];
            if (k == 32 && std::abs(ts[i] - 4.0) < 1e-9) r32 = run.residuals[i];
            table.rows.push_back({csv_int(k), csv_number(ts[i]),
                                  csv_number(run.residuals[i]),
                                  csv_number(q)});
            s.xs.push_back(ts[i]);
            s.ys.push_back(run.residuals[i]);
        }
        plot.series.push_back(s);
    }
    write_csv(rep.out_dir / "quasimode.csv", table);
    rep.add_artifact("quasimode.csv");
    write_svg_plot(rep.out_dir / "quasimode.svg", plot);
    rep.add_artifact("quasimode.svg");

    rep.add_check("max_residual_over_t_over_k", max_q, 3.0, max_q <= 3.0);
    if (r16 > 0.0 && r32 > 0.0) {
        const double ratio = r16 / r32;
        rep.add_check("halving_ratio_lower", ratio, 1.4, ratio >= 1.4);
        rep.add_check("halving_ratio_upper", ratio, 2.8, ratio <= 2.8);
    }
    rep.finish();
    return 0;
}

int task_r0(const RunConfig& cfg) {
    TaskReport rep = make_report("r0", cfg);
    const RealField a = r0_profile(cfg.r0);
    const double hx = 1.0 / (cfg.r0.n + 1);

    // Dyadic windows [lo, min(2 lo, tau_max)] with boundary samples shared;
    // each sample is evaluated once and contributes to every window
    // containing it.
    struct Window {
        double lo, hi;
        std::size_t first, last;  // inclusive sample index range
    };
    std::vector<double> taus;
    std::vector<Window> windows;
    for (double lo = cfg.r0.tau_min; lo < cfg.r0.tau_max;
         lo = std::min(2.0 * lo, cfg.r0.tau_max)) {
        const double hi = std::min(2.0 * lo, cfg.r0.tau_max);
        Window w{lo, hi, 0, 0};
        const auto pts = geomspace(lo, hi, cfg.r0.samples_per_window);
        w.first = taus.empty() ? 0 : taus.size() - 1;  // reuse shared boundary
        for (std::size_t i = taus.empty() ? 0 : 1; i < pts.size(); ++i)
            taus.push_back(pts[i]);
        w.last = taus.size() - 1;
        windows.push_back(w);
    }

    std::vector<double> norms(taus.size(), 0.0);
    parallel_for(static_cast<int>(taus.size()), cfg.jobs, [&](int i) {
        norms[static_cast<std::size_t>(i)] =
            r0_operator_norm(taus[static_cast<std::size_t>(i)], a, hx);
    });

    CsvTable table;
    table.header = {"tau", "norm", "norm_times_1plustau"};
    for (std::size_t i = 0; i < taus.size(); ++i)
        table.rows.push_back({csv_number(taus[i]), csv_number(norms[i]),
                              csv_number((1.0 + taus[i]) * norms[i])});
    write_csv(rep.out_dir / "r0.csv", table);
    rep.add_artifact("r0.csv");

    PlotSpec plot;
    plot.title = "Stationary resolvent growth";
    plot.xlabel = "tau";
    plot.ylabel = "(1 + tau) ||R0(tau)||";
    plot.logx = plot.logy = true;
    PlotSeries s;
    s.xs = taus;
    for (std::size_t i = 0; i < taus.size(); ++i)
        s.ys.push_back((1.0 + taus[i]) * norms[i]);
    s.markers = true;
    plot.series.push_back(s);
    write_svg_plot(rep.out_dir / "r0.svg", plot);
    rep.add_artifact("r0.svg");

    double sup_min = 0.0, sup_max = 0.0;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        double sup = 0.0;
        for (std::size_t i = windows[wi].first; i <= windows[wi].last; ++i)
            sup = std::max(sup, (1.0 + taus[i]) * norms[i]);
        if (wi == 0) sup_min = sup_max = sup;
        sup_min = std::min(sup_min, sup);
        sup_max = std::max(sup_max, sup);
    }
    const double factor = sup_min > 0.0 ? sup_max / sup_min
                                        : std::numeric_limits<double>::infinity();
    rep.add_check("window_variation_factor", factor, 3.0, factor < 3.0);
    rep.finish();
    return 0;
}

int task_derivative_bounds(const RunConfig& cfg) {
    TaskReport rep = make_report("derivative-bounds", cfg);
    CsvTable table;
    table.header = {"m", "n", "constant"};
    bool all_finite = true;
    std::vector<std::pair<int, double>> n1;
    for (int m : cfg.derivative_bounds.ms) {
        const GridMesh mesh = build_rectangle(1.0, kPi, cfg.derivative_bounds.h);
        const double amp = cfg.derivative_bounds.amplitude > 0.0
                               ? cfg.derivative_bounds.amplitude
                               : std::pow(cfg.derivative_bounds.delta, m);
        const DampingProfile damping = build_smooth_m_damping(
            mesh, m, cfg.derivative_bounds.delta, amp);
        for (int n = 1; n < m; ++n) {
            const double c = derivative_bound_constant(damping, n);
            all_finite = all_finite && std::isfinite(c);
            if (n == 1) n1.emplace_back(m, c);
            table.rows.push_back({csv_int(m), csv_int(n), csv_number(c)});
        }
    }
    write_csv(rep.out_dir / "derivative_bounds.csv", table);
    rep.add_artifact("derivative_bounds.csv");

    rep.add_check("all_constants_finite", all_finite ? 1.0 : 0.0, 1.0,
                  all_finite);
    if (cfg.derivative_bounds.amplitude <= 0.0)  // canonical delta^m scaling
        for (const auto& [m, c] : n1)
            rep.add_check("first_derivative_m" + std::to_string(m),
                          std::abs(c - m), 1e-10 * m,
                          std::abs(c - m) <= 1e-10 * m);
    rep.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for damped waves on partially "
                 "rectangular domains"};
    std::string task, config_path, out_override;
    int jobs_override = 0;
    app.add_option("task", task, "one of: mesh-info, sweep, evolve, spectrum, "
                                 "quasimode, r0, derivative-bounds")
        ->required()
        ->check(CLI::IsMember({"mesh-info", "sweep", "evolve", "spectrum",
                               "quasimode", "r0", "derivative-bounds"}));
    app.add_option("--config", config_path, "JSON run configuration")
        ->required();
    app.add_option("--jobs", jobs_override, "worker threads (overrides config)");
    app.add_option("--out", out_override, "artifact directory (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    stadlab::RunConfig cfg;
    try {
        cfg = stadlab::load_config(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    if (jobs_override > 0) cfg.jobs = jobs_override;
    if (!out_override.empty()) cfg.out = out_override;

    std::printf("task %s (config %s, hash %s)\n", task.c_str(),
                config_path.c_str(), cfg.hash.c_str());
    try {
        if (task == "mesh-info") return task_mesh_info(cfg);
        if (task == "sweep") return task_sweep(cfg);
        if (task == "evolve") return task_evolve(cfg);
        if (task == "spectrum") return task_spectrum(cfg);
        if (task == "quasimode") return task_quasimode(cfg);
        if (task == "r0") return task_r0(cfg);
        if (task == "derivative-bounds") return task_derivative_bounds(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 2;  // unreachable given the IsMember check
}
