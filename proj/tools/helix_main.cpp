// helix: experiment driver for the helical-state laboratory. Each
// subcommand runs one study (band scan, kernel scan, linear decay,
// nonlinear evolution, frame cross-check, convergence) and leaves its
// CSV artifacts plus a hash-listed manifest.json in the output
// directory. Re-running a command with --verify skips the computation
// and re-checks the hashes of an existing run.
//
// Exit codes: 0 all verdicts pass, 1 scientific verdict failure or
// abnormal run, 2 usage or configuration error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "helix/bloch.hpp"
#include "helix/diagnostics.hpp"
#include "helix/evolve.hpp"
#include "helix/frame.hpp"
#include "helix/io.hpp"
#include "helix/kernel.hpp"
#include "helix/propagator.hpp"
#include "helix/util.hpp"

using nlohmann::json;
using namespace helix;

namespace {

constexpr int kOk = 0;
constexpr int kVerdictFail = 1;
constexpr int kUsage = 2;

constexpr const char* kMeanModeCaveat =
    "the k = 0 mode is undamped by the linearization; decay statements "
    "assume mean-zero or rapidly decaying data";

// Shared per-command context: parsed config, output directory, and the
// manifest under construction. Files registered here are hashed into
// the manifest at the end.
struct RunContext {
    std::string out_dir;
    Config cfg;
    std::string cfg_text;
    json manifest;
    std::vector<std::string> files;
    bool all_verdicts_pass = true;

    void add_file(const std::string& name) { files.push_back(name); }

    std::string path(const std::string& name) const {
        return out_dir + "/" + name;
    }

    // Records one named pass/fail with its measured value.
    void verdict(const std::string& name, bool pass, double measured,
                 const std::string& budget) {
        manifest["verdicts"][name] = {
            {"pass", pass}, {"measured", measured}, {"budget", budget}};
        if (!pass) all_verdicts_pass = false;
    }
};

int open_context(RunContext& ctx, const std::string& command,
                 const std::string& config_path, const std::string& out_dir) {
    ctx.out_dir = out_dir.empty() ? "out-" + command : out_dir;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "helix %s: cannot create %s: %s\n",
                     command.c_str(), ctx.out_dir.c_str(),
                     ec.message().c_str());
        return kUsage;
    }
    if (!config_path.empty()) {
        try {
            ctx.cfg = Config::parse_file(config_path);
            std::ifstream is(config_path);
            ctx.cfg_text.assign(std::istreambuf_iterator<char>(is),
                                std::istreambuf_iterator<char>());
        } catch (const std::exception& e) {
            std::fprintf(stderr, "helix %s: %s\n", command.c_str(), e.what());
            return kUsage;
        }
    }
    ctx.manifest["command"] = command;
    ctx.manifest["config_text"] = ctx.cfg_text;
    ctx.manifest["threads"] = thread_count();
    ctx.manifest["format_versions"] = {{"manifest", 1}, {"snapshot", 1}};
    return kOk;
}

// Every key in the config must have been consumed by now; anything
// left is a typo or a key for a different command.
int reject_unknown(RunContext& ctx, const std::string& command) {
    auto unknown = ctx.cfg.unknown_keys();
    if (unknown.empty()) return kOk;
    for (const auto& k : unknown)
        std::fprintf(stderr, "helix %s: unknown config key '%s'\n",
                     command.c_str(), k.c_str());
    return kUsage;
}

int finish(RunContext& ctx, int status) {
    for (const auto& name : ctx.files)
        ctx.manifest["files"][name] = sha256_file(ctx.path(name));
    ctx.manifest["exit_status"] =
        status == kOk && !ctx.all_verdicts_pass ? kVerdictFail : status;
    write_json_atomic(ctx.path("manifest.json"), ctx.manifest);
    if (status != kOk) return status;
    return ctx.all_verdicts_pass ? kOk : kVerdictFail;
}

int run_verify(const std::string& out_dir, const std::string& command) {
    const std::string dir = out_dir.empty() ? "out-" + command : out_dir;
    std::string err;
    try {
        if (verify_manifest(dir + "/manifest.json", &err)) {
            std::printf("helix %s: manifest hashes verified\n", command.c_str());
            return kOk;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix %s: %s\n", command.c_str(), e.what());
        return kUsage;
    }
    std::fprintf(stderr, "helix %s: hash mismatch: %s\n", command.c_str(),
                 err.c_str());
    return kVerdictFail;
}

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string item = text.substr(pos, comma - pos);
        char* end = nullptr;
        double v = std::strtod(item.c_str(), &end);
        require(end == item.c_str() + item.size() && !item.empty(),
                "bad number in list: '" + item + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

std::vector<double> geometric_times(double t0, double t1, int n) {
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i)
        ts[i] = t0 * std::pow(t1 / t0, i / double(n - 1));
    return ts;
}

json fit_to_json(const std::string& quantity, const DecayFit& fit,
                 double expected) {
    return {{"quantity", quantity},     {"exponent", fit.exponent},
            {"expected", expected},     {"residual", fit.residual},
            {"window", {fit.t_lo, fit.t_hi}}};
}

// Random chart field: low-mode spectral noise under a smooth envelope,
// scaled to the requested sup. Mirrors the construction the frame
// cross-check in the test suite uses.
Field random_chart_field(const Box& b, unsigned seed, double amplitude) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    int cap1 = std::min(b.n1 / 16, 12);
    int cap2 = b.d == 2 ? std::min(b.n2 / 16, 12) : 0;
    Field f(b, Space::spectral);
    for (int i1 = 0; i1 < b.n1; ++i1) {
        int j1 = Box::signed_index(i1, b.n1);
        for (int i2 = 0; i2 < b.n2; ++i2) {
            int j2 = Box::signed_index(i2, b.n2);
            if (std::abs(j1) > cap1 || std::abs(j2) > cap2) continue;
            double w = std::exp(-(j1 * j1 + j2 * j2) / 18.0);
            f.at(i1, i2) = w * cplx(dist(gen), dist(gen));
        }
    }
    f.to_physical();
    double s = 0.0;
    for (const cplx& v : f.data) s = std::max(s, std::abs(v));
    if (s > 0.0) f *= cplx(amplitude / s, 0.0);
    return f;
}

double rel_l2_gap(const Field& a, const Field& b) {
    double num = 0.0, den = 0.0;
    Field pa = a, pb = b;
    pa.to_spectral();
    pb.to_spectral();
    for (std::size_t i = 0; i < pa.data.size(); ++i) {
        num += std::norm(pa.data[i] - pb.data[i]);
        den += std::norm(pb.data[i]);
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

double sup_of(const Field& f) {
    Field p = f;
    p.to_physical();
    double s = 0.0;
    for (const cplx& v : p.data) s = std::max(s, std::abs(v));
    return s;
}

// ---------------------------------------------------------------- bands

int cmd_bands(const std::string& config_path, const std::string& out_dir) {
    RunContext ctx;
    int rc = open_context(ctx, "bands", config_path, out_dir);
    if (rc != kOk) return rc;

    int d, nx1, nx2, K, n_max;
    double xi2_max;
    try {
        d = ctx.cfg.get_int("bands.d", 2);
        nx1 = ctx.cfg.get_int("bands.xi1_points", 32);
        nx2 = ctx.cfg.get_int("bands.xi2_points", 32);
        xi2_max = ctx.cfg.get_double("bands.xi2_max", 2.0);
        K = ctx.cfg.get_int("bands.k_window", 32);
        n_max = ctx.cfg.get_int("bands.n_bands", 2);
        rc = reject_unknown(ctx, "bands");
        if (rc != kOk) return rc;
        require(d == 2 || d == 3, "bands: d must be 2 or 3");
        require(nx1 >= 2 && nx2 >= 2 && K >= 4 && n_max >= 0 && xi2_max > 0,
                "bands: bad grid spec");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix bands: %s\n", e.what());
        return kUsage;
    }

    std::vector<double> xi1(nx1), xi2(nx2);
    for (int i = 0; i < nx1; ++i) xi1[i] = i / double(nx1);
    for (int j = 0; j < nx2; ++j)
        xi2[j] = -xi2_max + 2.0 * xi2_max * j / double(nx2 - 1);

    SpectralScanReport rep = band_scan(d, xi1, xi2, K, std::max(n_max, 2));

    std::vector<std::vector<double>> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const ScanPoint& p : rep.points) {
        std::vector<double> row = {p.xi1, p.xi2, p.xi3};
        for (int n = 0; n < 3; ++n)
            row.push_back(n < int(p.lambda.size()) ? p.lambda[n] : nan);
        row.push_back(p.ratio >= 0.0 ? p.ratio : nan);
        rows.push_back(std::move(row));
    }
    write_csv(ctx.path("bands.csv"), "xi1,xi2,xi3,lambda0,lambda1,lambda2,ratio",
              rows);
    ctx.add_file("bands.csv");

    ctx.manifest["theta0_measured"] = rep.min_ratio;
    ctx.manifest["theta0_argmin"] = {rep.min_ratio_xi1, rep.min_ratio_xi2};
    ctx.manifest["min_lambda1"] = rep.min_lambda1;
    ctx.verdict("symmetry_xi1", rep.sym_defect_xi1 <= 1e-10, rep.sym_defect_xi1,
                "<= 1e-10");
    ctx.verdict("symmetry_xi2", rep.sym_defect_xi2 <= 1e-10, rep.sym_defect_xi2,
                "<= 1e-10");
    ctx.verdict("monotone_xi1", rep.monotonic_defect <= 1e-10,
                rep.monotonic_defect, "<= 1e-10");
    ctx.verdict("band_interlacing", rep.interlace_defect <= 1e-10,
                rep.interlace_defect, "<= 1e-10");
    ctx.verdict("theta0_positive", rep.min_ratio > 0.0, rep.min_ratio, "> 0");
    return finish(ctx, kOk);
}

// ----------------------------------------------------------- kernel-scan

int cmd_kernel_scan(const std::string& config_path, const std::string& out_dir) {
    RunContext ctx;
    int rc = open_context(ctx, "kernel-scan", config_path, out_dir);
    if (rc != kOk) return rc;

    KernelQuadrature quad;
    KernelNorm norm = KernelNorm::l2;
    int deriv, n_t;
    double t_min, t_max, p;
    try {
        quad.d = ctx.cfg.get_int("kernel.d", 1);
        quad.alpha = ctx.cfg.get_double("kernel.alpha", 1.0);
        quad.n_xi1 = ctx.cfg.get_int("kernel.n_xi1", 256);
        quad.ladder = ctx.cfg.get_int("kernel.ladder", 8);
        quad.n_xi2 = ctx.cfg.get_int("kernel.n_xi2", quad.d == 2 ? 96 : 0);
        quad.xi2_step =
            ctx.cfg.get_double("kernel.xi2_step", quad.d == 2 ? 0.03125 : 0.0);
        quad.chi.inner = ctx.cfg.get_double("kernel.chi_inner", 1.0);
        quad.chi.outer = ctx.cfg.get_double("kernel.chi_outer", 2.0);
        std::string norm_name = ctx.cfg.get_string("kernel.norm", "l2");
        require(norm_name == "l2" || norm_name == "sup",
                "kernel: norm must be l2 or sup");
        norm = norm_name == "l2" ? KernelNorm::l2 : KernelNorm::sup;
        p = norm == KernelNorm::l2 ? 2.0 : std::numeric_limits<double>::infinity();
        deriv = ctx.cfg.get_int("kernel.deriv", 0);
        // Late default window: fitting a pure power against (1 + alpha t)
        // understates the exponent by O(1/t) at the window's left edge.
        t_min = ctx.cfg.get_double("kernel.t_min", 8.0 / quad.alpha);
        t_max = ctx.cfg.get_double("kernel.t_max", 120.0 / quad.alpha);
        n_t = ctx.cfg.get_int("kernel.samples", 16);
        rc = reject_unknown(ctx, "kernel-scan");
        if (rc != kOk) return rc;
        require(deriv >= 0 && deriv <= 2 && n_t >= 4 && t_min > 0 &&
                    t_max > t_min,
                "kernel: bad scan spec");
        quad.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix kernel-scan: %s\n", e.what());
        return kUsage;
    }

    KernelTable table(quad);
    KernelScan scan = table.norm_scan(geometric_times(t_min, t_max, n_t), norm,
                                      deriv);

    std::vector<std::vector<double>> rows;
    for (const KernelScanRow& r : scan.rows)
        rows.push_back({r.t, r.norm, r.envelope});
    write_csv(ctx.path("kernel.csv"), "t,norm,expected_envelope", rows);
    ctx.add_file("kernel.csv");

    ctx.manifest["fits"] = json::array(
        {fit_to_json(norm == KernelNorm::l2 ? "kernel_L2" : "kernel_sup",
                     scan.fit, scan.expected_exponent)});
    ctx.manifest["resolution_horizon"] = table.resolution_horizon();
    double dev = std::abs(scan.fit.exponent - scan.expected_exponent);
    ctx.verdict("fit_ok", scan.fit.ok, scan.fit.n_points, ">= 4 samples");
    ctx.verdict("exponent_within_10pct",
                dev <= 0.10 * std::abs(scan.expected_exponent), dev,
                "|measured - expected| <= 10%");
    ctx.verdict("resolved", !scan.resolution_warning,
                scan.resolution_warning ? 1.0 : 0.0, "no resolution warning");
    (void)p;
    return finish(ctx, kOk);
}

// ---------------------------------------------------------- linear-decay

int cmd_linear_decay(const std::string& config_path,
                     const std::string& out_dir) {
    RunContext ctx;
    int rc = open_context(ctx, "linear-decay", config_path, out_dir);
    if (rc != kOk) return rc;

    Box box;
    double alpha, sigma, amplitude, t_max, t_lo_fit;
    int n_t;
    bool grad_variant;
    CutoffProfile chi;
    try {
        box.d = ctx.cfg.get_int("linear.d", 1);
        box.n_per = ctx.cfg.get_int("linear.n_per", 64);
        box.n1 = ctx.cfg.get_int("linear.n1", 1024);
        box.n2 = ctx.cfg.get_int("linear.n2", box.d == 2 ? 768 : 1);
        box.L2 = ctx.cfg.get_double("linear.L2", box.d == 2 ? 288.0 : 0.0);
        alpha = ctx.cfg.get_double("linear.alpha", 1.0);
        // d = 2 wants data wide enough that most of its spectrum sits
        // inside the flat part of the narrow low cutoff below.
        sigma = ctx.cfg.get_double("linear.sigma", box.d == 2 ? 4.0 : 1.5);
        amplitude = ctx.cfg.get_double("linear.amplitude", 1e-3);
        t_max = ctx.cfg.get_double("linear.t_max",
                                   (box.d == 2 ? 300.0 : 40.0) / alpha);
        n_t = ctx.cfg.get_int("linear.samples", 25);
        grad_variant = ctx.cfg.get_bool("linear.gradient", false);
        // For d = 2 the low projector keeps only the bottom band, and
        // its eigenvector is smooth in the quasi-momentum only while
        // the band stays separated. The default cutoff therefore stops
        // well inside the first zone (the lowest two bands touch at the
        // zone edge on the axis of zero transverse frequency, and a
        // cutoff reaching that point delocalizes the projection). In
        // d = 1 the projector is a plain wavenumber cutoff and the
        // wider profile is safe.
        chi.inner = ctx.cfg.get_double("linear.chi_inner",
                                       box.d == 2 ? 0.25 : 1.0);
        chi.outer = ctx.cfg.get_double("linear.chi_outer",
                                       box.d == 2 ? 0.45 : 2.0);
        // The wider data in d = 2 reaches its asymptotic power law later,
        // so the fit starts late there.
        t_lo_fit = ctx.cfg.get_double("linear.fit_from",
                                      (box.d == 2 ? 40.0 : 2.0) / alpha);
        rc = reject_unknown(ctx, "linear-decay");
        if (rc != kOk) return rc;
        require(alpha > 0 && sigma > 0 && amplitude > 0 && n_t >= 6,
                "linear: bad study spec");
        box.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix linear-decay: %s\n", e.what());
        return kUsage;
    }

    const Propagator prop(box, alpha, chi);
    Field u0 = prop.project_low(gaussian_chart_data(box, amplitude, sigma, true));
    std::vector<double> times = geometric_times(0.25 / alpha, t_max, n_t);
    std::vector<double> ts, l2s, linfs;
    double wrap_time = -1.0;
    for (double t : times) {
        Field ut = prop.apply_semigroup(u0, t);
        if (edge_mass_fraction(ut) > 1e-6) {
            wrap_time = t;
            break;
        }
        Field probe = ut;
        if (grad_variant) {
            // Replace the field by |grad u| pointwise; both norms below
            // then measure the gradient.
            Field g1 = derivative(ut, 0);
            g1.to_physical();
            Field g2 = box.d == 2 ? derivative(ut, 1) : Field(box);
            g2.to_physical();
            probe = Field(box);
            for (std::size_t i = 0; i < probe.data.size(); ++i)
                probe.data[i] = cplx(std::hypot(std::abs(g1.data[i]),
                                                std::abs(g2.data[i])),
                                     0.0);
        }
        NormReport nr = norms(probe, 2.0, t);
        ts.push_back(t);
        l2s.push_back(nr.L2);
        linfs.push_back(nr.Linf);
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ts.size(); ++i)
        rows.push_back({ts[i], l2s[i], linfs[i]});
    write_csv(ctx.path("linear.csv"), "t,L2,Linf", rows);
    ctx.add_file("linear.csv");

    const double gshift = grad_variant ? 0.5 : 0.0;
    const double want_l2 = -(box.d / 4.0) - gshift;
    const double want_linf = -(box.d / 2.0) - gshift;
    DecayFit fit_l2 = fit_decay_window(ts, l2s, alpha, t_lo_fit, t_max);
    DecayFit fit_linf = fit_decay_window(ts, linfs, alpha, t_lo_fit, t_max);

    ctx.manifest["fits"] = json::array({fit_to_json("L2", fit_l2, want_l2),
                                        fit_to_json("Linf", fit_linf, want_linf)});
    ctx.manifest["wrap_time"] = wrap_time;
    ctx.manifest["caveats"] = json::array({kMeanModeCaveat});
    ctx.verdict("fit_window_reached", fit_l2.ok && fit_linf.ok,
                double(fit_l2.n_points), ">= 4 samples past 2/alpha");
    ctx.verdict("L2_exponent_within_10pct",
                std::abs(fit_l2.exponent - want_l2) <= 0.10 * std::abs(want_l2),
                fit_l2.exponent, "expected " + fmt_g(want_l2));
    ctx.verdict("Linf_exponent_within_10pct",
                std::abs(fit_linf.exponent - want_linf) <=
                    0.10 * std::abs(want_linf),
                fit_linf.exponent, "expected " + fmt_g(want_linf));
    return finish(ctx, kOk);
}

// --------------------------------------------------------------- evolve

int cmd_evolve(const std::string& config_path, const std::string& out_dir) {
    RunContext ctx;
    int rc = open_context(ctx, "evolve", config_path, out_dir);
    if (rc != kOk) return rc;

    SimConfig sim;
    double amplitude, sigma;
    bool mean_zero, check_decay, save_snapshots;
    try {
        sim.d = ctx.cfg.get_int("run.d", 1);
        sim.n_per = ctx.cfg.get_int("run.n_per", 64);
        sim.n1 = ctx.cfg.get_int("run.n1", 1024);
        sim.n2 = ctx.cfg.get_int("run.n2", sim.d == 2 ? 256 : 1);
        sim.L2 = ctx.cfg.get_double("run.L2", sim.d == 2 ? 96.0 : 0.0);
        sim.alpha = ctx.cfg.get_double("run.alpha", 1.0);
        sim.dt = ctx.cfg.get_double("run.dt", 0.05);
        sim.t_end = ctx.cfg.get_double("run.t_end", 40.0);
        sim.scheme = scheme_from_name(ctx.cfg.get_string("run.scheme", "etd-u"));
        sim.beta = ctx.cfg.get_double("run.beta", 0.0);
        sim.s = ctx.cfg.get_double("run.s", 2.0);
        sim.snapshot_stride = ctx.cfg.get_int("run.snapshot_stride", 10);
        sim.chi.inner = ctx.cfg.get_double("run.chi_inner", 1.0);
        sim.chi.outer = ctx.cfg.get_double("run.chi_outer", 2.0);
        amplitude = ctx.cfg.get_double("data.amplitude", 1e-3);
        sigma = ctx.cfg.get_double("data.sigma", 1.5);
        mean_zero = ctx.cfg.get_bool("data.mean_zero", true);
        check_decay = ctx.cfg.get_bool("run.check_decay", false);
        save_snapshots = ctx.cfg.get_bool("run.save_snapshots", true);
        rc = reject_unknown(ctx, "evolve");
        if (rc != kOk) return rc;
        sim.validate();
        require(amplitude >= 0 && sigma > 0, "evolve: bad data spec");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix evolve: %s\n", e.what());
        return kUsage;
    }

    Field u0 = gaussian_chart_data(sim.box(), amplitude, sigma, mean_zero);
    if (save_snapshots) {
        save_fields(ctx.path("initial.hlxf"), u0);
        ctx.add_file("initial.hlxf");
    }

    RunRecord rec = evolve(sim, u0);

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rec.series.size(); ++i) {
        const NormReport& nr = rec.series[i];
        const MSample& ms = rec.msamples[i];
        // Running functionals up to this sample, so the CSV shows their
        // growth history rather than only the final suprema.
        std::vector<MSample> prefix(rec.msamples.begin(),
                                    rec.msamples.begin() + i + 1);
        MFunctionals mf = m_functionals(prefix, sim.alpha, sim.d,
                                        rec.functionals.c0);
        (void)ms;
        rows.push_back({nr.t, nr.L1, nr.L2, nr.Linf, nr.Hs, mf.M_L, mf.M_H,
                        nr.sup_u, rec.energy[i]});
    }
    write_csv(ctx.path("series.csv"), "t,L1,L2,Linf,Hs,M_L,M_H,sup_u,energy",
              rows);
    ctx.add_file("series.csv");
    if (save_snapshots) {
        save_fields(ctx.path("final.hlxf"), rec.u_final);
        ctx.add_file("final.hlxf");
    }

    ctx.manifest["termination"] = termination_name(rec.termination);
    ctx.manifest["t_final"] = rec.t_final;
    ctx.manifest["max_sup_u"] = rec.max_u_sup_seen;
    ctx.manifest["functionals"] = {{"M_L", rec.functionals.M_L},
                                   {"M_H", rec.functionals.M_H},
                                   {"M", rec.functionals.M},
                                   {"c0", rec.functionals.c0},
                                   {"t_arg_low", rec.functionals.t_arg_low},
                                   {"t_arg_high", rec.functionals.t_arg_high}};
    ctx.manifest["caveats"] = json::array({kMeanModeCaveat});

    json fits = json::array();
    if (check_decay && rec.termination == Termination::completed) {
        std::vector<double> ts, l2s, linfs;
        for (const NormReport& nr : rec.series) {
            ts.push_back(nr.t);
            l2s.push_back(nr.L2);
            linfs.push_back(nr.Linf);
        }
        const double lo = 4.0 / sim.alpha, hi = 0.9 * rec.t_final;
        const double want_l2 = -sim.d / 4.0, want_linf = -sim.d / 2.0;
        DecayFit fl2 = fit_decay_window(ts, l2s, sim.alpha, lo, hi);
        DecayFit flinf = fit_decay_window(ts, linfs, sim.alpha, lo, hi);
        fits.push_back(fit_to_json("L2", fl2, want_l2));
        fits.push_back(fit_to_json("Linf", flinf, want_linf));
        ctx.verdict("L2_exponent_within_15pct",
                    fl2.ok && std::abs(fl2.exponent - want_l2) <=
                                  0.15 * std::abs(want_l2),
                    fl2.exponent, "expected " + fmt_g(want_l2));
        ctx.verdict("Linf_exponent_within_15pct",
                    flinf.ok && std::abs(flinf.exponent - want_linf) <=
                                    0.15 * std::abs(want_linf),
                    flinf.exponent, "expected " + fmt_g(want_linf));
    }
    ctx.manifest["fits"] = fits;

    return finish(ctx, rec.termination == Termination::completed ? kOk
                                                                 : kVerdictFail);
}

// ---------------------------------------------------------- frame-check

int cmd_frame_check(const std::string& config_path,
                    const std::string& out_dir) {
    RunContext ctx;
    int rc = open_context(ctx, "frame-check", config_path, out_dir);
    if (rc != kOk) return rc;

    Box box;
    int n_seeds;
    unsigned seed0;
    double amplitude, alpha, tol;
    bool force_violation;
    try {
        box.d = ctx.cfg.get_int("frame.d", 1);
        box.n_per = ctx.cfg.get_int("frame.n_per", 8);
        box.n1 = ctx.cfg.get_int("frame.n1", 128);
        box.n2 = ctx.cfg.get_int("frame.n2", box.d == 2 ? 32 : 1);
        box.L2 = ctx.cfg.get_double("frame.L2", box.d == 2 ? 24.0 : 0.0);
        n_seeds = ctx.cfg.get_int("frame.seeds", 20);
        seed0 = unsigned(ctx.cfg.get_int("frame.seed0", 1));
        amplitude = ctx.cfg.get_double("frame.amplitude", 0.3);
        alpha = ctx.cfg.get_double("frame.alpha", 1.0);
        tol = ctx.cfg.get_double("frame.tolerance", 1e-8);
        force_violation = ctx.cfg.get_bool("frame.force_violation", false);
        rc = reject_unknown(ctx, "frame-check");
        if (rc != kOk) return rc;
        require(n_seeds >= 1 && amplitude > 0 && amplitude < 1 && tol > 0,
                "frame: bad check spec");
        box.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix frame-check: %s\n", e.what());
        return kUsage;
    }

    const FrameBasis frame(box);

    if (force_violation) {
        // Scale a valid perturbation off the sphere and confirm the
        // stepping guard refuses it.
        Field u = random_chart_field(box, seed0, amplitude);
        VecField m = u_to_m(u, frame);
        for (auto& f : m.c) f *= cplx(1.5, 0.0);
        SimConfig sim;
        sim.d = box.d;
        sim.n_per = box.n_per;
        sim.n1 = box.n1;
        sim.n2 = box.n2;
        sim.L2 = box.L2;
        sim.alpha = alpha;
        sim.scheme = Scheme::imex_m;
        sim.dt = 0.01;
        sim.t_end = 0.01;
        SimState st;
        st.m = m;
        bool refused = !step_imex_m(st, sim, frame);
        ctx.verdict("constraint_guard_fired", refused, refused ? 1.0 : 0.0,
                    "guard returns failure");
        ctx.manifest["caveats"] =
            json::array({"deliberate constraint violation requested"});
        return finish(ctx, refused ? kVerdictFail : kOk);
    }

    double worst_defect = 0.0, worst_ratio = 0.0;
    bool all_finite = true;
    json table = json::array();
    for (int k = 0; k < n_seeds; ++k) {
        Field u = random_chart_field(box, seed0 + unsigned(k), amplitude);
        VecField m = u_to_m(u, frame);
        VecField vm = rhs_m(m, frame, alpha);
        Field got = m_to_u(vm, frame);  // tangential projection
        Field want = rhs_u(u, alpha);
        double defect = rel_l2_gap(got, want);
        worst_defect = std::max(worst_defect, defect);

        // Bilinear-shape witness for the nonlinearity bound: the L2
        // size of alpha N1 + N2 against ||u||_{W^{1,inf}} ||u||_{H^2}.
        Field nl = rhs_u_nonlinear(u, alpha);
        NormReport nr = norms(nl, 0.0, 0.0);
        double h2 = h_s_norm(u, 2.0);
        double w1 = w_s_inf_norm(u, 1);
        double ratio = nr.L2 / std::max(h2 * w1, 1e-300);
        all_finite = all_finite && std::isfinite(ratio) && std::isfinite(defect);
        worst_ratio = std::max(worst_ratio, ratio);
        table.push_back({{"seed", seed0 + unsigned(k)},
                         {"defect", defect},
                         {"nonlinearity_ratio", ratio}});
    }
    ctx.manifest["seeds"] = table;
    ctx.manifest["max_cross_check_defect"] = worst_defect;
    ctx.manifest["max_nonlinearity_ratio"] = worst_ratio;
    ctx.verdict("cross_check_defect", worst_defect <= tol, worst_defect,
                "<= " + fmt_g(tol));
    ctx.verdict("ratios_finite", all_finite, worst_ratio, "finite");
    return finish(ctx, kOk);
}

// ---------------------------------------------------------- convergence

int cmd_convergence(const std::string& config_path,
                    const std::string& out_dir) {
    RunContext ctx;
    int rc = open_context(ctx, "convergence", config_path, out_dir);
    if (rc != kOk) return rc;

    Box box;
    double alpha, amplitude, sigma, t_end, beta_amplitude;
    std::vector<double> dts, betas;
    try {
        box.d = ctx.cfg.get_int("convergence.d", 1);
        box.n_per = ctx.cfg.get_int("convergence.n_per", 8);
        box.n1 = ctx.cfg.get_int("convergence.n1", 128);
        box.n2 = 1;
        alpha = ctx.cfg.get_double("convergence.alpha", 1.0);
        amplitude = ctx.cfg.get_double("convergence.amplitude", 1e-2);
        beta_amplitude = ctx.cfg.get_double("convergence.beta_amplitude", 5e-4);
        sigma = ctx.cfg.get_double("convergence.sigma", 1.5);
        t_end = ctx.cfg.get_double("convergence.t_end", 1.0);
        dts = parse_number_list(
            ctx.cfg.get_string("convergence.dt_list", "0.02,0.01,0.005"));
        betas = parse_number_list(
            ctx.cfg.get_string("convergence.beta_list", "1e-2,1e-3,1e-4"));
        rc = reject_unknown(ctx, "convergence");
        if (rc != kOk) return rc;
        box.validate();
        require(alpha > 0 && amplitude > 0 && sigma > 0 && t_end > 0,
                "convergence: bad study spec");
        if (dts.size() < 3) {
            std::fprintf(stderr,
                         "helix convergence: need at least 3 step sizes to "
                         "form error ratios, got %zu\n",
                         dts.size());
            return kUsage;
        }
        std::sort(dts.rbegin(), dts.rend());
        for (double dt : dts)
            require(dt > 0 && std::abs(t_end / dt - std::lround(t_end / dt)) <
                                  1e-9,
                    "convergence: t_end must be a multiple of every dt");
        for (double b : betas) require(b > 0, "convergence: beta must be > 0");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix convergence: %s\n", e.what());
        return kUsage;
    }

    const FrameBasis frame(box);
    const Propagator prop(box, alpha, CutoffProfile{});
    Field u0 = gaussian_chart_data(box, amplitude, sigma, true);

    auto march = [&](Scheme scheme, double beta, double dt,
                     const Field& data) -> Field {
        SimConfig sim;
        sim.d = box.d;
        sim.n_per = box.n_per;
        sim.n1 = box.n1;
        sim.n2 = box.n2;
        sim.L2 = box.L2;
        sim.alpha = alpha;
        sim.scheme = scheme;
        sim.beta = beta;
        sim.dt = dt;
        sim.t_end = t_end;
        SimState st;
        if (scheme == Scheme::etd_u)
            st.u = data;
        else
            st.m = u_to_m(data, frame);
        const long n = std::lround(t_end / dt);
        for (long j = 0; j < n; ++j) {
            bool ok = scheme == Scheme::etd_u
                          ? step_etd_u(st, sim, prop)
                          : (scheme == Scheme::imex_m
                                 ? step_imex_m(st, sim, frame)
                                 : step_regularized_m(st, sim, frame));
            require(ok, "convergence: a guard fired mid-study; reduce dt or "
                        "amplitude");
        }
        return scheme == Scheme::etd_u ? st.u : m_to_u(st.m, frame);
    };

    std::vector<std::vector<double>> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool orders_ok = true;
    json order_report = json::object();
    for (Scheme scheme : {Scheme::etd_u, Scheme::imex_m}) {
        std::vector<Field> finals;
        for (double dt : dts) finals.push_back(march(scheme, 0.0, dt, u0));
        std::vector<double> gaps(dts.size() - 1);
        for (std::size_t i = 0; i + 1 < dts.size(); ++i)
            gaps[i] = rel_l2_gap(finals[i], finals[i + 1]);
        json orders = json::array();
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            double order = nan;
            if (i + 1 < gaps.size())
                order = std::log(gaps[i] / gaps[i + 1]) /
                        std::log(dts[i] / dts[i + 1]);
            rows.push_back({scheme == Scheme::etd_u ? 0.0 : 1.0, dts[i],
                            gaps[i], order});
            if (i + 1 < gaps.size()) {
                orders.push_back(order);
                orders_ok = orders_ok && std::abs(order - 2.0) <= 0.2;
            }
        }
        order_report[scheme_name(scheme)] = orders;
    }
    write_csv(ctx.path("orders.csv"), "scheme,dt,gap,order", rows);
    ctx.add_file("orders.csv");

    // beta family: distance at t_end to the beta = 0 run, same data and
    // the finest step. The fourth-order term pushes the flow off the
    // sphere at a rate near beta times the amplitude, so this study
    // uses data small enough for the largest beta to clear the
    // constraint guard.
    Field ub = gaussian_chart_data(box, beta_amplitude, sigma, true);
    const double dt_fine = dts.back();
    Field ref = march(Scheme::imex_m, 0.0, dt_fine, ub);
    std::sort(betas.rbegin(), betas.rend());
    std::vector<std::vector<double>> beta_rows;
    std::vector<double> dists;
    for (double b : betas) {
        Field ur = march(Scheme::regularized_m, b, dt_fine, ub);
        double dist = rel_l2_gap(ur, ref);
        dists.push_back(dist);
        beta_rows.push_back({b, dist});
    }
    write_csv(ctx.path("beta_family.csv"), "beta,distance", beta_rows);
    ctx.add_file("beta_family.csv");
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < dists.size(); ++i)
        monotone = monotone && dists[i] > dists[i + 1];

    ctx.manifest["orders"] = order_report;
    ctx.verdict("orders_near_2", orders_ok, orders_ok ? 1.0 : 0.0,
                "2.0 +/- 0.2 for both schemes");
    ctx.verdict("beta_family_monotone", monotone,
                dists.empty() ? 0.0 : dists.front(),
                "distance decreases with beta");
    return finish(ctx, kOk);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"helical-state laboratory driver"};
    app.require_subcommand(1);

    struct SubArgs {
        std::string config, out;
        bool verify = false;
    };
    std::map<std::string, SubArgs> args;
    std::map<std::string, int (*)(const std::string&, const std::string&)>
        handlers = {{"bands", cmd_bands},
                    {"kernel-scan", cmd_kernel_scan},
                    {"linear-decay", cmd_linear_decay},
                    {"evolve", cmd_evolve},
                    {"frame-check", cmd_frame_check},
                    {"convergence", cmd_convergence}};
    std::map<std::string, std::string> blurbs = {
        {"bands", "scan the lowest Bloch bands over a quasi-momentum grid"},
        {"kernel-scan", "decay envelope of the low-band kernel"},
        {"linear-decay", "semigroup decay of projected Gaussian data"},
        {"evolve", "full nonlinear run with series and snapshots"},
        {"frame-check", "chart/perturbation cross-check on random fields"},
        {"convergence", "step-size orders and the regularization family"}};

    for (auto& [name, handler] : handlers) {
        CLI::App* sub = app.add_subcommand(name, blurbs[name]);
        SubArgs& a = args[name];
        sub->add_option("--config", a.config, "key = value parameter file");
        sub->add_option("--out", a.out, "output directory (default out-<cmd>)");
        sub->add_flag("--verify", a.verify,
                      "re-check the hashes of an existing run and exit");
        (void)handler;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const SubArgs& a = args[name];
    if (a.verify) return run_verify(a.out, name);
    try {
        return handlers[name](a.config, a.out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "helix %s: %s\n", name.c_str(), e.what());
        return kVerdictFail;
    }
}
