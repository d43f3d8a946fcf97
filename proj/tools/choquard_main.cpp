// Command line front end: sharp constants, field snapshots, spectra,
// energies, bubble sweeps, the variational solvers, and the convolution
// benchmark. Every experiment subcommand writes its artifacts plus a
// manifest with content hashes into --out-dir; query subcommands print to
// stdout. Exit codes: 0 clean, 2 convergence failure, 3 bad
// configuration or domain, 4 I/O failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "choquard/bubbles.hpp"
#include "choquard/config.hpp"
#include "choquard/constants.hpp"
#include "choquard/energy.hpp"
#include "choquard/errors.hpp"
#include "choquard/field.hpp"
#include "choquard/riesz.hpp"
#include "choquard/spectral.hpp"
#include "choquard/svg.hpp"
#include "choquard/varsolve.hpp"

using namespace choquard;

namespace {

struct Global {
    std::string out_dir = ".";
    std::uint64_t seed = 2024;
    int threads = 1;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

DomainPtr build_domain(const ExperimentConfig& cfg) {
    if (cfg.shape == "box") return make_box_domain(cfg.dim, cfg.half_width, cfg.n);
    return make_ball_domain(cfg.dim, cfg.half_width, cfg.n, cfg.radius);
}

std::array<double, 5> center_array(const std::vector<double>& c) {
    if (c.size() > 5) throw ConfigError("--center takes at most five coordinates");
    std::array<double, 5> out{};
    std::copy(c.begin(), c.end(), out.begin());
    return out;
}

// Flags the user actually passed override values from --config.
void overlay_flags(const CLI::App& sub, const ExperimentConfig& flags, ExperimentConfig& base) {
    const auto take = [&](const char* name, auto member) {
        const CLI::Option* o = sub.get_option_no_throw(name);
        if (o != nullptr && o->count() > 0) base.*member = flags.*member;
    };
    take("--dim", &ExperimentConfig::dim);
    take("--mu", &ExperimentConfig::mu);
    take("--lambda", &ExperimentConfig::lambda);
    take("--shape", &ExperimentConfig::shape);
    take("--n", &ExperimentConfig::n);
    take("--half-width", &ExperimentConfig::half_width);
    take("--radius", &ExperimentConfig::radius);
    take("--delta", &ExperimentConfig::delta);
    take("--eps-grid", &ExperimentConfig::eps_grid);
    take("--tol", &ExperimentConfig::tol);
    take("--max-iters", &ExperimentConfig::max_iters);
    take("--starts", &ExperimentConfig::starts);
    take("--j", &ExperimentConfig::linking_j);
    take("--eps", &ExperimentConfig::epsilon);
    take("--method", &ExperimentConfig::method);
    take("--init", &ExperimentConfig::init);
    take("--width", &ExperimentConfig::width);
    take("--center", &ExperimentConfig::center);
}

ExperimentConfig merge_config(const CLI::App& app, const CLI::App& sub, const Global& g,
                              const std::string& config_path, const ExperimentConfig& flags,
                              const std::string& kind) {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = load_config(config_path);
        overlay_flags(sub, flags, cfg);
    } else {
        cfg = flags;
    }
    cfg.kind = kind;
    const CLI::Option* seed_opt = app.get_option_no_throw("--seed");
    if (config_path.empty() || (seed_opt != nullptr && seed_opt->count() > 0)) cfg.seed = g.seed;
    const CLI::Option* dir_opt = app.get_option_no_throw("--out-dir");
    if (config_path.empty() || (dir_opt != nullptr && dir_opt->count() > 0)) {
        cfg.out_dir = g.out_dir;
    }
    validate_config(cfg);
    return cfg;
}

void print_or_save(const std::string& body, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    out << body;
    out.flush();
    if (!out.good()) throw IoError("failed writing " + out_path);
}

PlotSeries radial_series(const ScalarField& u) {
    const GridDomain& d = *u.domain;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(d.interior_nodes.size());
    double x[5];
    for (const std::int64_t id : d.interior_nodes) {
        d.node_coords(id, x);
        double r2 = 0.0;
        for (int a = 0; a < d.dim; ++a) r2 += x[a] * x[a];
        pts.emplace_back(std::sqrt(r2), u.values[id]);
    }
    std::sort(pts.begin(), pts.end());
    const std::size_t stride = pts.size() <= 512 ? 1 : pts.size() / 512;
    PlotSeries s;
    for (std::size_t i = 0; i < pts.size(); i += stride) {
        s.x.push_back(pts[i].first);
        s.y.push_back(pts[i].second);
    }
    s.title = "radial profile of the final field";
    return s;
}

// ---- subcommand bodies ----

void run_constants(int dim, double mu, bool csv) {
    const SharpConstants c = make_sharp_constants(dim, mu);
    if (!csv) {
        std::cout << constants_json(c).dump(2) << "\n";
        return;
    }
    std::cout << "dim,mu,sobolev_exp,upper_crit,lower_crit,hls_const,sobolev_S,"
                 "nonlocal_S_HL,ps_threshold\n";
    std::cout << c.dim << ',' << num(c.mu) << ',' << num(c.sobolev_exp) << ','
              << num(c.upper_crit) << ',' << num(c.lower_crit) << ',' << num(c.hls_const)
              << ',' << num(c.sobolev_S) << ',' << num(c.nonlocal_S_HL) << ','
              << num(c.ps_threshold) << "\n";
}

void run_field_dump(const Global& g, const ExperimentConfig& flags, const std::string& profile,
                    double width, double amplitude, const std::vector<double>& center,
                    const std::string& out_path) {
    ExperimentConfig cfg = flags;
    cfg.kind = "field";
    cfg.seed = g.seed;
    cfg.out_dir = g.out_dir;
    validate_config(cfg);
    const DomainPtr dom = build_domain(cfg);
    ScalarField u;
    if (profile == "gaussian") {
        const double w = width > 0.0 ? width : 0.3 * cfg.half_width;
        const std::array<double, 5> c0 = center_array(center);
        u = sample_field(dom, [w, c0](std::span<const double> x) {
            double r2 = 0.0;
            for (std::size_t a = 0; a < x.size(); ++a) {
                const double d = x[a] - c0[a];
                r2 += d * d;
            }
            return std::exp(-r2 / (w * w));
        });
    } else if (profile == "random") {
        u = random_field(dom, cfg.seed, amplitude);
    } else {
        BubbleSpec bs;
        bs.domain = dom;
        bs.delta = cfg.delta;
        bs.epsilon = cfg.epsilon;
        bs.center = center_array(center);
        u = make_bubble_field(bs);
    }
    save_field(u, out_path);
    nlohmann::json j;
    j["path"] = out_path;
    j["masked_nodes"] = u.domain->masked_count();
    j["l2_sq"] = l2_sq_integral(u);
    j["sup"] = sup_norm(u);
    std::cout << j.dump(2) << "\n";
}

void run_field_load(const std::string& in_path) {
    const ScalarField u = load_field(in_path);
    const GridDomain& d = *u.domain;
    nlohmann::json j;
    j["dim"] = d.dim;
    j["n"] = d.points_per_axis;
    j["half_width"] = d.half_width;
    j["shape"] = d.shape_name;
    j["masked_nodes"] = d.masked_count();
    j["l2_sq"] = l2_sq_integral(u);
    j["grad_sq"] = grad_sq_integral(u);
    j["sup"] = sup_norm(u);
    std::cout << j.dump(2) << "\n";
}

void run_spectrum(const ExperimentConfig& flags, int k, const std::string& out_path) {
    ExperimentConfig cfg = flags;
    cfg.kind = "spectrum";
    validate_config(cfg);
    if (k < 1) throw ConfigError("--k must be at least 1");
    const EigenBasis basis = dirichlet_eigenpairs(build_domain(cfg), k);
    std::string csv = "index,eigenvalue,residual\n";
    for (int i = 0; i < basis.count; ++i) {
        csv += std::to_string(i) + "," + num(basis.eigenvalues[i]) + "," +
               num(basis.residuals[i]) + "\n";
    }
    print_or_save(csv, out_path);
}

void run_energy(const std::string& field_path, double mu, double lambda) {
    const ScalarField u = load_field(field_path);
    const EnergyContext ctx = make_energy_context(u.domain, mu, lambda);
    const EnergyBreakdown b = evaluate_energy(ctx, u);
    std::cout << breakdown_json(b, ctx.constants, lambda).dump(2) << "\n";
}

void run_bubble_scan(const CLI::App& app, const CLI::App& sub, const Global& g,
                     const std::string& config_path, const ExperimentConfig& flags, bool svg) {
    const ExperimentConfig cfg = merge_config(app, sub, g, config_path, flags, "bubble-scan");
    if (cfg.eps_grid.empty()) {
        throw ConfigError("config field eps_grid: must not be empty for bubble-scan");
    }
    if (!(cfg.delta > 0.0)) {
        throw ConfigError("config field delta: must be positive for bubble-scan");
    }
    const EnergyContext ctx = make_energy_context(build_domain(cfg), cfg.mu, cfg.lambda);
    const std::vector<BubbleReport> reports =
        bubble_scan(ctx, cfg.delta, cfg.eps_grid, center_array(cfg.center));

    std::string csv = "epsilon,grad_sq,l2_sq,nl_double,a_epsilon,tail_D,tail_E,deficit\n";
    for (const BubbleReport& r : reports) {
        csv += num(r.epsilon) + "," + num(r.grad_sq) + "," + num(r.l2_sq) + "," +
               num(r.nl_double) + "," + num(r.a_epsilon) + "," + num(r.tail_D) + "," +
               num(r.tail_E) + "," + num(ctx.constants.nonlocal_S_HL - r.a_epsilon) + "\n";
    }

    ArtifactWriter w(cfg.out_dir);
    w.write_text("config.cfg", print_config_text(cfg));
    w.write_text("scan.csv", csv);
    if (svg) {
        PlotSeries s;
        bool positive = true;
        for (const BubbleReport& r : reports) {
            const double deficit = ctx.constants.nonlocal_S_HL - r.a_epsilon;
            positive = positive && deficit > 0.0;
            s.x.push_back(r.epsilon);
            s.y.push_back(deficit);
        }
        if (positive) {
            s.title = "quotient deficit against bubble scale";
            w.write_text("deficit.svg", render_plot(s, PlotKind::rate_fit));
        } else {
            std::cerr << "bubble-scan: nonpositive deficit, skipping the rate plot\n";
        }
    }
    w.write_manifest(cfg);
    std::cout << csv;
}

void run_solve(const CLI::App& app, const CLI::App& sub, const Global& g,
               const std::string& config_path, const ExperimentConfig& flags, bool svg) {
    const ExperimentConfig cfg = merge_config(app, sub, g, config_path, flags, "solve");
    const DomainPtr dom = build_domain(cfg);
    const EnergyContext ctx = make_energy_context(dom, cfg.mu, cfg.lambda);

    ScalarField u0;
    if (cfg.init == "gaussian") {
        const double w = cfg.width > 0.0 ? cfg.width : 0.3 * cfg.half_width;
        const std::array<double, 5> c0 = center_array(cfg.center);
        u0 = sample_field(dom, [w, c0](std::span<const double> x) {
            double r2 = 0.0;
            for (std::size_t a = 0; a < x.size(); ++a) {
                const double d = x[a] - c0[a];
                r2 += d * d;
            }
            return std::exp(-r2 / (w * w));
        });
    } else if (cfg.init == "random") {
        u0 = random_field(dom, cfg.seed, 1.0);
    } else {
        BubbleSpec bs;
        bs.domain = dom;
        bs.delta = cfg.delta;
        bs.epsilon = cfg.epsilon;
        bs.center = center_array(cfg.center);
        u0 = make_bubble_field(bs);
    }

    SolveOptions so;
    so.tol = cfg.tol;
    so.max_iters = cfg.max_iters;
    const SolveReport rep = cfg.method == "quotient" ? minimize_quotient(ctx, u0, so)
                                                     : find_critical_point(ctx, u0, so);

    ArtifactWriter w(cfg.out_dir);
    w.write_text("config.cfg", print_config_text(cfg));
    const std::string body = solve_report_json(rep, cfg.seed).dump(2) + "\n";
    w.write_text("report.json", body);
    if (svg) {
        if (!rep.quotient_trace.empty()) {
            PlotSeries t;
            for (std::size_t i = 0; i < rep.quotient_trace.size(); ++i) {
                t.x.push_back(static_cast<double>(i));
                t.y.push_back(rep.quotient_trace[i]);
            }
            t.title = "quotient along the descent";
            w.write_text("trace.svg", render_plot(t, PlotKind::trace));
        }
        w.write_text("profile.svg", render_plot(radial_series(rep.final_field),
                                                PlotKind::radial_profile));
    }
    w.write_manifest(cfg);
    std::cout << body;
    if (rep.verdict == SolveVerdict::budget_exhausted) {
        throw ConvergenceError("solver stopped on its iteration budget");
    }
}

void run_linking(const CLI::App& app, const CLI::App& sub, const Global& g,
                 const std::string& config_path, const ExperimentConfig& flags, bool svg) {
    ExperimentConfig cfg = merge_config(app, sub, g, config_path, flags, "linking");
    const DomainPtr dom = build_domain(cfg);
    const EigenBasis basis = dirichlet_eigenpairs(dom, cfg.linking_j + 1);

    // without an explicit lambda the run sits midway in the eigen interval
    const CLI::Option* lam_opt = sub.get_option_no_throw("--lambda");
    const bool lambda_given =
        (lam_opt != nullptr && lam_opt->count() > 0) || !config_path.empty();
    if (!lambda_given) {
        cfg.lambda = 0.5 * (basis.eigenvalues[cfg.linking_j - 1] +
                            basis.eigenvalues[cfg.linking_j]);
    }

    const EnergyContext ctx = make_energy_context(dom, cfg.mu, cfg.lambda);
    BubbleSpec bs;
    bs.domain = dom;
    bs.delta = cfg.delta;
    bs.epsilon = cfg.epsilon;
    bs.center = center_array(cfg.center);

    LinkingSpec ls;
    ls.j = cfg.linking_j;
    ls.epsilon = cfg.epsilon;
    ls.basis = basis;
    ls.bubble = make_bubble_field(bs);
    LinkingOptions lo;
    lo.starts = cfg.starts;
    lo.max_iters = cfg.max_iters;
    lo.tol = cfg.tol;
    lo.seed = cfg.seed;
    const LinkingReport rep = linking_level(ctx, ls, lo);

    ArtifactWriter w(cfg.out_dir);
    w.write_text("config.cfg", print_config_text(cfg));
    const std::string body = linking_report_json(rep, cfg.seed).dump(2) + "\n";
    w.write_text("linking.json", body);
    if (svg) {
        w.write_text("bubble.svg",
                     render_plot(radial_series(ls.bubble), PlotKind::radial_profile));
    }
    w.write_manifest(cfg);
    std::cout << body;
}

void run_nonexist(const CLI::App& app, const CLI::App& sub, const Global& g,
                  const std::string& config_path, const ExperimentConfig& flags) {
    const ExperimentConfig cfg = merge_config(app, sub, g, config_path, flags, "nonexist");
    const EnergyContext ctx = make_energy_context(build_domain(cfg), cfg.mu, cfg.lambda);
    SolveOptions so;
    so.tol = cfg.tol;
    so.max_iters = cfg.max_iters;
    const ProbeReport rep = nonexistence_probe(ctx, cfg.starts, so);

    ArtifactWriter w(cfg.out_dir);
    w.write_text("config.cfg", print_config_text(cfg));
    const std::string body =
        probe_report_json(rep, cfg.lambda, cfg.starts, cfg.seed).dump(2) + "\n";
    w.write_text("probe.json", body);
    w.write_manifest(cfg);
    std::cout << body;
}

void run_bench(const Global& g, int dim, double mu, const std::vector<int>& sizes,
               int repeats, const std::string& csv_name) {
    if (sizes.empty()) throw ConfigError("--sizes must not be empty");
    if (repeats < 1) throw ConfigError("--repeats must be at least 1");
    constexpr std::int64_t kDirectCap = 40000;

    ExperimentConfig cfg;
    cfg.kind = "bench-riesz";
    cfg.dim = dim;
    cfg.mu = mu;
    cfg.seed = g.seed;
    cfg.out_dir = g.out_dir;
    cfg.shape = "box";
    validate_config(cfg);

    using clock = std::chrono::steady_clock;
    const auto median_ns = [&](auto&& body) {
        std::vector<long long> t(repeats);
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = clock::now();
            body();
            const auto t1 = clock::now();
            t[r] = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
        }
        std::sort(t.begin(), t.end());
        return t[repeats / 2];
    };

    std::string csv = "size,path,wall_ns_median,max_rel_err_vs_direct\n";
    for (const int size : sizes) {
        if (size < 4) throw ConfigError("--sizes entries need at least 4 points per axis");
        const DomainPtr dom = make_box_domain(dim, 1.0, size);
        const ScalarField f = random_field(dom, g.seed, 1.0);
        const RieszPlan plan = make_riesz_plan(dom, mu);
        ScalarField fft_out;
        const long long fft_ns = median_ns([&] { fft_out = apply(plan, f); });

        if (dom->masked_count() <= kDirectCap) {
            ScalarField direct_out;
            const long long direct_ns =
                median_ns([&] { direct_out = apply_direct(f, mu, kDirectCap); });
            double sup = 0.0, err = 0.0;
            for (const std::int64_t id : dom->interior_nodes) {
                sup = std::max(sup, std::abs(direct_out.values[id]));
                err = std::max(err, std::abs(direct_out.values[id] - fft_out.values[id]));
            }
            csv += std::to_string(size) + ",direct," + std::to_string(direct_ns) + ",0\n";
            csv += std::to_string(size) + ",fft," + std::to_string(fft_ns) + "," +
                   num(err / sup) + "\n";
        } else {
            csv += std::to_string(size) + ",fft," + std::to_string(fft_ns) + ",nan\n";
        }
    }

    ArtifactWriter w(cfg.out_dir);
    w.write_text("config.cfg", print_config_text(cfg));
    w.write_text(csv_name, csv);
    w.write_manifest(cfg);
    std::cout << csv;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical toolkit for a critical nonlocal Dirichlet problem"};
    app.require_subcommand(1);

    Global g;
    app.add_option("--out-dir", g.out_dir, "directory for experiment artifacts")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "seed recorded in every output")->capture_default_str();
    app.add_option("--threads", g.threads,
                   "worker threads for sweeps (reserved; execution is serialized)")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();

    // constants
    auto* c_sub = app.add_subcommand("constants", "sharp constants of a (dim, mu) pair");
    int c_dim = 3;
    double c_mu = 1.0;
    bool c_json = false, c_csv = false;
    c_sub->add_option("--dim", c_dim, "space dimension")->required();
    c_sub->add_option("--mu", c_mu, "kernel exponent")->required();
    auto* c_jopt = c_sub->add_flag("--json", c_json, "JSON output (default)");
    c_sub->add_flag("--csv", c_csv, "CSV output")->excludes(c_jopt);
    c_sub->callback([&] { run_constants(c_dim, c_mu, c_csv); });

    // field dump / load
    auto* f_sub = app.add_subcommand("field", "write and inspect field snapshots");
    f_sub->require_subcommand(1);
    auto* fd = f_sub->add_subcommand("dump", "sample a profile and save it");
    ExperimentConfig fd_flags;
    std::string fd_profile = "gaussian", fd_out;
    double fd_width = 0.0, fd_amp = 1.0;
    std::vector<double> fd_center;
    fd->add_option("--dim", fd_flags.dim, "space dimension");
    fd->add_option("--mu", fd_flags.mu, "kernel exponent (recorded only)");
    fd->add_option("--shape", fd_flags.shape, "box or ball");
    fd->add_option("--n", fd_flags.n, "grid points per axis");
    fd->add_option("--half-width", fd_flags.half_width, "cube half width");
    fd->add_option("--radius", fd_flags.radius, "ball radius");
    fd->add_option("--profile", fd_profile, "gaussian, random or bubble")
        ->check(CLI::IsMember({"gaussian", "random", "bubble"}));
    fd->add_option("--width", fd_width, "gaussian width (0 picks 0.3 half-width)");
    fd->add_option("--amplitude", fd_amp, "random profile amplitude");
    fd->add_option("--delta", fd_flags.delta, "bubble cutoff radius");
    fd->add_option("--eps", fd_flags.epsilon, "bubble scale");
    fd->add_option("--center", fd_center, "profile center coordinates")->delimiter(',');
    fd->add_option("--out", fd_out, "snapshot path (.chqf)")->required();
    fd->callback([&] { run_field_dump(g, fd_flags, fd_profile, fd_width, fd_amp, fd_center, fd_out); });
    auto* fl = f_sub->add_subcommand("load", "summarize a snapshot");
    std::string fl_in;
    fl->add_option("--in", fl_in, "snapshot path")->required();
    fl->callback([&] { run_field_load(fl_in); });

    // spectrum
    auto* s_sub = app.add_subcommand("spectrum", "lowest Dirichlet eigenpairs as CSV");
    ExperimentConfig s_flags;
    int s_k = 5;
    std::string s_out;
    bool s_csv = false;
    s_sub->add_option("--dim", s_flags.dim, "space dimension");
    s_sub->add_option("--shape", s_flags.shape, "box or ball");
    s_sub->add_option("--n", s_flags.n, "grid points per axis");
    s_sub->add_option("--half-width", s_flags.half_width, "cube half width");
    s_sub->add_option("--radius", s_flags.radius, "ball radius");
    s_sub->add_option("--k", s_k, "number of eigenpairs");
    s_sub->add_flag("--csv", s_csv, "CSV output (the only format)");
    s_sub->add_option("--out", s_out, "write CSV here instead of stdout");
    s_sub->callback([&] { run_spectrum(s_flags, s_k, s_out); });

    // energy
    auto* e_sub = app.add_subcommand("energy", "energy breakdown of a saved field");
    std::string e_field;
    double e_mu = 1.0, e_lambda = 0.0;
    bool e_json = false;
    e_sub->add_option("--field", e_field, "field snapshot (.chqf)")->required();
    e_sub->add_option("--mu", e_mu, "kernel exponent")->required();
    e_sub->add_option("--lambda", e_lambda, "linear coefficient");
    e_sub->add_flag("--json", e_json, "JSON output (the only format)");
    e_sub->callback([&] { run_energy(e_field, e_mu, e_lambda); });

    // bubble-scan
    auto* b_sub = app.add_subcommand("bubble-scan", "cut bubble energies over an eps grid");
    ExperimentConfig b_flags;
    std::string b_config;
    bool b_svg = false;
    b_sub->add_option("--config", b_config, "experiment config file");
    b_sub->add_option("--dim", b_flags.dim, "space dimension");
    b_sub->add_option("--mu", b_flags.mu, "kernel exponent");
    b_sub->add_option("--lambda", b_flags.lambda, "linear coefficient");
    b_sub->add_option("--shape", b_flags.shape, "box or ball");
    b_sub->add_option("--n", b_flags.n, "grid points per axis");
    b_sub->add_option("--half-width", b_flags.half_width, "cube half width");
    b_sub->add_option("--radius", b_flags.radius, "ball radius");
    b_sub->add_option("--delta", b_flags.delta, "bubble cutoff radius");
    b_sub->add_option("--eps-grid", b_flags.eps_grid, "bubble scales")->delimiter(',');
    b_sub->add_option("--center", b_flags.center, "bubble center")->delimiter(',');
    b_sub->add_flag("--svg", b_svg, "also plot the deficit rate");
    b_sub->callback([&] { run_bubble_scan(app, *b_sub, g, b_config, b_flags, b_svg); });

    // solve
    auto* v_sub = app.add_subcommand("solve", "descend the quotient or find a critical point");
    ExperimentConfig v_flags;
    std::string v_config;
    bool v_svg = false;
    v_sub->add_option("--config", v_config, "experiment config file");
    v_sub->add_option("--dim", v_flags.dim, "space dimension");
    v_sub->add_option("--mu", v_flags.mu, "kernel exponent");
    v_sub->add_option("--lambda", v_flags.lambda, "linear coefficient");
    v_sub->add_option("--shape", v_flags.shape, "box or ball");
    v_sub->add_option("--n", v_flags.n, "grid points per axis");
    v_sub->add_option("--half-width", v_flags.half_width, "cube half width");
    v_sub->add_option("--radius", v_flags.radius, "ball radius");
    v_sub->add_option("--tol", v_flags.tol, "gradient residual target");
    v_sub->add_option("--max-iters", v_flags.max_iters, "iteration budget");
    v_sub->add_option("--method", v_flags.method, "critical or quotient")
        ->check(CLI::IsMember({"critical", "quotient"}));
    v_sub->add_option("--init", v_flags.init, "gaussian, random or bubble start")
        ->check(CLI::IsMember({"gaussian", "random", "bubble"}));
    v_sub->add_option("--width", v_flags.width, "gaussian start width (0 picks 0.3 half-width)");
    v_sub->add_option("--delta", v_flags.delta, "bubble cutoff radius");
    v_sub->add_option("--eps", v_flags.epsilon, "bubble scale");
    v_sub->add_option("--center", v_flags.center, "start profile center")->delimiter(',');
    v_sub->add_flag("--svg", v_svg, "plot the trace and the radial profile");
    v_sub->callback([&] { run_solve(app, *v_sub, g, v_config, v_flags, v_svg); });

    // linking
    auto* l_sub = app.add_subcommand("linking", "quotient maximum over modes plus a bubble");
    ExperimentConfig l_flags;
    std::string l_config;
    bool l_svg = false;
    l_sub->add_option("--config", l_config, "experiment config file");
    l_sub->add_option("--dim", l_flags.dim, "space dimension");
    l_sub->add_option("--mu", l_flags.mu, "kernel exponent");
    l_sub->add_option("--lambda", l_flags.lambda,
                      "linear coefficient (omitted: eigen interval midpoint)");
    l_sub->add_option("--shape", l_flags.shape, "box or ball");
    l_sub->add_option("--n", l_flags.n, "grid points per axis");
    l_sub->add_option("--half-width", l_flags.half_width, "cube half width");
    l_sub->add_option("--radius", l_flags.radius, "ball radius");
    l_sub->add_option("--j", l_flags.linking_j, "number of low modes in the span");
    l_sub->add_option("--eps", l_flags.epsilon, "bubble scale")->required();
    l_sub->add_option("--delta", l_flags.delta, "bubble cutoff radius")->required();
    l_sub->add_option("--center", l_flags.center, "bubble center")->delimiter(',');
    l_sub->add_option("--starts", l_flags.starts, "ascent multistarts");
    l_sub->add_option("--max-iters", l_flags.max_iters, "ascent iteration budget");
    l_sub->add_option("--tol", l_flags.tol, "ascent gradient target");
    l_sub->add_flag("--svg", l_svg, "plot the bubble profile");
    l_sub->callback([&] { run_linking(app, *l_sub, g, l_config, l_flags, l_svg); });

    // nonexist
    auto* n_sub = app.add_subcommand("nonexist", "multistart probe for nonexistence");
    ExperimentConfig n_flags;
    n_flags.lambda = -1.0;
    std::string n_config;
    n_sub->add_option("--config", n_config, "experiment config file");
    n_sub->add_option("--dim", n_flags.dim, "space dimension");
    n_sub->add_option("--mu", n_flags.mu, "kernel exponent");
    n_sub->add_option("--lambda", n_flags.lambda, "linear coefficient");
    n_sub->add_option("--shape", n_flags.shape, "box or ball");
    n_sub->add_option("--n", n_flags.n, "grid points per axis");
    n_sub->add_option("--half-width", n_flags.half_width, "cube half width");
    n_sub->add_option("--radius", n_flags.radius, "ball radius");
    n_sub->add_option("--starts", n_flags.starts, "number of random starts");
    n_sub->add_option("--tol", n_flags.tol, "gradient residual target");
    n_sub->add_option("--max-iters", n_flags.max_iters, "iteration budget per start");
    n_sub->callback([&] { run_nonexist(app, *n_sub, g, n_config, n_flags); });

    // bench-riesz
    auto* r_sub = app.add_subcommand("bench-riesz", "convolution timing against the direct sum");
    int r_dim = 3, r_repeats = 5;
    double r_mu = 1.0;
    std::vector<int> r_sizes;
    std::string r_csv = "bench.csv";
    r_sub->add_option("--dim", r_dim, "space dimension");
    r_sub->add_option("--mu", r_mu, "kernel exponent");
    r_sub->add_option("--sizes", r_sizes, "grid sizes per axis")->delimiter(',')->required();
    r_sub->add_option("--repeats", r_repeats, "timing repeats per size");
    r_sub->add_option("--csv", r_csv, "CSV artifact name under --out-dir");
    r_sub->callback([&] { run_bench(g, r_dim, r_mu, r_sizes, r_repeats, r_csv); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io failure: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
