#include "choquard/varsolve.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace choquard {

namespace {

constexpr double kZeroFloor = 1e-280;

// One full evaluation of the energy pieces at u: a single kernel pass.
struct IterState {
    double grad_sq = 0.0;
    double l2_sq = 0.0;
    double nl_double = 0.0;
    double numerator = 0.0;
    double quotient = 0.0;
    double nl_norm = 0.0;
    ScalarField potential;  // K * |u|^q
    ScalarField power;      // sgn(u) |u|^{q-1}
};

IterState eval_state(const EnergyContext& ctx, const ScalarField& u) {
    const double q = ctx.constants.upper_crit;
    IterState st;
    ScalarField pw = abs_power(u, q);
    st.potential = apply(*ctx.plan, pw);
    st.nl_double = inner_l2(pw, st.potential);
    st.grad_sq = grad_sq_integral(u);
    st.l2_sq = l2_sq_integral(u);
    st.numerator = st.grad_sq - ctx.lambda * st.l2_sq;
    if (st.nl_double > kZeroFloor) {
        st.nl_norm = std::pow(st.nl_double, 1.0 / (2.0 * q));
        st.quotient = st.numerator / std::pow(st.nl_double, 1.0 / q);
    }
    st.power = signed_power(u, q - 1.0);
    return st;
}

// Exact effect of u -> c u on the cached state.
void rescale_state(IterState& st, double c, double q) {
    st.grad_sq *= c * c;
    st.l2_sq *= c * c;
    st.numerator *= c * c;
    st.nl_double *= std::pow(c, 2.0 * q);
    st.nl_norm *= c;
    scale_field(st.potential, std::pow(c, q));
    scale_field(st.power, std::pow(c, q - 1.0));
}

// Strong-form gradient contribution: out = -Lap u - lambda u - s * potential .* power.
ScalarField descent_direction(const EnergyContext& ctx, const ScalarField& u,
                              const IterState& st, double s) {
    ScalarField d = apply_neg_laplacian(u);
    for (const std::int64_t id : u.domain->interior_nodes) {
        d.values[id] -= ctx.lambda * u.values[id] +
                        s * st.potential.values[id] * st.power.values[id];
    }
    return d;
}

double ray_level_of(double quotient, double q) {
    if (!(quotient > 0.0)) return 0.0;
    return (q - 1.0) / (2.0 * q) * std::pow(quotient, q / (q - 1.0));
}

// Dual-norm square of g over the Dirichlet form: <g, A^{-1} g> by plain
// conjugate gradients. Accuracy beyond the tolerance is not needed; this
// feeds a stopping heuristic.
double dual_norm_sq(const ScalarField& g, int max_iters = 800, double tol = 1e-10) {
    ScalarField z = make_field(g.domain);
    ScalarField r = g;
    ScalarField p = r;
    double rr = inner_l2(r, r);
    if (!(rr > 0.0)) return 0.0;
    const double rr0 = rr;
    for (int it = 0; it < max_iters; ++it) {
        ScalarField ap = apply_neg_laplacian(p);
        const double pap = inner_l2(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rr / pap;
        axpy(alpha, p, z);
        axpy(-alpha, ap, r);
        const double rrn = inner_l2(r, r);
        if (rrn < tol * tol * rr0) break;
        p = lin_comb(1.0, r, rrn / rr, p);
        rr = rrn;
    }
    return std::max(0.0, inner_l2(g, z));
}

void require_field_on(const EnergyContext& ctx, const ScalarField& u) {
    if (!u.domain || !same_domain(*ctx.domain, *u.domain)) {
        throw DimensionError("field does not live on the context domain");
    }
}

} // namespace

std::string verdict_name(SolveVerdict v) {
    switch (v) {
        case SolveVerdict::converged_nontrivial: return "converged_nontrivial";
        case SolveVerdict::collapsed_trivial: return "collapsed_trivial";
        case SolveVerdict::concentrating: return "concentrating";
        case SolveVerdict::budget_exhausted: return "budget_exhausted";
    }
    return "unknown";
}

SolveReport minimize_quotient(const EnergyContext& ctx, const ScalarField& init,
                              const SolveOptions& opts) {
    validate_context(ctx);
    require_field_on(ctx, init);
    const double q = ctx.constants.upper_crit;
    const double h = ctx.domain->spacing;

    ScalarField u = init;
    mask_project(u);
    IterState st = eval_state(ctx, u);
    if (!(st.nl_double > kZeroFloor)) {
        throw DegenerateInput("initial field has no nonlocal mass");
    }
    scale_field(u, 1.0 / st.nl_norm);
    rescale_state(st, 1.0 / st.nl_norm, q);

    SolveReport rep;
    rep.lambda = ctx.lambda;
    double step = opts.initial_step;
    double resid = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (true) {
        // quotient gradient on the unit sphere (nl_double == 1 here)
        const ScalarField d = descent_direction(ctx, u, st, st.numerator);
        resid = std::sqrt(l2_sq_integral(d)) / std::max(1.0, std::abs(st.quotient));
        rep.quotient_trace.push_back(st.quotient);
        if (resid < opts.tol) {
            rep.verdict = SolveVerdict::converged_nontrivial;
            break;
        }
        if (iter % 10 == 0 &&
            concentration_radius(u) < opts.concentration_factor * h) {
            rep.verdict = SolveVerdict::concentrating;
            break;
        }
        if (iter >= opts.max_iters) {
            rep.verdict = SolveVerdict::budget_exhausted;
            break;
        }
        bool accepted = false;
        for (int halv = 0; halv <= opts.max_halvings; ++halv) {
            ScalarField v = lin_comb(1.0, u, -step, d);
            IterState sv = eval_state(ctx, v);
            if (sv.nl_double > kZeroFloor &&
                sv.quotient < st.quotient - 1e-14 * std::abs(st.quotient)) {
                scale_field(v, 1.0 / sv.nl_norm);
                rescale_state(sv, 1.0 / sv.nl_norm, q);
                u = std::move(v);
                st = std::move(sv);
                step = std::min(step * 2.0, 1e6);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++iter;
        if (!accepted) {
            rep.verdict = SolveVerdict::budget_exhausted;
            break;
        }
    }
    rep.iterations = iter;
    rep.final_quotient = st.quotient;
    rep.mp_level = ray_level_of(st.quotient, q);
    rep.gradient_residual = resid;
    rep.nl_norm_final = st.nl_norm;
    rep.concentration_radius = concentration_radius(u);
    rep.final_field = std::move(u);
    if (!(rep.final_quotient > 0.0)) {
        std::cerr << "minimize_quotient: quotient is nonpositive, so lambda sits at or "
                     "above the first Dirichlet eigenvalue and the mountain-pass "
                     "reading of the level does not apply\n";
    }
    return rep;
}

SolveReport find_critical_point(const EnergyContext& ctx, const ScalarField& init,
                                const SolveOptions& opts) {
    validate_context(ctx);
    require_field_on(ctx, init);
    const double q = ctx.constants.upper_crit;
    const double h = ctx.domain->spacing;

    ScalarField u = init;
    mask_project(u);
    IterState st = eval_state(ctx, u);
    if (!(st.nl_double > kZeroFloor)) {
        throw DegenerateInput("initial field has no nonlocal mass");
    }
    const double nl_init = st.nl_norm;

    SolveReport rep;
    rep.lambda = ctx.lambda;
    double step = opts.initial_step;
    double resid = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (true) {
        if (!(st.numerator > 0.0)) {
            // the ray has no maximizer here, so the Nehari normalization is
            // unavailable; a vanished iterate is a collapse, anything else
            // ends the run unresolved
            rep.verdict = st.nl_norm < opts.collapse_ratio * nl_init
                              ? SolveVerdict::collapsed_trivial
                              : SolveVerdict::budget_exhausted;
            break;
        }
        // project the iterate onto its ray maximizer: <J'(u), u> = 0 there
        const double tstar = std::pow(st.numerator / st.nl_double, 1.0 / (2.0 * q - 2.0));
        if (tstar != 1.0) {
            scale_field(u, tstar);
            rescale_state(st, tstar, q);
        }
        const ScalarField g = descent_direction(ctx, u, st, 1.0);
        resid = std::sqrt(dual_norm_sq(g)) / std::sqrt(st.grad_sq);
        rep.quotient_trace.push_back(st.quotient);
        if (resid < opts.tol) {
            rep.verdict = SolveVerdict::converged_nontrivial;
            break;
        }
        if (st.nl_norm < opts.collapse_ratio * nl_init) {
            rep.verdict = SolveVerdict::collapsed_trivial;
            break;
        }
        if (iter % 10 == 0 &&
            concentration_radius(u) < opts.concentration_factor * h) {
            rep.verdict = SolveVerdict::concentrating;
            break;
        }
        if (iter >= opts.max_iters) {
            rep.verdict = SolveVerdict::budget_exhausted;
            break;
        }
        bool accepted = false;
        for (int halv = 0; halv <= opts.max_halvings; ++halv) {
            ScalarField v = lin_comb(1.0, u, -step, g);
            IterState sv = eval_state(ctx, v);
            if (sv.nl_double > kZeroFloor && sv.numerator > 0.0 &&
                sv.quotient < st.quotient - 1e-14 * std::abs(st.quotient)) {
                u = std::move(v);
                st = std::move(sv);
                step = std::min(step * 2.0, 1e6);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++iter;
        if (!accepted) {
            rep.verdict = SolveVerdict::budget_exhausted;
            break;
        }
    }
    rep.iterations = iter;
    rep.final_quotient = st.quotient;
    rep.mp_level = ray_level_of(st.quotient, q);
    rep.gradient_residual = resid;
    rep.nl_norm_final = st.nl_norm;
    rep.concentration_radius = concentration_radius(u);
    rep.final_field = std::move(u);
    return rep;
}

LinkingReport linking_level(const EnergyContext& ctx, const LinkingSpec& spec,
                            const LinkingOptions& opts) {
    validate_context(ctx);
    if (spec.j < 1) throw ConfigError("linking index must be at least 1");
    if (spec.basis.count < spec.j) {
        throw ConfigError("basis holds fewer modes than the linking index");
    }
    if (opts.starts < 1) throw ConfigError("at least one start is required");
    if (!spec.basis.domain || !same_domain(*ctx.domain, *spec.basis.domain)) {
        throw DimensionError("basis does not live on the context domain");
    }
    require_field_on(ctx, spec.bubble);
    const double q = ctx.constants.upper_crit;
    const int m = spec.j + 1;

    // spanning vectors rescaled to unit mass so the computed level depends
    // only on the span, not on the normalization the caller happened to use
    std::vector<ScalarField> span;
    span.reserve(m);
    for (int a = 0; a < m; ++a) {
        const ScalarField& v = a < spec.j ? spec.basis.modes[a] : spec.bubble;
        const double nrm = std::sqrt(l2_sq_integral(v));
        if (!(nrm > 0.0)) throw DegenerateInput("a spanning vector vanishes");
        ScalarField w = v;
        scale_field(w, 1.0 / nrm);
        span.push_back(std::move(w));
    }

    Eigen::MatrixXd gram(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
            gram(a, b) = gram(b, a) = inner_l2(span[a], span[b]);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double ev_min = es.eigenvalues().minCoeff();
    const double ev_max = es.eigenvalues().maxCoeff();
    if (!(ev_min > 0.0) || ev_max / ev_min > opts.cond_limit) {
        throw IllConditioned("spanning set of the linking space is numerically dependent");
    }

    // quadratic form of the numerator on the span
    Eigen::MatrixXd form(m, m);
    {
        std::vector<ScalarField> lap;
        lap.reserve(m);
        for (int a = 0; a < m; ++a) lap.push_back(apply_neg_laplacian(span[a]));
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                form(a, b) = inner_l2(lap[a], span[b]) - ctx.lambda * gram(a, b);
            }
        }
        form = 0.5 * (form + form.transpose()).eval();
    }

    const auto assemble = [&](const Eigen::VectorXd& c) {
        ScalarField u = make_field(ctx.domain);
        for (int a = 0; a < m; ++a) axpy(c[a], span[a], u);
        return u;
    };
    struct CoeffEval {
        double quotient = -std::numeric_limits<double>::infinity();
        double nl_double = 0.0;
        ScalarField u, potential;
    };
    const auto eval_coeff = [&](const Eigen::VectorXd& c) {
        CoeffEval ev;
        ev.u = assemble(c);
        ScalarField pw = abs_power(ev.u, q);
        ev.potential = apply(*ctx.plan, pw);
        ev.nl_double = inner_l2(pw, ev.potential);
        if (ev.nl_double > kZeroFloor) {
            const double numer = c.dot(form * c);
            ev.quotient = numer / std::pow(ev.nl_double, 1.0 / q);
        }
        return ev;
    };

    LinkingReport rep;
    rep.lambda = ctx.lambda;
    rep.j = spec.j;
    rep.epsilon = spec.epsilon;
    rep.gram_condition = ev_max / ev_min;

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd best_c;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < opts.starts; ++s) {
        Eigen::VectorXd c(m);
        if (s == 0) {
            c.setZero();
            c[m - 1] = 1.0;  // pure bubble direction
        } else if (s == 1) {
            c.setOnes();
        } else {
            for (int a = 0; a < m; ++a) c[a] = gauss(rng);
            if (c.norm() == 0.0) c[0] = 1.0;
        }
        c.normalize();
        CoeffEval ev = eval_coeff(c);
        if (s == 0) rep.a_epsilon = ev.quotient;
        if (!std::isfinite(ev.quotient)) continue;
        double step = 0.2;
        for (int it = 0; it < opts.max_iters; ++it) {
            // gradient of the quotient in coefficients, one kernel pass
            ScalarField t = signed_power(ev.u, q - 1.0);
            for (const std::int64_t id : ctx.domain->interior_nodes) {
                t.values[id] *= ev.potential.values[id];
            }
            Eigen::VectorXd gc(m);
            for (int a = 0; a < m; ++a) gc[a] = inner_l2(t, span[a]);
            const double numer = c.dot(form * c);
            gc = (2.0 * (form * c) - (2.0 * numer / ev.nl_double) * gc) /
                 std::pow(ev.nl_double, 1.0 / q);
            gc -= gc.dot(c) * c;  // tangent to the coefficient sphere
            if (gc.norm() < opts.tol * std::max(1.0, std::abs(ev.quotient))) break;
            bool accepted = false;
            for (int halv = 0; halv <= 30; ++halv) {
                Eigen::VectorXd cn = (c + step * gc).normalized();
                CoeffEval en = eval_coeff(cn);
                if (en.quotient > ev.quotient + 1e-14 * std::abs(ev.quotient)) {
                    c = cn;
                    ev = std::move(en);
                    step = std::min(step * 2.0, 50.0);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }
        if (ev.quotient > best_q) {
            best_q = ev.quotient;
            best_c = c;
        }
    }
    if (!std::isfinite(best_q)) {
        throw DegenerateInput("every start of the linking ascent degenerated");
    }
    if (best_c[m - 1] < 0.0) best_c = -best_c;  // bubble coefficient >= 0
    rep.m_value = best_q;
    rep.level = ray_level_of(best_q, q);
    rep.coefficients.assign(best_c.data(), best_c.data() + m);
    return rep;
}

std::pair<double, double> pohozaev_residual(const EnergyContext& ctx, const ScalarField& u) {
    validate_context(ctx);
    require_field_on(ctx, u);
    const double n = ctx.constants.dim;
    const double mu = ctx.constants.mu;
    const double q = ctx.constants.upper_crit;

    if (!(l2_sq_integral(u) > 0.0)) return {0.0, 0.0};
    const ScalarField pw = abs_power(u, q);
    const double nl = inner_l2(pw, apply(*ctx.plan, pw));

    const double t_boundary = 0.5 * boundary_weighted_grad_sq(u);
    const double t_grad = 0.5 * (n - 2.0) * grad_sq_integral(u);
    const double t_nl = (2.0 * n - mu) / (2.0 * q) * nl;
    const double t_mass = 0.5 * ctx.lambda * n * l2_sq_integral(u);
    const double residual = t_boundary + t_grad - t_nl - t_mass;
    const double scale =
        std::abs(t_boundary) + std::abs(t_grad) + std::abs(t_nl) + std::abs(t_mass);
    if (!(scale > 0.0)) return {0.0, 0.0};
    return {residual, scale};
}

double pohozaev_defect(const EnergyContext& ctx, const ScalarField& u) {
    const auto [residual, scale] = pohozaev_residual(ctx, u);
    return scale > 0.0 ? std::abs(residual) / scale : 0.0;
}

ProbeReport nonexistence_probe(const EnergyContext& ctx, int multistarts,
                               const SolveOptions& opts, double defect_tol) {
    validate_context(ctx);
    if (multistarts < 1) throw ConfigError("at least one start is required");
    if (!ctx.domain->star_shaped) {
        throw ConfigError("the probe is only meaningful on a star-shaped domain");
    }
    ProbeReport pr;
    for (int i = 1; i <= multistarts; ++i) {
        const double amplitude = (i % 2 == 0) ? 1e-3 : 1.0;
        ScalarField init = random_field(ctx.domain, static_cast<std::uint64_t>(i), amplitude);
        SolveReport r = find_critical_point(ctx, init, opts);
        switch (r.verdict) {
            case SolveVerdict::collapsed_trivial: ++pr.n_trivial; break;
            case SolveVerdict::concentrating: ++pr.n_concentrating; break;
            case SolveVerdict::converged_nontrivial:
                if (pohozaev_defect(ctx, r.final_field) < defect_tol) {
                    ++pr.n_nontrivial;
                } else {
                    ++pr.n_unresolved;
                }
                break;
            case SolveVerdict::budget_exhausted: ++pr.n_unresolved; break;
        }
        pr.runs.push_back(std::move(r));
    }
    return pr;
}

} // namespace choquard
