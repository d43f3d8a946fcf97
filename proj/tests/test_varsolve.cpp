#include <doctest.h>

#include <cmath>
#include <functional>
#include <span>

#include "choquard/energy.hpp"
#include "choquard/field.hpp"
#include "choquard/spectral.hpp"
#include "choquard/varsolve.hpp"

using namespace choquard;

namespace {

ScalarField gaussian(const DomainPtr& dom, double width, double off0 = 0.0) {
    return sample_field(dom, [width, off0](std::span<const double> x) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) {
            const double c = x[a] - (a == 0 ? off0 : 0.0);
            r2 += c * c;
        }
        return std::exp(-r2 / (width * width));
    });
}

// Shared fixtures. Both labs are cheap to build but reused by several
// cases, so they are computed once.
struct Lab {
    DomainPtr dom;
    EigenBasis basis;
};

const Lab& lab3() {
    static const Lab lab = [] {
        Lab l;
        l.dom = make_box_domain(3, 0.5, 12);
        l.basis = dirichlet_eigenpairs(l.dom, 1);
        return l;
    }();
    return lab;
}

const Lab& lab4() {
    static const Lab lab = [] {
        Lab l;
        l.dom = make_box_domain(4, 0.5, 10);
        l.basis = dirichlet_eigenpairs(l.dom, 2);
        return l;
    }();
    return lab;
}

bool nonincreasing(const std::vector<double>& t) {
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] > t[i - 1]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("verdict names and option defaults") {
    CHECK(verdict_name(SolveVerdict::converged_nontrivial) == "converged_nontrivial");
    CHECK(verdict_name(SolveVerdict::collapsed_trivial) == "collapsed_trivial");
    CHECK(verdict_name(SolveVerdict::concentrating) == "concentrating");
    CHECK(verdict_name(SolveVerdict::budget_exhausted) == "budget_exhausted");

    SolveOptions so;
    CHECK(so.tol == 1e-6);
    CHECK(so.max_iters == 400);
    CHECK(so.collapse_ratio == 1e-8);
    CHECK(so.concentration_factor == 3.0);
    CHECK(so.initial_step == 0.1);
    CHECK(so.max_halvings == 30);

    LinkingOptions lo;
    CHECK(lo.starts == 32);
    CHECK(lo.max_iters == 200);
    CHECK(lo.tol == 1e-10);
    CHECK(lo.seed == 2024);
    CHECK(lo.cond_limit == 1e10);
}

TEST_CASE("quotient descent reports a consistent deterministic trace") {
    const Lab& l = lab3();
    EnergyContext ctx = make_energy_context(l.dom, 1.0, 0.0);
    const double q = ctx.constants.upper_crit;
    ScalarField u0 = gaussian(l.dom, 0.18);

    SolveOptions so;
    so.tol = 1e-4;
    so.max_iters = 60;
    SolveReport rep = minimize_quotient(ctx, u0, so);

    REQUIRE(!rep.quotient_trace.empty());
    CHECK(nonincreasing(rep.quotient_trace));
    CHECK(rep.quotient_trace.front() ==
          doctest::Approx(quotient_value(ctx, u0)).epsilon(1e-12));
    CHECK(rep.final_quotient == rep.quotient_trace.back());
    CHECK(rep.lambda == 0.0);
    CHECK(rep.final_quotient > 0.0);

    // the iterate lives on the unit sphere of the nonlocal norm
    CHECK(rep.nl_norm_final == doctest::Approx(1.0).epsilon(1e-10));
    EnergyBreakdown ev = evaluate_energy(ctx, rep.final_field);
    CHECK(ev.nl_norm == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(quotient_value(ctx, rep.final_field) ==
          doctest::Approx(rep.final_quotient).epsilon(1e-10));

    // the reported level follows the ray formula of the final quotient
    const double mp_ref =
        (q - 1.0) / (2.0 * q) * std::pow(rep.final_quotient, q / (q - 1.0));
    CHECK(rep.mp_level == doctest::Approx(mp_ref).epsilon(1e-10));
    CHECK(rep.concentration_radius > 0.0);

    // a rerun with identical inputs reproduces the run exactly
    SolveReport rep2 = minimize_quotient(ctx, u0, so);
    CHECK(rep2.final_quotient == rep.final_quotient);
    CHECK(rep2.iterations == rep.iterations);
    CHECK(rep2.quotient_trace == rep.quotient_trace);

    CHECK_THROWS_AS(minimize_quotient(ctx, make_field(l.dom), so), DegenerateInput);
    auto other = make_box_domain(3, 0.5, 13);
    CHECK_THROWS_AS(minimize_quotient(ctx, gaussian(other, 0.18), so), DimensionError);
}

TEST_CASE("a nonpositive quotient is reported, not thrown") {
    const Lab& l = lab3();
    EnergyContext ctx = make_energy_context(l.dom, 1.0, 1.5 * l.basis.eigenvalues[0]);
    SolveOptions so;
    so.tol = 1e-4;
    so.max_iters = 30;

    SolveReport rm = minimize_quotient(ctx, l.basis.modes[0], so);
    CHECK(rm.final_quotient < 0.0);
    CHECK(rm.mp_level == 0.0);

    // the ray has no maximizer, so the critical point search stops at once
    SolveReport rf = find_critical_point(ctx, l.basis.modes[0], so);
    CHECK(rf.verdict == SolveVerdict::budget_exhausted);
    CHECK(rf.iterations == 0);
    CHECK(rf.quotient_trace.empty());
    CHECK(rf.final_quotient < 0.0);
}

TEST_CASE("quotient descent and critical point search find the same level") {
    const Lab& l = lab4();
    EnergyContext ctx = make_energy_context(l.dom, 2.0, 0.5 * l.basis.eigenvalues[0]);
    const double q = ctx.constants.upper_crit;
    SolveOptions so;
    so.tol = 1e-5;
    so.max_iters = 300;

    SolveReport rm = minimize_quotient(ctx, l.basis.modes[0], so);
    REQUIRE(rm.verdict == SolveVerdict::converged_nontrivial);
    CHECK(rm.gradient_residual < so.tol);

    SolveReport rf = find_critical_point(ctx, l.basis.modes[0], so);
    REQUIRE(rf.verdict == SolveVerdict::converged_nontrivial);
    CHECK(rf.gradient_residual < so.tol);
    CHECK(nonincreasing(rf.quotient_trace));

    CHECK(rm.final_quotient == doctest::Approx(rf.final_quotient).epsilon(1e-8));

    // the critical point sits on the Nehari set and its functional value
    // is the ray level of its quotient
    EnergyBreakdown ev = evaluate_energy(ctx, rf.final_field);
    const double scale = ev.grad_sq + std::abs(ctx.lambda) * ev.l2_sq + ev.nonlocal_double;
    CHECK(std::abs(ev.grad_sq - ctx.lambda * ev.l2_sq - ev.nonlocal_double) <= 1e-10 * scale);
    CHECK(ev.functional_value == doctest::Approx(rf.mp_level).epsilon(1e-10));
    CHECK(ev.nl_norm == doctest::Approx(rf.nl_norm_final).epsilon(1e-10));
    const double mp_ref =
        (q - 1.0) / (2.0 * q) * std::pow(rf.final_quotient, q / (q - 1.0));
    CHECK(rf.mp_level == doctest::Approx(mp_ref).epsilon(1e-10));
}

TEST_CASE("functional is positive on a small sphere and negative far out") {
    const Lab& l = lab3();
    EnergyContext ctx = make_energy_context(l.dom, 1.0, 0.45 * l.basis.eigenvalues[0]);
    const double q = ctx.constants.upper_crit;

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ScalarField u = random_field(l.dom, seed, 1.0);
        EnergyBreakdown ev = evaluate_energy(ctx, u);
        const double r = 0.5 * (ev.grad_sq - ctx.lambda * ev.l2_sq);
        const double b = ev.nonlocal_double / (2.0 * q);
        REQUIRE(r > 0.0);

        // J(t u) = r t^2 - b t^{2q}; its sign changes at ts
        const double ts = std::pow(r / b, 1.0 / (2.0 * q - 2.0));
        auto along = [&](double t) { return r * t * t - b * std::pow(t, 2.0 * q); };
        CHECK(along(0.5 * ts) > 0.0);
        CHECK(along(2.0 * ts) < 0.0);

        // the closed form matches a direct evaluation on the scaled field
        ScalarField ut = u;
        scale_field(ut, 0.7 * ts);
        CHECK(evaluate_energy(ctx, ut).functional_value ==
              doctest::Approx(along(0.7 * ts)).epsilon(1e-10));
    }
}

TEST_CASE("linking level over eigenmodes and a bump") {
    const Lab& l = lab4();
    const double lam = 0.5 * (l.basis.eigenvalues[0] + l.basis.eigenvalues[1]);
    EnergyContext ctx = make_energy_context(l.dom, 2.0, lam);
    const double q = ctx.constants.upper_crit;

    LinkingSpec ls;
    ls.j = 1;
    ls.epsilon = 0.15;
    ls.basis = l.basis;
    ls.bubble = gaussian(l.dom, 0.15, 0.1);
    LinkingOptions lo;
    lo.starts = 6;
    lo.max_iters = 40;
    lo.tol = 1e-6;

    LinkingReport rep = linking_level(ctx, ls, lo);
    CHECK(rep.lambda == lam);
    CHECK(rep.j == 1);
    CHECK(rep.epsilon == 0.15);
    CHECK(rep.gram_condition >= 1.0);

    // the pure bubble direction is among the starts
    CHECK(rep.a_epsilon ==
          doctest::Approx(quotient_value(ctx, ls.bubble)).epsilon(1e-12));
    CHECK(rep.m_value >= rep.a_epsilon);
    const double lref = (q - 1.0) / (2.0 * q) * std::pow(rep.m_value, q / (q - 1.0));
    CHECK(rep.level == doctest::Approx(lref).epsilon(1e-10));

    REQUIRE(rep.coefficients.size() == 2);
    double nrm2 = 0.0;
    for (double c : rep.coefficients) nrm2 += c * c;
    CHECK(nrm2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.coefficients.back() >= 0.0);

    SUBCASE("value depends only on the span, not on normalizations") {
        LinkingSpec scaled = ls;
        scale_field(scaled.basis.modes[0], 3.7);
        scale_field(scaled.bubble, 0.2);
        LinkingReport rep2 = linking_level(ctx, scaled, lo);
        CHECK(rep2.m_value == doctest::Approx(rep.m_value).epsilon(1e-12));
        CHECK(rep2.a_epsilon == doctest::Approx(rep.a_epsilon).epsilon(1e-12));
    }

    SUBCASE("a larger span cannot lower the maximum") {
        LinkingSpec wide = ls;
        wide.j = 2;
        LinkingReport rep2 = linking_level(ctx, wide, lo);
        CHECK(rep2.m_value >= rep.m_value - 1e-9 * rep.m_value);
        CHECK(rep2.coefficients.size() == 3);
    }

    SUBCASE("invalid specs are rejected") {
        LinkingSpec bad = ls;
        bad.j = 0;
        CHECK_THROWS_AS(linking_level(ctx, bad, lo), ConfigError);
        bad.j = 3;  // more than the basis holds
        CHECK_THROWS_AS(linking_level(ctx, bad, lo), ConfigError);

        LinkingOptions noStarts = lo;
        noStarts.starts = 0;
        CHECK_THROWS_AS(linking_level(ctx, ls, noStarts), ConfigError);

        LinkingSpec foreign = ls;
        foreign.bubble = gaussian(lab3().dom, 0.15);
        CHECK_THROWS_AS(linking_level(ctx, foreign, lo), DimensionError);

        LinkingSpec wrongBasis = ls;
        wrongBasis.basis = lab3().basis;
        CHECK_THROWS_AS(linking_level(ctx, wrongBasis, lo), DimensionError);

        // a bubble equal to a basis mode makes the span degenerate
        LinkingSpec dup = ls;
        dup.bubble = l.basis.modes[0];
        CHECK_THROWS_AS(linking_level(ctx, dup, lo), IllConditioned);

        LinkingSpec zero = ls;
        zero.bubble = make_field(l.dom);
        CHECK_THROWS_AS(linking_level(ctx, zero, lo), DegenerateInput);
    }
}

TEST_CASE("dilation residual matches its four terms") {
    auto dom = make_ball_domain(3, 1.05, 15, 1.0);
    EnergyContext ctx = make_energy_context(dom, 1.0, 0.7);
    const double n = 3.0, mu = 1.0;
    const double q = ctx.constants.upper_crit;

    // the nonlocal coefficient collapses to the gradient one
    CHECK((2.0 * n - mu) / (2.0 * q) == doctest::Approx((n - 2.0) / 2.0).epsilon(1e-14));

    ScalarField u = random_field(dom, 7, 1.0);
    auto [res, scale] = pohozaev_residual(ctx, u);
    EnergyBreakdown ev = evaluate_energy(ctx, u);
    const double tb = 0.5 * boundary_weighted_grad_sq(u);
    const double tg = 0.5 * (n - 2.0) * ev.grad_sq;
    const double tn = (2.0 * n - mu) / (2.0 * q) * ev.nonlocal_double;
    const double tm = 0.5 * ctx.lambda * n * ev.l2_sq;
    CHECK(res == doctest::Approx(tb + tg - tn - tm).epsilon(1e-12));
    CHECK(scale ==
          doctest::Approx(std::abs(tb) + std::abs(tg) + std::abs(tn) + std::abs(tm))
              .epsilon(1e-12));
    CHECK(pohozaev_defect(ctx, u) == doctest::Approx(std::abs(res) / scale).epsilon(1e-12));

    auto [zr, zs] = pohozaev_residual(ctx, make_field(dom));
    CHECK(zr == 0.0);
    CHECK(zs == 0.0);
    CHECK(pohozaev_defect(ctx, make_field(dom)) == 0.0);

    // with a negative lambda every term pushes the same way
    const Lab& l = lab3();
    EnergyContext ctxn = make_energy_context(l.dom, 1.0, -1.0);
    CHECK(pohozaev_defect(ctxn, l.basis.modes[0]) > 0.05);
}

TEST_CASE("negative lambda probe finds no nontrivial critical point") {
    auto dom = make_ball_domain(3, 1.05, 15, 1.0);
    EnergyContext ctx = make_energy_context(dom, 1.0, -1.0);
    SolveOptions so;
    so.tol = 1e-5;
    so.max_iters = 40;

    ProbeReport pr = nonexistence_probe(ctx, 4, so);
    CHECK(pr.n_nontrivial == 0);
    CHECK(pr.n_trivial + pr.n_concentrating + pr.n_nontrivial + pr.n_unresolved == 4);
    REQUIRE(pr.runs.size() == 4);
    for (const SolveReport& r : pr.runs) {
        CHECK(r.lambda == -1.0);
        CHECK(r.verdict != SolveVerdict::converged_nontrivial);
    }

    ProbeReport pr2 = nonexistence_probe(ctx, 4, so);
    for (std::size_t i = 0; i < pr.runs.size(); ++i) {
        CHECK(pr2.runs[i].verdict == pr.runs[i].verdict);
        CHECK(pr2.runs[i].final_quotient == pr.runs[i].final_quotient);
    }

    CHECK_THROWS_AS(nonexistence_probe(ctx, 0, so), ConfigError);

    // the identity argument needs a star shaped domain
    auto masked = make_masked_domain(
        3, 1.0, 12,
        [](std::span<const double> x) {
            double r2 = 0.0;
            for (double c : x) r2 += c * c;
            return r2 < 0.64;
        },
        false);
    EnergyContext mctx = make_energy_context(masked, 1.0, -1.0);
    CHECK_THROWS_AS(nonexistence_probe(mctx, 2, so), ConfigError);

    // nonnegative lambda is allowed, the classification just changes
    EnergyContext ctx0 = make_energy_context(dom, 1.0, 0.0);
    SolveOptions quick;
    quick.max_iters = 3;
    ProbeReport pr0 = nonexistence_probe(ctx0, 1, quick);
    CHECK(pr0.n_trivial + pr0.n_concentrating + pr0.n_nontrivial + pr0.n_unresolved == 1);
}
