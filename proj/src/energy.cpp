#include "choquard/energy.hpp"

#include <cmath>

namespace choquard {

namespace {

constexpr double kZeroFieldFloor = 1e-280;

struct CoreTerms {
    double grad_sq;
    double l2_sq;
    double nonlocal;
    ScalarField convolved;  // K * |u|^q
};

CoreTerms core_terms(const EnergyContext& ctx, const ScalarField& u) {
    const double q = ctx.constants.upper_crit;
    ScalarField pu = abs_power(u, q);
    CoreTerms t{grad_sq_integral(u), l2_sq_integral(u), 0.0, apply(*ctx.plan, pu)};
    t.nonlocal = inner_l2(pu, t.convolved);
    return t;
}

} // namespace

EnergyContext make_energy_context(DomainPtr domain, double mu, double lambda,
                                  std::int64_t padded_cap) {
    if (!domain) throw DomainError("null domain");
    EnergyContext ctx;
    ctx.constants = make_sharp_constants(domain->dim, mu);
    ctx.plan = std::make_shared<RieszPlan>(make_riesz_plan(domain, mu, padded_cap));
    ctx.domain = std::move(domain);
    ctx.lambda = lambda;
    return ctx;
}

void validate_context(const EnergyContext& ctx) {
    if (!ctx.domain || !ctx.plan) throw ConfigError("energy context is incomplete");
    if (ctx.plan->mu() != ctx.constants.mu) {
        throw ConfigError("convolution plan exponent disagrees with the constant bundle");
    }
    if (!same_geometry(*ctx.plan->domain(), *ctx.domain)) {
        throw DimensionError("convolution plan grid disagrees with the context domain");
    }
    if (!std::isfinite(ctx.lambda)) throw ConfigError("lambda must be finite");
}

EnergyBreakdown evaluate_energy(const EnergyContext& ctx, const ScalarField& u) {
    validate_context(ctx);
    if (!same_domain(*ctx.domain, *u.domain)) {
        throw DimensionError("field does not live on the context domain");
    }
    const CoreTerms t = core_terms(ctx, u);
    if (t.nonlocal < kZeroFieldFloor) {
        throw DegenerateInput("energy breakdown of the zero field");
    }
    const double q = ctx.constants.upper_crit;
    EnergyBreakdown b;
    b.grad_sq = t.grad_sq;
    b.l2_sq = t.l2_sq;
    b.nonlocal_double = t.nonlocal;
    b.functional_value =
        0.5 * (t.grad_sq - ctx.lambda * t.l2_sq) - t.nonlocal / (2.0 * q);
    b.quotient = (t.grad_sq - ctx.lambda * t.l2_sq) / std::pow(t.nonlocal, 1.0 / q);
    b.nl_norm = std::pow(t.nonlocal, 1.0 / (2.0 * q));
    return b;
}

ScalarField energy_gradient(const EnergyContext& ctx, const ScalarField& u) {
    validate_context(ctx);
    if (!same_domain(*ctx.domain, *u.domain)) {
        throw DimensionError("field does not live on the context domain");
    }
    const double q = ctx.constants.upper_crit;
    ScalarField w = apply(*ctx.plan, abs_power(u, q));
    ScalarField g = apply_neg_laplacian(u);
    for (const std::int64_t idx : u.domain->interior_nodes) {
        const double v = u.values[idx];
        const double a = std::abs(v);
        const double forcing =
            a < 1e-300 ? 0.0 : std::copysign(std::pow(a, q - 1.0), v) * w.values[idx];
        g.values[idx] -= ctx.lambda * v + forcing;
    }
    return g;
}

double quotient_value(const EnergyContext& ctx, const ScalarField& u) {
    return evaluate_energy(ctx, u).quotient;
}

double ray_maximizer(const EnergyContext& ctx, const ScalarField& u) {
    const EnergyBreakdown b = evaluate_energy(ctx, u);
    const double r = b.grad_sq - ctx.lambda * b.l2_sq;
    if (r <= 0.0) {
        throw RayUnbounded("t -> J(t u) has no interior maximum on this ray");
    }
    const double q = ctx.constants.upper_crit;
    return std::pow(r / b.nonlocal_double, 1.0 / (2.0 * q - 2.0));
}

double ray_max_level(const EnergyContext& ctx, const ScalarField& u) {
    const EnergyBreakdown b = evaluate_energy(ctx, u);
    const double r = b.grad_sq - ctx.lambda * b.l2_sq;
    if (r <= 0.0) {
        throw RayUnbounded("t -> J(t u) has no interior maximum on this ray");
    }
    const double q = ctx.constants.upper_crit;
    return (q - 1.0) / (2.0 * q) * std::pow(b.quotient, q / (q - 1.0));
}

double hls_ratio(const EnergyContext& ctx, const ScalarField& u) {
    const EnergyBreakdown b = evaluate_energy(ctx, u);
    const double n = ctx.constants.dim;
    const double mu = ctx.constants.mu;
    const double crit_mass = lp_integral(u, ctx.constants.sobolev_exp);
    return b.nonlocal_double /
           (ctx.constants.hls_const * std::pow(crit_mass, (2.0 * n - mu) / n));
}

double brezis_lieb_defect(const EnergyContext& ctx, const ScalarField& base,
                          const ScalarField& bump) {
    validate_context(ctx);
    require_same_domain(base, bump);
    const double q = ctx.constants.upper_crit;
    auto nl = [&](const ScalarField& f) {
        ScalarField pf = abs_power(f, q);
        return inner_l2(pf, apply(*ctx.plan, pf));
    };
    ScalarField sum = lin_comb(1.0, base, 1.0, bump);
    return std::abs(nl(sum) - nl(bump) - nl(base));
}

std::vector<double> brezis_lieb_defect(const EnergyContext& ctx, const ScalarField& base,
                                       std::span<const ScalarField> bumps) {
    std::vector<double> out;
    out.reserve(bumps.size());
    for (const ScalarField& w : bumps) {
        out.push_back(brezis_lieb_defect(ctx, base, w));
    }
    return out;
}

} // namespace choquard
