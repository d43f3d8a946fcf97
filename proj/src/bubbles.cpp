#include "choquard/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace choquard {

namespace {

double dist_to(const GridDomain& d, std::int64_t id, const std::array<double, 5>& a) {
    double x[5];
    d.node_coords(id, x);
    double s = 0.0;
    for (int i = 0; i < d.dim; ++i) {
        const double t = x[i] - a[i];
        s += t * t;
    }
    return std::sqrt(s);
}

// C^1 radial cutoff: 1 on [0, delta], 0 on [2 delta, inf), cubic blend between.
double cutoff(double r, double delta) {
    if (r <= delta) return 1.0;
    if (r >= 2.0 * delta) return 0.0;
    const double s = (r - delta) / delta;
    return (1.0 - s) * (1.0 - s) * (1.0 + 2.0 * s);
}

void check_spec(const BubbleSpec& spec) {
    if (!spec.domain) throw ConfigError("bubble spec has no domain");
    if (!(spec.delta > 0.0)) throw ConfigError("bubble cutoff radius must be positive");
    if (!(spec.epsilon > 0.0)) throw ConfigError("bubble scale must be positive");
    const GridDomain& d = *spec.domain;
    const double h = d.spacing;
    if (spec.epsilon < 2.0 * h) {
        throw ResolutionError("bubble scale " + std::to_string(spec.epsilon) +
                              " is under two grid spacings (" + std::to_string(2.0 * h) +
                              "); the core would not be resolved");
    }
    if (spec.epsilon > 0.5 * spec.delta) {
        throw ResolutionError("bubble scale " + std::to_string(spec.epsilon) +
                              " exceeds half the cutoff radius " + std::to_string(spec.delta));
    }
    const double support = 2.0 * spec.delta;
    for (std::int64_t id = 0; id < d.total_nodes(); ++id) {
        if (!d.mask[id] && dist_to(d, id, spec.center) < support) {
            throw DomainError("bubble support of radius " + std::to_string(support) +
                              " leaves the masked region");
        }
    }
}

} // namespace

ScalarField make_bubble_field(const BubbleSpec& spec) {
    check_spec(spec);
    const int dim = spec.domain->dim;
    const double del = spec.delta;
    const double eps = spec.epsilon;
    const std::array<double, 5> a = spec.center;
    return sample_field(spec.domain, [&](std::span<const double> x) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double t = x[i] - a[i];
            s += t * t;
        }
        const double r = std::sqrt(s);
        const double c = cutoff(r, del);
        if (c == 0.0) return 0.0;
        return c * extremal_family_value(dim, eps, r);
    });
}

BubbleReport bubble_report(const EnergyContext& ctx, const BubbleSpec& spec) {
    validate_context(ctx);
    if (!spec.domain || !same_domain(*ctx.domain, *spec.domain)) {
        throw DimensionError("bubble spec and energy context live on different domains");
    }
    const ScalarField u = make_bubble_field(spec);
    const EnergyBreakdown bd = evaluate_energy(ctx, u);

    BubbleReport rep;
    rep.epsilon = spec.epsilon;
    rep.lambda = ctx.lambda;
    rep.grad_sq = bd.grad_sq;
    rep.l2_sq = bd.l2_sq;
    rep.nl_double = bd.nonlocal_double;
    rep.a_epsilon = bd.quotient;

    // Split |u|^q at radius delta and convolve the outer part once; both
    // tail integrals are inner products against that one potential.
    const GridDomain& d = *ctx.domain;
    const double q = ctx.constants.upper_crit;
    ScalarField core = abs_power(u, q);
    ScalarField tail = make_field(ctx.domain);
    for (const std::int64_t id : d.interior_nodes) {
        if (dist_to(d, id, spec.center) >= spec.delta) {
            tail.values[id] = core.values[id];
            core.values[id] = 0.0;
        }
    }
    const ScalarField pot = apply(*ctx.plan, tail);
    rep.tail_D = inner_l2(pot, core);
    rep.tail_E = inner_l2(pot, tail);
    return rep;
}

std::vector<BubbleReport> bubble_scan(const EnergyContext& ctx, double delta,
                                      std::span<const double> eps_grid,
                                      const std::array<double, 5>& center) {
    if (eps_grid.empty()) throw ConfigError("empty scale grid");
    if (!std::is_sorted(eps_grid.begin(), eps_grid.end())) {
        throw ConfigError("scale grid must be ascending");
    }
    std::vector<BubbleReport> out;
    out.reserve(eps_grid.size());
    for (const double eps : eps_grid) {
        BubbleSpec spec;
        spec.domain = ctx.domain;
        spec.delta = delta;
        spec.epsilon = eps;
        spec.center = center;
        out.push_back(bubble_report(ctx, spec));
    }
    return out;
}

LinearFit fit_log_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw FitError("fit inputs differ in length");
    if (xs.size() < 2) throw FitError("fit needs at least two points");
    const auto n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw FitError("log fit needs strictly positive data");
        }
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double det = n * sxx - sx * sx;
    if (!(det > 1e-30)) throw FitError("no spread in the abscissae");
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

FitResult deficit_rate_fit(std::span<const BubbleReport> reports,
                           const SharpConstants& constants) {
    if (reports.size() < 4) throw FitError("rate fit needs at least four reports");
    const double s_hl = constants.nonlocal_S_HL;
    std::vector<double> eps, deficit, model;
    eps.reserve(reports.size());
    deficit.reserve(reports.size());
    model.reserve(reports.size());
    for (const BubbleReport& r : reports) {
        const double def = s_hl - r.a_epsilon;
        if (!(def > 0.0)) {
            throw FitError("quotient deficit is nonpositive at scale " +
                           std::to_string(r.epsilon));
        }
        eps.push_back(r.epsilon);
        deficit.push_back(def);
        model.push_back(constants.dim == 4 ? def / std::abs(std::log(r.epsilon)) : def);
    }
    const LinearFit raw = fit_log_slope(eps, deficit);
    const LinearFit fit = fit_log_slope(eps, model);

    double mean = 0.0;
    for (const double d : model) mean += std::log(d);
    mean /= static_cast<double>(model.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double ly = std::log(model[i]);
        const double pred = fit.intercept + fit.slope * std::log(eps[i]);
        ss_tot += (ly - mean) * (ly - mean);
        ss_res += (ly - pred) * (ly - pred);
    }
    FitResult out;
    out.exponent = fit.slope;
    out.log_slope = raw.slope;
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

LambdaStarEstimate lambda_star_estimate(const EnergyContext& ctx, double delta,
                                        std::span<const double> eps_grid,
                                        std::span<const double> lambda_grid) {
    validate_context(ctx);
    if (ctx.constants.dim != 3) {
        throw DimensionError("the threshold estimate is a dimension-3 quantity");
    }
    if (eps_grid.empty()) throw ConfigError("empty scale grid");
    if (lambda_grid.empty()) throw ConfigError("empty lambda grid");
    const double s_hl = ctx.constants.nonlocal_S_HL;
    const double q = ctx.constants.upper_crit;

    struct RayData {
        double eps, grad, l2, nl_pow;
    };
    std::vector<RayData> rays;
    rays.reserve(eps_grid.size());
    for (const double eps : eps_grid) {
        BubbleSpec spec;
        spec.domain = ctx.domain;
        spec.delta = delta;
        spec.epsilon = eps;
        const ScalarField u = make_bubble_field(spec);
        const EnergyBreakdown bd = evaluate_energy(ctx, u);
        rays.push_back({eps, bd.grad_sq, bd.l2_sq,
                        std::pow(bd.nonlocal_double, 1.0 / q)});
    }

    std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
    std::sort(lambdas.begin(), lambdas.end());
    for (const double lam : lambdas) {
        double best = std::numeric_limits<double>::infinity();
        double best_eps = 0.0;
        for (const RayData& r : rays) {
            const double a_eps = (r.grad - lam * r.l2) / r.nl_pow;
            if (a_eps < best) {
                best = a_eps;
                best_eps = r.eps;
            }
        }
        if (best < s_hl) {
            LambdaStarEstimate est;
            est.lambda_star = lam;
            est.epsilon_at_min = best_eps;
            return est;
        }
    }
    throw NotFound("no lambda on the grid pushes the quotient under the best constant");
}

} // namespace choquard
