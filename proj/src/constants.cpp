#include "choquard/constants.hpp"

#include <cmath>
#include <vector>

namespace choquard {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gamma_fn(double x) { return std::tgamma(x); }

} // namespace

void require_supported_dim(int dim) {
    if (dim < 3 || dim > 5) {
        throw DimensionError("dimension must be 3, 4 or 5, got " + std::to_string(dim));
    }
}

void require_mu_range(int dim, double mu) {
    if (!(mu > 0.0) || !(mu < static_cast<double>(dim))) {
        throw DomainError("kernel exponent mu must satisfy 0 < mu < " +
                          std::to_string(dim) + ", got " + std::to_string(mu));
    }
}

double hls_sharp_constant(int dim, double mu) {
    require_supported_dim(dim);
    require_mu_range(dim, mu);
    const double n = dim;
    const double a = std::pow(kPi, mu / 2.0) * gamma_fn(n / 2.0 - mu / 2.0) / gamma_fn(n - mu / 2.0);
    const double b = std::pow(gamma_fn(n / 2.0) / gamma_fn(n), -1.0 + mu / n);
    return a * b;
}

double best_sobolev_constant(int dim) {
    require_supported_dim(dim);
    const double n = dim;
    return kPi * n * (n - 2.0) * std::pow(gamma_fn(n / 2.0) / gamma_fn(n), 2.0 / n);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 2) throw ConfigError("gauss_legendre needs at least 2 nodes");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-angle initial guess, then Newton on P_n.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

double best_sobolev_constant_quadrature(int dim, int nodes) {
    require_supported_dim(dim);
    if (nodes < 32) throw ConfigError("quadrature route needs at least 32 nodes");
    const double n = dim;
    std::vector<double> xs, ws;
    gauss_legendre(nodes, xs, ws);

    // Map (-1,1) -> (0, pi/2), then r = tan(theta) maps onto (0, inf).
    const double cn = std::pow(n * (n - 2.0), (n - 2.0) / 4.0);
    double grad = 0.0, mass = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double theta = (xs[i] + 1.0) * (kPi / 4.0);
        const double jac = ws[i] * (kPi / 4.0) / std::pow(std::cos(theta), 2.0);
        const double r = std::tan(theta);
        const double du = -cn * (n - 2.0) * r * std::pow(1.0 + r * r, -n / 2.0);
        const double u = cn * std::pow(1.0 + r * r, -(n - 2.0) / 2.0);
        const double rn1 = std::pow(r, n - 1.0);
        grad += jac * du * du * rn1;
        mass += jac * std::pow(u, 2.0 * n / (n - 2.0)) * rn1;
    }
    const double omega = unit_sphere_area(dim);
    grad *= omega;
    mass *= omega;
    return grad / std::pow(mass, (n - 2.0) / n);
}

double best_nonlocal_constant(int dim, double mu) {
    const double s = best_sobolev_constant(dim);
    const double c = hls_sharp_constant(dim, mu);
    const double n = dim;
    return s / std::pow(c, (n - 2.0) / (2.0 * n - mu));
}

double threshold_level(int dim, double mu) {
    require_supported_dim(dim);
    require_mu_range(dim, mu);
    const double n = dim;
    const double shl = best_nonlocal_constant(dim, mu);
    return (n + 2.0 - mu) / (4.0 * n - 2.0 * mu) *
           std::pow(shl, (2.0 * n - mu) / (n + 2.0 - mu));
}

double threshold_level(const SharpConstants& c) {
    return threshold_level(c.dim, c.mu);
}

SharpConstants make_sharp_constants(int dim, double mu) {
    require_supported_dim(dim);
    require_mu_range(dim, mu);
    SharpConstants c;
    c.dim = dim;
    c.mu = mu;
    const double n = dim;
    c.sobolev_exp = 2.0 * n / (n - 2.0);
    c.upper_crit = (2.0 * n - mu) / (n - 2.0);
    c.lower_crit = (2.0 * n - mu) / n;
    c.hls_const = hls_sharp_constant(dim, mu);
    c.sobolev_S = best_sobolev_constant(dim);
    c.nonlocal_S_HL = best_nonlocal_constant(dim, mu);
    c.ps_threshold = threshold_level(dim, mu);
    return c;
}

double extremal_value(int dim, double r) {
    require_supported_dim(dim);
    const double n = dim;
    return std::pow(n * (n - 2.0), (n - 2.0) / 4.0) *
           std::pow(1.0 + r * r, -(n - 2.0) / 2.0);
}

double extremal_family_value(int dim, double b, double dist) {
    require_supported_dim(dim);
    if (!(b > 0.0)) throw DomainError("dilation parameter b must be positive");
    const double n = dim;
    return std::pow(n * (n - 2.0), (n - 2.0) / 4.0) *
           std::pow(b / (b * b + dist * dist), (n - 2.0) / 2.0);
}

double scaled_extremal_prefactor(int dim, double mu) {
    require_supported_dim(dim);
    require_mu_range(dim, mu);
    const double n = dim;
    const double s = best_sobolev_constant(dim);
    const double c = hls_sharp_constant(dim, mu);
    return std::pow(s, (n - mu) * (2.0 - n) / (4.0 * (n - mu + 2.0))) *
           std::pow(c, (2.0 - n) / (2.0 * (n - mu + 2.0)));
}

double extremal_grad_integral(int dim) {
    return std::pow(best_sobolev_constant(dim), dim / 2.0);
}

double unit_sphere_area(int dim) {
    const double n = dim;
    return 2.0 * std::pow(kPi, n / 2.0) / gamma_fn(n / 2.0);
}

double unit_ball_volume(int dim) {
    const double n = dim;
    return std::pow(kPi, n / 2.0) / gamma_fn(n / 2.0 + 1.0);
}

} // namespace choquard
