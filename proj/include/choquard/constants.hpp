#pragma once

#include <vector>

#include "choquard/errors.hpp"

namespace choquard {

/// Critical-exponent and sharp-constant bundle for the nonlocal problem
///
///   -Delta u = ( |x|^{-mu} * |u|^{upper_crit} ) |u|^{upper_crit - 2} u + lambda u
///
/// on a bounded domain of dimension dim with zero boundary values.
///
/// All members are determined by (dim, mu); construct with
/// make_sharp_constants and treat as immutable.
struct SharpConstants {
    int dim = 0;             // spatial dimension, one of 3, 4, 5
    double mu = 0.0;         // kernel exponent, 0 < mu < dim
    double sobolev_exp = 0.0;   // 2N/(N-2)
    double upper_crit = 0.0;    // (2N - mu)/(N - 2)
    double lower_crit = 0.0;    // (2N - mu)/N
    double hls_const = 0.0;     // sharp constant of the convolution inequality
    double sobolev_S = 0.0;     // best constant of the Sobolev embedding
    double nonlocal_S_HL = 0.0; // best constant of the nonlocal quotient
    double ps_threshold = 0.0;  // compactness threshold level
};

/// Throws DimensionError unless dim is 3, 4 or 5.
void require_supported_dim(int dim);

/// Throws DomainError unless 0 < mu < dim.
void require_mu_range(int dim, double mu);

/// Sharp constant of the doubly weighted convolution inequality with kernel
/// |x - y|^{-mu} and equal conjugate exponents 2N/(2N - mu):
///
///   C(N,mu) = pi^{mu/2} * Gamma(N/2 - mu/2)/Gamma(N - mu/2)
///             * ( Gamma(N/2)/Gamma(N) )^{-1 + mu/N}.
double hls_sharp_constant(int dim, double mu);

/// Best constant of the embedding of the Dirichlet space into L^{2N/(N-2)},
/// closed form  S = pi N (N-2) ( Gamma(N/2)/Gamma(N) )^{2/N}.
double best_sobolev_constant(int dim);

/// Same constant evaluated as a quotient of radial integrals of the explicit
/// extremal profile, by Gauss-Legendre quadrature after r = tan(theta).
/// Cross-check route for the closed form; nodes >= 32 required.
double best_sobolev_constant_quadrature(int dim, int nodes = 512);

/// Best constant of the nonlocal quotient,
///   S_HL = S / C(N,mu)^{(N-2)/(2N-mu)}.
double best_nonlocal_constant(int dim, double mu);

/// Level below which Palais-Smale sequences are compact:
///   (N+2-mu)/(4N-2mu) * S_HL^{(2N-mu)/(N+2-mu)}.
double threshold_level(int dim, double mu);
double threshold_level(const SharpConstants& c);

/// Builds the full bundle. Throws DimensionError / DomainError on bad input.
SharpConstants make_sharp_constants(int dim, double mu);

/// Radial extremal profile U(x) = [N(N-2)]^{(N-2)/4} (1 + |x|^2)^{-(N-2)/2},
/// evaluated at radius r >= 0.
double extremal_value(int dim, double r);

/// Translated and dilated family
///   U_{a,b}(x) = [N(N-2)]^{(N-2)/4} ( b / (b^2 + |x-a|^2) )^{(N-2)/2}.
/// dist is |x - a|; throws DomainError unless b > 0.
double extremal_family_value(int dim, double b, double dist);

/// Prefactor turning U into the profile normalized for the nonlocal
/// quotient: both its Dirichlet energy and its double integral equal
/// S_HL^{(2N-mu)/(N-mu+2)}.
double scaled_extremal_prefactor(int dim, double mu);

/// Dirichlet energy of U over the whole space, S^{N/2} in closed form.
double extremal_grad_integral(int dim);

/// Surface measure of the unit sphere in dimension dim.
double unit_sphere_area(int dim);

/// Volume of the unit ball in dimension dim.
double unit_ball_volume(int dim);

/// Gauss-Legendre nodes and weights on (-1, 1). Throws ConfigError if
/// n < 2. Used by the quadrature route and by tests.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace choquard
