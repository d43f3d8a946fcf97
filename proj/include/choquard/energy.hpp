#pragma once

#include <memory>
#include <span>
#include <vector>

#include "choquard/constants.hpp"
#include "choquard/field.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

/// Everything needed to evaluate the functional
///
///   J(u) = 1/2 |grad u|_2^2 - lambda/2 |u|_2^2
///          - 1/(2q) Int Int |u(x)|^q |x-y|^{-mu} |u(y)|^q dx dy
///
/// with q the upper critical exponent of the (dim, mu) pair.
struct EnergyContext {
    DomainPtr domain;
    SharpConstants constants;
    std::shared_ptr<const RieszPlan> plan;
    double lambda = 0.0;
};

EnergyContext make_energy_context(DomainPtr domain, double mu, double lambda,
                                  std::int64_t padded_cap = kDefaultPaddedCap);

/// Throws if the context members disagree (plan exponent vs constants,
/// plan grid vs domain).
void validate_context(const EnergyContext& ctx);

struct EnergyBreakdown {
    double grad_sq = 0.0;
    double l2_sq = 0.0;
    double nonlocal_double = 0.0;  // the double convolution integral
    double functional_value = 0.0;
    double quotient = 0.0;  // (grad_sq - lambda l2_sq) / nonlocal^{1/q}
    double nl_norm = 0.0;   // nonlocal^{1/(2q)}
};

/// One convolution pass; all scalars derived from it. Throws
/// DegenerateInput on the zero field (the quotient is undefined there).
EnergyBreakdown evaluate_energy(const EnergyContext& ctx, const ScalarField& u);

/// Strong-form residual field g with <J'(u), phi> = inner_l2(g, phi):
///   g = -Lap u - lambda u - (K * |u|^q) sgn(u) |u|^{q-1}.
ScalarField energy_gradient(const EnergyContext& ctx, const ScalarField& u);

double quotient_value(const EnergyContext& ctx, const ScalarField& u);

/// Maximizer t* of t -> J(t u) on the open ray t > 0. Throws RayUnbounded
/// when the quadratic part is nonpositive and no interior maximum exists.
double ray_maximizer(const EnergyContext& ctx, const ScalarField& u);

/// J(t* u); equals (q-1)/(2q) * quotient^{q/(q-1)}.
double ray_max_level(const EnergyContext& ctx, const ScalarField& u);

/// Double integral over its sharp convolution bound; at most 1 up to
/// discretization error, approaching 1 on extremal-shaped profiles.
double hls_ratio(const EnergyContext& ctx, const ScalarField& u);

/// | NL(base + bump) - NL(bump) - NL(base) |, the splitting defect of the
/// nonlocal term. Vanishes as the bump spreads its mass away from base.
double brezis_lieb_defect(const EnergyContext& ctx, const ScalarField& base,
                          const ScalarField& bump);

/// The same defect for each bump of a family; expected to decrease along a
/// concentrating sequence.
std::vector<double> brezis_lieb_defect(const EnergyContext& ctx, const ScalarField& base,
                                       std::span<const ScalarField> bumps);

} // namespace choquard
