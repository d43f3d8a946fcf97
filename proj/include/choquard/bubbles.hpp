#pragma once

#include <array>
#include <span>
#include <vector>

#include "choquard/energy.hpp"

namespace choquard {

/// Concentrating test profile: the extremal bubble at scale epsilon,
/// multiplied by a C^1 radial cutoff that is 1 inside radius delta and 0
/// outside 2 delta around the center.
struct BubbleSpec {
    DomainPtr domain;
    double delta = 0.0;
    double epsilon = 0.0;
    std::array<double, 5> center{};
};

/// Samples the cut bubble. Throws ResolutionError unless
/// 2 h <= epsilon <= delta / 2, and DomainError if the support ball of
/// radius 2 delta is not fully masked.
ScalarField make_bubble_field(const BubbleSpec& spec);

struct BubbleReport {
    double epsilon = 0.0;
    double lambda = 0.0;
    double grad_sq = 0.0;
    double l2_sq = 0.0;
    double nl_double = 0.0;
    double a_epsilon = 0.0;  // (grad_sq - lambda l2_sq) / nl_double^{1/q}
    double tail_D = 0.0;     // kernel interaction of the outer tail with the core
    double tail_E = 0.0;     // self-interaction of the outer tail
};

/// Energies of the cut bubble at the context lambda, plus the two tail
/// integrals obtained by splitting |u|^q at radius delta: with
/// f = |u|^q 1_{r < delta} and g = |u|^q 1_{r >= delta},
///   tail_D = Int Int g K f,   tail_E = Int Int g K g,
/// so that nl_double = (core part) + 2 tail_D + tail_E.
BubbleReport bubble_report(const EnergyContext& ctx, const BubbleSpec& spec);

/// bubble_report over an ascending epsilon grid.
std::vector<BubbleReport> bubble_scan(const EnergyContext& ctx, double delta,
                                      std::span<const double> eps_grid,
                                      const std::array<double, 5>& center = {});

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares line through (ln x, ln y). Throws FitError on fewer than
/// two points, nonpositive data, or zero spread in x.
LinearFit fit_log_slope(std::span<const double> xs, std::span<const double> ys);

struct FitResult {
    double exponent = 0.0;   // power fitted after dividing out any log factor
    double log_slope = 0.0;  // raw log-log slope of the deficit itself
    double r_squared = 0.0;  // goodness of the model regression
};

/// Fits the quotient deficit S_HL - a_epsilon of a sweep against the
/// expected small-epsilon model: epsilon for dim 3, epsilon^2 |ln epsilon|
/// for dim 4, epsilon^2 for dim 5. Throws FitError on fewer than four
/// reports or a nonpositive deficit.
FitResult deficit_rate_fit(std::span<const BubbleReport> reports,
                           const SharpConstants& constants);

struct LambdaStarEstimate {
    double lambda_star = 0.0;     // smallest grid lambda with min_eps a_epsilon < S_HL
    double epsilon_at_min = 0.0;  // scale attaining that minimum
};

/// Grid-resolved threshold in dimension 3: the smallest lambda on the
/// grid for which some bubble scale pushes the quotient below the best
/// nonlocal constant. The qualifying set is an up-set in lambda since
/// a_epsilon decreases in lambda. Throws DimensionError unless dim is 3
/// and NotFound when no grid lambda qualifies.
LambdaStarEstimate lambda_star_estimate(const EnergyContext& ctx, double delta,
                                        std::span<const double> eps_grid,
                                        std::span<const double> lambda_grid);

} // namespace choquard
