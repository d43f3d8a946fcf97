#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "choquard/energy.hpp"
#include "choquard/spectral.hpp"

namespace choquard {

enum class SolveVerdict {
    converged_nontrivial,  // gradient residual under tolerance on a nontrivial field
    collapsed_trivial,     // nonlocal norm fell under the collapse ratio
    concentrating,         // 90 percent of the Dirichlet energy inside a few cells
    budget_exhausted,      // iteration or line-search budget ran out first
};

std::string verdict_name(SolveVerdict v);

struct SolveOptions {
    double tol = 1e-6;                  // gradient residual target
    int max_iters = 400;
    double collapse_ratio = 1e-8;       // of the initial nonlocal norm
    double concentration_factor = 3.0;  // times the grid spacing
    double initial_step = 0.1;
    int max_halvings = 30;
};

struct SolveReport {
    double lambda = 0.0;
    int iterations = 0;
    double final_quotient = 0.0;
    double mp_level = 0.0;  // ((q-1)/(2q)) Q^{q/(q-1)} when Q > 0
    double gradient_residual = 0.0;
    double nl_norm_final = 0.0;
    double concentration_radius = 0.0;
    SolveVerdict verdict = SolveVerdict::budget_exhausted;
    std::vector<double> quotient_trace;  // nonincreasing, one entry per accepted iterate
    ScalarField final_field;
};

/// Adaptive projected descent of the quotient on the unit sphere of the
/// nonlocal norm. Stops on a small quotient gradient, on concentration of
/// the Dirichlet energy below a few cells, or on budget. Throws
/// DegenerateInput on a zero initial field. A nonpositive final quotient
/// means lambda is at or above the first eigenvalue; that is reported as
/// a warning on stderr, not an error.
SolveReport minimize_quotient(const EnergyContext& ctx, const ScalarField& init,
                              const SolveOptions& opts = {});

/// Descent toward a zero of the functional derivative: each iterate is
/// rescaled to its ray maximizer (so the Nehari constraint <J'(u),u> = 0
/// holds exactly), then stepped against the gradient. The residual is the
/// dual norm of J' over the Dirichlet norm of the iterate. If the
/// quadratic part turns nonpositive the ray has no maximizer and the run
/// ends: collapsed_trivial when the nonlocal norm has shrunk below the
/// collapse ratio, budget_exhausted otherwise.
SolveReport find_critical_point(const EnergyContext& ctx, const ScalarField& init,
                                const SolveOptions& opts = {});

/// Span of the first j Dirichlet modes together with a concentrating
/// bubble; the linking level is the quotient maximum over that span.
struct LinkingSpec {
    int j = 1;
    double epsilon = 0.0;  // recorded bubble scale
    EigenBasis basis;
    ScalarField bubble;
};

struct LinkingOptions {
    int starts = 32;
    int max_iters = 200;
    double tol = 1e-10;
    std::uint64_t seed = 2024;
    double cond_limit = 1e10;  // Gram condition number ceiling
};

struct LinkingReport {
    double m_value = 0.0;    // max of the quotient over the span
    double level = 0.0;      // ray level of the maximizer
    double a_epsilon = 0.0;  // quotient of the bubble alone
    double gram_condition = 0.0;
    double lambda = 0.0;
    int j = 0;
    double epsilon = 0.0;
    // Unit coefficient vector of the maximizer over the span with each
    // spanning vector rescaled to unit mass; eigen parts first, bubble
    // coefficient last and >= 0.
    std::vector<double> coefficients;
};

/// Multistart ascent of the quotient over the coefficient sphere of the
/// span. The pure-bubble direction is always among the starts, so
/// m_value >= a_epsilon. Throws IllConditioned when the span's Gram
/// matrix condition exceeds the ceiling, ConfigError on an invalid spec.
LinkingReport linking_level(const EnergyContext& ctx, const LinkingSpec& spec,
                            const LinkingOptions& opts = {});

/// Dilation-identity residual
///   1/2 Int_bd (x . nu) |du/dnu|^2 + (N-2)/2 |grad u|^2
///     - (2N-mu)/(2q) IntInt - (lambda N / 2) |u|^2
/// and the scale (sum of the four magnitudes). Returns (0, 0) on the zero
/// field; residual/scale is the dimensionless defect.
std::pair<double, double> pohozaev_residual(const EnergyContext& ctx, const ScalarField& u);

/// |residual| / scale, and 0 for the zero field.
double pohozaev_defect(const EnergyContext& ctx, const ScalarField& u);

struct ProbeReport {
    int n_trivial = 0;        // collapsed runs
    int n_concentrating = 0;
    int n_nontrivial = 0;     // converged runs whose defect is under the tolerance
    int n_unresolved = 0;     // budget runs and converged runs with a large defect
    std::vector<SolveReport> runs;
};

/// Runs find_critical_point from seeded random starts and classifies the
/// outcomes; with lambda < 0 on a star-shaped domain every run is
/// expected to end short of a genuine critical point. Throws ConfigError
/// if the domain is not flagged star-shaped or multistarts < 1.
ProbeReport nonexistence_probe(const EnergyContext& ctx, int multistarts,
                               const SolveOptions& opts = {}, double defect_tol = 0.05);

} // namespace choquard
