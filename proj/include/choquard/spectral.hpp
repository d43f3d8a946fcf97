#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "choquard/field.hpp"

namespace choquard {

/// Leading Dirichlet eigenpairs of the difference Laplacian on a masked
/// grid. Modes are orthonormal in the h^dim-weighted inner product,
/// eigenvalues ascend, and each mode's first significant value (in node
/// order) is positive. residuals[i] holds ||A v - lambda v||_2 for the
/// Euclid-normalized vector.
struct EigenBasis {
    DomainPtr domain;
    int count = 0;
    std::vector<double> eigenvalues;
    std::vector<ScalarField> modes;
    std::vector<double> residuals;
};

struct SpectralOptions {
    std::uint64_t seed = 1234;
    double tol = 1e-10;             // residual target during iteration
    double fail_tol = 1e-8;         // hard bound; worse than this throws
    std::int64_t matvec_budget = 500000;
    std::int64_t subspace_crossover = 20000;  // masked nodes; above: Lanczos
    int max_outer = 400;
};

/// Computes the k lowest eigenpairs. Below the crossover size this runs
/// inverse subspace iteration with a dense Rayleigh-Ritz step; above it,
/// Lanczos on the inverse operator with full reorthogonalization. Inner
/// solves use conjugate gradients and count toward the matvec budget.
/// Throws ConvergenceError if the budget runs out above fail_tol.
EigenBasis dirichlet_eigenpairs(DomainPtr domain, int k, const SpectralOptions& opts = {});

/// Splits u = y + z with y the L2 projection onto the first j modes. The
/// remainder is formed as z = u - y, so y + z reassembles u exactly.
/// Throws IndexError if j exceeds basis.count.
std::pair<ScalarField, ScalarField> project_split(const EigenBasis& basis,
                                                  const ScalarField& u, int j);

} // namespace choquard
