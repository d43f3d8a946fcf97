#include "choquard/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace choquard {

namespace {

/// Difference Laplacian restricted to the masked nodes, with neighbor
/// indices resolved once. Dirichlet values outside the mask are zero.
struct CompactLaplacian {
    const GridDomain* dom;
    std::int64_t m = 0;
    double inv_h2 = 0.0;
    std::vector<std::int32_t> nbr;  // 2 dim entries per node, -1 for exterior
    mutable std::int64_t matvec_count = 0;

    explicit CompactLaplacian(const GridDomain& d) : dom(&d) {
        m = d.masked_count();
        inv_h2 = 1.0 / (d.spacing * d.spacing);
        std::vector<std::int32_t> compact_of(d.mask.size(), -1);
        for (std::int64_t i = 0; i < m; ++i) {
            compact_of[d.interior_nodes[i]] = static_cast<std::int32_t>(i);
        }
        nbr.assign(m * 2 * d.dim, -1);
        for (std::int64_t i = 0; i < m; ++i) {
            const std::int64_t q = d.interior_nodes[i];
            for (int a = 0; a < d.dim; ++a) {
                nbr[i * 2 * d.dim + 2 * a] = compact_of[q - d.stride[a]];
                nbr[i * 2 * d.dim + 2 * a + 1] = compact_of[q + d.stride[a]];
            }
        }
    }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const int deg = 2 * dom->dim;
        const double diag = 2.0 * dom->dim;
        for (std::int64_t i = 0; i < m; ++i) {
            double acc = diag * x[i];
            const std::int32_t* row = &nbr[i * deg];
            for (int t = 0; t < deg; ++t) {
                if (row[t] >= 0) acc -= x[row[t]];
            }
            y[i] = acc * inv_h2;
        }
        ++matvec_count;
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// Plain CG for the SPD compact Laplacian.
void cg_solve(const CompactLaplacian& op, const std::vector<double>& b, std::vector<double>& x,
              double rel_tol, int max_iters, std::int64_t budget) {
    const std::int64_t m = op.m;
    x.assign(m, 0.0);
    std::vector<double> r = b, p = b, ap(m);
    const double bnorm = nrm2(b);
    if (bnorm == 0.0) return;
    double rr = dot(r, r);
    for (int it = 0; it < max_iters; ++it) {
        if (op.matvec_count >= budget) {
            throw ConvergenceError("matvec budget exhausted inside CG");
        }
        op.apply(p, ap);
        const double alpha = rr / dot(p, ap);
        for (std::int64_t i = 0; i < m; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        if (std::sqrt(rr_new) <= rel_tol * bnorm) return;
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::int64_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
    }
    // Leave the best iterate; callers check Ritz residuals explicitly.
}

void orthonormalize(std::vector<std::vector<double>>& v) {
    for (std::size_t j = 0; j < v.size(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                const double c = dot(v[i], v[j]);
                for (std::size_t t = 0; t < v[j].size(); ++t) v[j][t] -= c * v[i][t];
            }
        }
        const double nn = nrm2(v[j]);
        if (nn < 1e-14) throw IllConditioned("iteration block became rank deficient");
        for (double& t : v[j]) t /= nn;
    }
}

struct RawPairs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // Euclid-orthonormal
    std::vector<double> residuals;
};

double pair_residual(const CompactLaplacian& op, const std::vector<double>& v, double lam,
                     std::vector<double>& scratch) {
    op.apply(v, scratch);
    double s = 0.0;
    for (std::int64_t i = 0; i < op.m; ++i) {
        const double r = scratch[i] - lam * v[i];
        s += r * r;
    }
    return std::sqrt(s);
}

RawPairs subspace_iteration(const CompactLaplacian& op, int k, const SpectralOptions& opts) {
    const std::int64_t m = op.m;
    const int block = static_cast<int>(std::min<std::int64_t>(m, k + 8));
    std::mt19937_64 gen(opts.seed);
    std::normal_distribution<double> dist;
    std::vector<std::vector<double>> x(block, std::vector<double>(m));
    for (auto& col : x) {
        for (double& t : col) t = dist(gen);
    }
    orthonormalize(x);

    std::vector<std::vector<double>> y(block, std::vector<double>(m));
    std::vector<double> scratch(m);
    RawPairs out;
    const int cg_cap = 4000;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        for (int j = 0; j < block; ++j) {
            cg_solve(op, x[j], y[j], 1e-12, cg_cap, opts.matvec_budget);
        }
        orthonormalize(y);

        // Rayleigh-Ritz on the iterated block.
        Eigen::MatrixXd h(block, block);
        std::vector<std::vector<double>> ay(block, std::vector<double>(m));
        for (int j = 0; j < block; ++j) op.apply(y[j], ay[j]);
        for (int i = 0; i < block; ++i) {
            for (int j = i; j < block; ++j) {
                h(i, j) = h(j, i) = dot(y[i], ay[j]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        for (int j = 0; j < block; ++j) {
            for (std::int64_t t = 0; t < m; ++t) {
                double acc = 0.0;
                for (int i = 0; i < block; ++i) acc += y[i][t] * es.eigenvectors()(i, j);
                x[j][t] = acc;
            }
        }

        out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
        out.residuals.assign(k, 0.0);
        bool done = true;
        for (int j = 0; j < k; ++j) {
            out.residuals[j] = pair_residual(op, x[j], out.values[j], scratch);
            if (out.residuals[j] > opts.tol) done = false;
        }
        if (done || op.matvec_count >= opts.matvec_budget) {
            out.vectors.assign(x.begin(), x.begin() + k);
            return out;
        }
    }
    out.vectors.assign(x.begin(), x.begin() + k);
    return out;
}

RawPairs lanczos_inverse(const CompactLaplacian& op, int k, const SpectralOptions& opts) {
    const std::int64_t m = op.m;
    const int jmax = 260;
    std::mt19937_64 gen(opts.seed);
    std::normal_distribution<double> dist;

    std::vector<std::vector<double>> v;
    std::vector<double> alpha, beta;
    v.emplace_back(m);
    for (double& t : v[0]) t = dist(gen);
    {
        const double nn = nrm2(v[0]);
        for (double& t : v[0]) t /= nn;
    }

    std::vector<double> w(m), scratch(m);
    RawPairs out;
    const int cg_cap = 4000;

    for (int j = 0; j < jmax; ++j) {
        cg_solve(op, v[j], w, 1e-12, cg_cap, opts.matvec_budget);
        if (j > 0) {
            for (std::int64_t t = 0; t < m; ++t) w[t] -= beta[j - 1] * v[j - 1][t];
        }
        const double a = dot(v[j], w);
        alpha.push_back(a);
        for (std::int64_t t = 0; t < m; ++t) w[t] -= a * v[j][t];
        // Full reorthogonalization, two passes.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& vi : v) {
                const double c = dot(vi, w);
                for (std::int64_t t = 0; t < m; ++t) w[t] -= c * vi[t];
            }
        }
        double b = nrm2(w);
        if (b < 1e-13) {
            // Invariant subspace found; restart with a fresh direction.
            for (double& t : w) t = dist(gen);
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& vi : v) {
                    const double c = dot(vi, w);
                    for (std::int64_t t = 0; t < m; ++t) w[t] -= c * vi[t];
                }
            }
            b = nrm2(w);
        }
        beta.push_back(b);
        v.emplace_back(m);
        for (std::int64_t t = 0; t < m; ++t) v[j + 1][t] = w[t] / b;

        const int steps = j + 1;
        if (steps < k + 2 || steps % 5 != 0) continue;

        // Ritz pairs of the inverse operator from the tridiagonal section.
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(steps, steps);
        for (int i = 0; i < steps; ++i) {
            tri(i, i) = alpha[i];
            if (i + 1 < steps) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        // Largest inverse eigenvalues correspond to the lowest of A.
        out.values.assign(k, 0.0);
        out.vectors.assign(k, std::vector<double>(m));
        out.residuals.assign(k, 0.0);
        bool done = true;
        for (int idx = 0; idx < k; ++idx) {
            const int col = steps - 1 - idx;
            const double theta = es.eigenvalues()(col);
            if (theta <= 0.0) {
                done = false;
                break;
            }
            for (std::int64_t t = 0; t < m; ++t) {
                double acc = 0.0;
                for (int i = 0; i < steps; ++i) acc += v[i][t] * es.eigenvectors()(i, col);
                out.vectors[idx][t] = acc;
            }
            const double nn = nrm2(out.vectors[idx]);
            for (double& t : out.vectors[idx]) t /= nn;
            out.values[idx] = 1.0 / theta;
            out.residuals[idx] = pair_residual(op, out.vectors[idx], out.values[idx], scratch);
            if (out.residuals[idx] > opts.tol) done = false;
        }
        if (done) return out;
        if (op.matvec_count >= opts.matvec_budget) return out;
    }
    if (out.values.empty()) {
        throw ConvergenceError("Lanczos ran out of steps before producing Ritz pairs");
    }
    return out;
}

} // namespace

EigenBasis dirichlet_eigenpairs(DomainPtr domain, int k, const SpectralOptions& opts) {
    if (!domain) throw DomainError("null domain");
    if (k < 1 || k > 64) throw ConfigError("eigenpair count must lie in [1, 64]");
    if (k > domain->masked_count()) {
        throw ConfigError("requested more eigenpairs than masked nodes");
    }

    CompactLaplacian op(*domain);
    RawPairs raw = domain->masked_count() <= opts.subspace_crossover
                       ? subspace_iteration(op, k, opts)
                       : lanczos_inverse(op, k, opts);

    for (int i = 0; i < k; ++i) {
        if (!(raw.residuals[i] <= opts.fail_tol)) {
            throw ConvergenceError("eigenpair " + std::to_string(i) + " residual " +
                                   std::to_string(raw.residuals[i]) + " exceeds " +
                                   std::to_string(opts.fail_tol) + " after budget");
        }
    }

    EigenBasis basis;
    basis.domain = domain;
    basis.count = k;
    basis.eigenvalues = raw.values;
    basis.residuals = raw.residuals;
    const double h_half = std::pow(domain->spacing, domain->dim / 2.0);
    for (int i = 0; i < k; ++i) {
        ScalarField e = make_field(domain);
        const auto& vec = raw.vectors[i];
        // Fix the sign: first value of significant size becomes positive.
        double flip = 1.0;
        double top = 0.0;
        for (const double t : vec) top = std::max(top, std::abs(t));
        for (const double t : vec) {
            if (std::abs(t) > 1e-8 * top) {
                flip = t > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (std::int64_t t = 0; t < op.m; ++t) {
            e.values[domain->interior_nodes[t]] = flip * vec[t] / h_half;
        }
        basis.modes.push_back(std::move(e));
    }
    return basis;
}

std::pair<ScalarField, ScalarField> project_split(const EigenBasis& basis,
                                                  const ScalarField& u, int j) {
    if (j < 0 || j > basis.count) {
        throw IndexError("projection order " + std::to_string(j) + " outside [0, " +
                         std::to_string(basis.count) + "]");
    }
    require_same_domain(u, basis.modes.empty() ? u : basis.modes.front());
    ScalarField y = make_field(u.domain);
    for (int i = 0; i < j; ++i) {
        const double c = inner_l2(basis.modes[i], u);
        axpy(c, basis.modes[i], y);
    }
    ScalarField z = lin_comb(1.0, u, -1.0, y);
    // Nudge the pair by at most one ulp so the sum reassembles exactly.
    for (const std::int64_t q : u.domain->interior_nodes) {
        const double uq = u.values[q];
        double& yq = y.values[q];
        double& zq = z.values[q];
        if (yq + zq != uq) {
            yq = uq - zq;
            zq = uq - yq;
        }
    }
    return {std::move(y), std::move(z)};
}

} // namespace choquard
