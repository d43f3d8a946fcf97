#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "choquard/errors.hpp"

namespace choquard {

/// One exposed face of a masked cell. The outward normal is sign * e_axis,
/// the face center sits half a spacing from the node, and the face measure
/// is spacing^(dim-1).
struct BoundaryFace {
    std::int64_t node = 0;
    int axis = 0;
    int sign = 0;
};

/// Uniform tensor grid on the cube [-half_width, half_width]^dim with a
/// node mask selecting the discrete domain. Nodes are indexed
/// lexicographically, last axis fastest. Masked nodes always keep a
/// one-node margin to the cube edge, so neighbor indices of masked nodes
/// never leave the array; several kernels rely on that.
///
/// Domains are immutable after construction and shared between fields.
struct GridDomain {
    int dim = 0;
    int points_per_axis = 0;
    double half_width = 0.0;
    double spacing = 0.0;
    std::string shape_name;    // "box", "ball" or "mask"
    double ball_radius = 0.0;  // meaningful for shape "ball" only
    bool star_shaped = false;  // star-shaped with respect to the origin

    std::vector<std::uint8_t> mask;            // size n^dim
    std::vector<std::int64_t> interior_nodes;  // ascending ids of masked nodes
    std::vector<BoundaryFace> boundary_faces;
    std::array<std::int64_t, 5> stride{};      // stride[d] for axis d < dim

    std::int64_t total_nodes() const;
    std::int64_t masked_count() const { return static_cast<std::int64_t>(interior_nodes.size()); }
    double coord(int i) const { return -half_width + spacing * i; }
    void node_coords(std::int64_t id, double* out) const;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

DomainPtr make_box_domain(int dim, double half_width, int points_per_axis);
DomainPtr make_ball_domain(int dim, double half_width, int points_per_axis, double radius);

/// Masks the nodes where `inside` holds. The caller vouches for
/// star-shapedness; the flag is only recorded. Throws DomainError if the
/// predicate reaches the outer index shell of the cube.
DomainPtr make_masked_domain(int dim, double half_width, int points_per_axis,
                             const std::function<bool(std::span<const double>)>& inside,
                             bool star_shaped);

/// True when the two grids have equal dim, extent and node count. Mask
/// contents are not compared; see same_domain for that.
bool same_geometry(const GridDomain& a, const GridDomain& b);
bool same_domain(const GridDomain& a, const GridDomain& b);

/// Grid function, zero outside the mask.
struct ScalarField {
    DomainPtr domain;
    std::vector<double> values;  // size n^dim, lexicographic
};

ScalarField make_field(DomainPtr domain);
ScalarField sample_field(DomainPtr domain,
                         const std::function<double(std::span<const double>)>& f);
/// Uniform values in [-amplitude, amplitude] on the mask, fixed generator,
/// reproducible per seed.
ScalarField random_field(DomainPtr domain, std::uint64_t seed, double amplitude = 1.0);

void require_same_domain(const ScalarField& a, const ScalarField& b);

void mask_project(ScalarField& u);
void scale_field(ScalarField& u, double alpha);
void axpy(double alpha, const ScalarField& x, ScalarField& y);
ScalarField lin_comb(double a, const ScalarField& x, double b, const ScalarField& y);

/// h^dim weighted inner product and derived integrals.
double inner_l2(const ScalarField& a, const ScalarField& b);
double l2_sq_integral(const ScalarField& u);
double lp_integral(const ScalarField& u, double p);
double sup_norm(const ScalarField& u);

/// Forward-difference Dirichlet energy,
///   h^{dim-2} * sum over grid edges of the squared difference,
/// with off-mask values read as zero. Coincides exactly with
/// h^dim * <u, apply_neg_laplacian(u)>.
double grad_sq_integral(const ScalarField& u);

/// Boundary functional  sum over faces of (x_face . normal) |du/dnormal|^2
/// times the face measure, with the one-sided normal derivative -u/h.
double boundary_weighted_grad_sq(const ScalarField& u);

ScalarField abs_power(const ScalarField& u, double p);
ScalarField signed_power(const ScalarField& u, double p);

/// (2 dim + 1)-point negative Laplacian with zero exterior values,
/// scaled by 1/h^2. Masked output.
ScalarField apply_neg_laplacian(const ScalarField& u);

/// Radius of the smallest ball, centered at the node of largest |u|, that
/// contains at least `fraction` of the total Dirichlet energy. Throws
/// DegenerateInput on the zero field.
double concentration_radius(const ScalarField& u, double fraction = 0.9);

/// Binary snapshot format, extension-agnostic. Layout, little-endian:
///   "CHQF" | u32 version (1) | u32 dim | dim x u32 points_per_axis |
///   f64 half_width | n^dim x f64 values | n^dim x u8 mask |
///   u8 star flag | u8 shape code | f64 ball radius.
/// A sidecar JSON with the same path plus ".json" records the grid
/// metadata for humans; loading uses the binary alone.
void save_field(const ScalarField& u, const std::string& path);
ScalarField load_field(const std::string& path);

} // namespace choquard
