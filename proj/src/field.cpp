#include "choquard/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>

#include "choquard/constants.hpp"

namespace choquard {

namespace {

std::int64_t ipow(int base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

/// Computes strides, the interior node list and the exposed faces, and
/// validates the margin and minimum-size invariants on a filled mask.
void finalize_domain(GridDomain& d) {
    const int n = d.points_per_axis;
    d.stride.fill(0);
    d.stride[d.dim - 1] = 1;
    for (int a = d.dim - 2; a >= 0; --a) d.stride[a] = d.stride[a + 1] * n;

    d.interior_nodes.clear();
    const std::int64_t total = d.total_nodes();
    for (std::int64_t id = 0; id < total; ++id) {
        if (!d.mask[id]) continue;
        std::int64_t rest = id;
        for (int a = d.dim - 1; a >= 0; --a) {
            const int i = static_cast<int>(rest % n);
            rest /= n;
            if (i == 0 || i == n - 1) {
                throw DomainError("mask reaches the outer index shell of the grid cube");
            }
        }
        d.interior_nodes.push_back(id);
    }
    if (d.masked_count() < (std::int64_t{1} << d.dim)) {
        throw DegenerateInput("mask selects fewer than 2^dim nodes");
    }

    d.boundary_faces.clear();
    for (const std::int64_t q : d.interior_nodes) {
        for (int a = 0; a < d.dim; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                const std::int64_t nb = q + s * d.stride[a];
                if (!d.mask[nb]) d.boundary_faces.push_back({q, a, s});
            }
        }
    }
}

// Node predicate over (multi-index, coordinates). Built-in shapes exclude
// the outer index shell themselves; user predicates that reach it trip the
// margin check in finalize_domain.
using NodePred = std::function<bool(const int*, std::span<const double>)>;

DomainPtr build_from_predicate(int dim, double half_width, int points_per_axis,
                               const NodePred& inside, std::string shape_name,
                               double ball_radius, bool star_shaped) {
    require_supported_dim(dim);
    if (!(half_width > 0.0)) throw DomainError("half_width must be positive");
    if (points_per_axis < 8) {
        throw DomainError("need at least 8 points per axis, got " +
                          std::to_string(points_per_axis));
    }
    auto d = std::make_shared<GridDomain>();
    d->dim = dim;
    d->points_per_axis = points_per_axis;
    d->half_width = half_width;
    d->spacing = 2.0 * half_width / (points_per_axis - 1);
    d->shape_name = std::move(shape_name);
    d->ball_radius = ball_radius;
    d->star_shaped = star_shaped;
    d->mask.assign(ipow(points_per_axis, dim), 0);

    std::array<double, 5> x{};
    std::array<int, 5> idx{};
    const std::int64_t total = d->total_nodes();
    for (std::int64_t id = 0; id < total; ++id) {
        std::int64_t rest = id;
        for (int a = dim - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rest % points_per_axis);
            rest /= points_per_axis;
            x[a] = d->coord(idx[a]);
        }
        if (inside(idx.data(), std::span<const double>(x.data(), dim))) d->mask[id] = 1;
    }
    finalize_domain(*d);
    return d;
}

bool index_interior(const int* idx, int dim, int n) {
    for (int a = 0; a < dim; ++a) {
        if (idx[a] == 0 || idx[a] == n - 1) return false;
    }
    return true;
}

} // namespace

std::int64_t GridDomain::total_nodes() const {
    return ipow(points_per_axis, dim);
}

void GridDomain::node_coords(std::int64_t id, double* out) const {
    for (int a = dim - 1; a >= 0; --a) {
        out[a] = coord(static_cast<int>(id % points_per_axis));
        id /= points_per_axis;
    }
}

DomainPtr make_box_domain(int dim, double half_width, int points_per_axis) {
    const int n = points_per_axis;
    return build_from_predicate(
        dim, half_width, points_per_axis,
        [dim, n](const int* idx, std::span<const double>) {
            return index_interior(idx, dim, n);
        },
        "box", 0.0, true);
}

DomainPtr make_ball_domain(int dim, double half_width, int points_per_axis, double radius) {
    if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
    if (radius > half_width) {
        throw DomainError("ball of radius " + std::to_string(radius) +
                          " does not fit in half-width " + std::to_string(half_width));
    }
    const int n = points_per_axis;
    return build_from_predicate(
        dim, half_width, points_per_axis,
        [dim, n, radius](const int* idx, std::span<const double> x) {
            if (!index_interior(idx, dim, n)) return false;
            double s = 0.0;
            for (double c : x) s += c * c;
            return s < radius * radius;
        },
        "ball", radius, true);
}

DomainPtr make_masked_domain(int dim, double half_width, int points_per_axis,
                             const std::function<bool(std::span<const double>)>& inside,
                             bool star_shaped) {
    return build_from_predicate(
        dim, half_width, points_per_axis,
        [&inside](const int*, std::span<const double> x) { return inside(x); }, "mask", 0.0,
        star_shaped);
}

bool same_geometry(const GridDomain& a, const GridDomain& b) {
    return a.dim == b.dim && a.points_per_axis == b.points_per_axis &&
           a.half_width == b.half_width;
}

bool same_domain(const GridDomain& a, const GridDomain& b) {
    if (&a == &b) return true;
    return same_geometry(a, b) && a.mask == b.mask;
}

ScalarField make_field(DomainPtr domain) {
    if (!domain) throw DomainError("null domain");
    ScalarField u;
    u.values.assign(domain->total_nodes(), 0.0);
    u.domain = std::move(domain);
    return u;
}

ScalarField sample_field(DomainPtr domain,
                         const std::function<double(std::span<const double>)>& f) {
    ScalarField u = make_field(std::move(domain));
    std::array<double, 5> x{};
    for (const std::int64_t q : u.domain->interior_nodes) {
        u.domain->node_coords(q, x.data());
        u.values[q] = f(std::span<const double>(x.data(), u.domain->dim));
    }
    return u;
}

ScalarField random_field(DomainPtr domain, std::uint64_t seed, double amplitude) {
    ScalarField u = make_field(std::move(domain));
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    for (const std::int64_t q : u.domain->interior_nodes) u.values[q] = dist(gen);
    return u;
}

void require_same_domain(const ScalarField& a, const ScalarField& b) {
    if (!a.domain || !b.domain || !same_domain(*a.domain, *b.domain)) {
        throw DimensionError("fields live on different grids");
    }
}

void mask_project(ScalarField& u) {
    const GridDomain& d = *u.domain;
    std::vector<double> clean(u.values.size(), 0.0);
    for (const std::int64_t q : d.interior_nodes) clean[q] = u.values[q];
    u.values.swap(clean);
}

void scale_field(ScalarField& u, double alpha) {
    for (const std::int64_t q : u.domain->interior_nodes) u.values[q] *= alpha;
}

void axpy(double alpha, const ScalarField& x, ScalarField& y) {
    require_same_domain(x, y);
    for (const std::int64_t q : x.domain->interior_nodes) y.values[q] += alpha * x.values[q];
}

ScalarField lin_comb(double a, const ScalarField& x, double b, const ScalarField& y) {
    require_same_domain(x, y);
    ScalarField out = make_field(x.domain);
    for (const std::int64_t q : x.domain->interior_nodes) {
        out.values[q] = a * x.values[q] + b * y.values[q];
    }
    return out;
}

double inner_l2(const ScalarField& a, const ScalarField& b) {
    require_same_domain(a, b);
    double s = 0.0;
    for (const std::int64_t q : a.domain->interior_nodes) s += a.values[q] * b.values[q];
    return s * std::pow(a.domain->spacing, a.domain->dim);
}

double l2_sq_integral(const ScalarField& u) {
    return inner_l2(u, u);
}

double lp_integral(const ScalarField& u, double p) {
    if (!(p > 0.0)) throw ConfigError("lp_integral needs p > 0");
    double s = 0.0;
    for (const std::int64_t q : u.domain->interior_nodes) s += std::pow(std::abs(u.values[q]), p);
    return s * std::pow(u.domain->spacing, u.domain->dim);
}

double sup_norm(const ScalarField& u) {
    double m = 0.0;
    for (const std::int64_t q : u.domain->interior_nodes) m = std::max(m, std::abs(u.values[q]));
    return m;
}

double grad_sq_integral(const ScalarField& u) {
    const GridDomain& d = *u.domain;
    double s = 0.0;
    for (const std::int64_t q : d.interior_nodes) {
        for (int a = 0; a < d.dim; ++a) {
            const double du = u.values[q + d.stride[a]] - u.values[q];
            s += du * du;
            // Edge entering the mask from an unmasked lower neighbor.
            if (!d.mask[q - d.stride[a]]) s += u.values[q] * u.values[q];
        }
    }
    return s * std::pow(d.spacing, d.dim - 2);
}

double boundary_weighted_grad_sq(const ScalarField& u) {
    const GridDomain& d = *u.domain;
    std::array<double, 5> x{};
    double s = 0.0;
    for (const BoundaryFace& f : d.boundary_faces) {
        d.node_coords(f.node, x.data());
        const double xdotnu = f.sign * x[f.axis] + d.spacing / 2.0;
        const double dn = u.values[f.node] / d.spacing;
        s += xdotnu * dn * dn;
    }
    return s * std::pow(d.spacing, d.dim - 1);
}

ScalarField abs_power(const ScalarField& u, double p) {
    if (!(p > 0.0)) throw ConfigError("abs_power needs p > 0");
    ScalarField out = make_field(u.domain);
    for (const std::int64_t q : u.domain->interior_nodes) {
        const double a = std::abs(u.values[q]);
        out.values[q] = a < 1e-300 ? 0.0 : std::pow(a, p);
    }
    return out;
}

ScalarField signed_power(const ScalarField& u, double p) {
    if (!(p > 0.0)) throw ConfigError("signed_power needs p > 0");
    ScalarField out = make_field(u.domain);
    for (const std::int64_t q : u.domain->interior_nodes) {
        const double v = u.values[q];
        const double a = std::abs(v);
        out.values[q] = a < 1e-300 ? 0.0 : std::copysign(std::pow(a, p), v);
    }
    return out;
}

ScalarField apply_neg_laplacian(const ScalarField& u) {
    const GridDomain& d = *u.domain;
    ScalarField out = make_field(u.domain);
    const double inv_h2 = 1.0 / (d.spacing * d.spacing);
    for (const std::int64_t q : d.interior_nodes) {
        double acc = 2.0 * d.dim * u.values[q];
        for (int a = 0; a < d.dim; ++a) {
            acc -= u.values[q - d.stride[a]] + u.values[q + d.stride[a]];
        }
        out.values[q] = acc * inv_h2;
    }
    return out;
}

double concentration_radius(const ScalarField& u, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ConfigError("concentration fraction must lie in (0, 1]");
    }
    const GridDomain& d = *u.domain;
    std::vector<double> energy(u.values.size(), 0.0);
    double total = 0.0;
    for (const std::int64_t q : d.interior_nodes) {
        for (int a = 0; a < d.dim; ++a) {
            const std::int64_t up = q + d.stride[a];
            const double du = u.values[up] - u.values[q];
            const double e = du * du;
            total += e;
            if (d.mask[up]) {
                energy[q] += e / 2.0;
                energy[up] += e / 2.0;
            } else {
                energy[q] += e;
            }
            if (!d.mask[q - d.stride[a]]) {
                const double eb = u.values[q] * u.values[q];
                total += eb;
                energy[q] += eb;
            }
        }
    }
    if (total <= 0.0) throw DegenerateInput("concentration_radius of the zero field");

    std::int64_t peak = d.interior_nodes.front();
    double best = -1.0;
    for (const std::int64_t q : d.interior_nodes) {
        if (std::abs(u.values[q]) > best) {
            best = std::abs(u.values[q]);
            peak = q;
        }
    }
    std::array<double, 5> xp{}, x{};
    d.node_coords(peak, xp.data());

    std::vector<std::pair<double, double>> by_dist;  // (distance, node energy)
    by_dist.reserve(d.interior_nodes.size());
    for (const std::int64_t q : d.interior_nodes) {
        d.node_coords(q, x.data());
        double r2 = 0.0;
        for (int a = 0; a < d.dim; ++a) r2 += (x[a] - xp[a]) * (x[a] - xp[a]);
        by_dist.emplace_back(std::sqrt(r2), energy[q]);
    }
    std::sort(by_dist.begin(), by_dist.end());
    double acc = 0.0;
    for (const auto& [r, e] : by_dist) {
        acc += e;
        if (acc >= fraction * total) return r;
    }
    return by_dist.back().first;
}

namespace {

void write_bytes(std::ofstream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& is, void* p, std::size_t n, const std::string& what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
        throw IoError("truncated CHQF file while reading " + what);
    }
}

void require_little_endian() {
    const std::uint32_t probe = 1;
    if (*reinterpret_cast<const std::uint8_t*>(&probe) != 1) {
        throw IoError("CHQF snapshots are little-endian; big-endian hosts unsupported");
    }
}

std::uint8_t shape_code(const std::string& name) {
    if (name == "box") return 0;
    if (name == "ball") return 1;
    return 2;
}

std::string shape_from_code(std::uint8_t c) {
    switch (c) {
        case 0: return "box";
        case 1: return "ball";
        default: return "mask";
    }
}

} // namespace

void save_field(const ScalarField& u, const std::string& path) {
    require_little_endian();
    const GridDomain& d = *u.domain;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path + " for writing");

    write_bytes(os, "CHQF", 4);
    const std::uint32_t version = 1;
    const std::uint32_t dim = static_cast<std::uint32_t>(d.dim);
    write_bytes(os, &version, 4);
    write_bytes(os, &dim, 4);
    for (int a = 0; a < d.dim; ++a) {
        const std::uint32_t n = static_cast<std::uint32_t>(d.points_per_axis);
        write_bytes(os, &n, 4);
    }
    write_bytes(os, &d.half_width, 8);
    write_bytes(os, u.values.data(), u.values.size() * sizeof(double));
    write_bytes(os, d.mask.data(), d.mask.size());
    const std::uint8_t star = d.star_shaped ? 1 : 0;
    write_bytes(os, &star, 1);
    const std::uint8_t code = shape_code(d.shape_name);
    write_bytes(os, &code, 1);
    write_bytes(os, &d.ball_radius, 8);
    if (!os) throw IoError("write failed for " + path);
    os.close();

    nlohmann::json side;
    side["format"] = "chqf";
    side["version"] = 1;
    side["dim"] = d.dim;
    side["points_per_axis"] = d.points_per_axis;
    side["half_width"] = d.half_width;
    side["shape"] = d.shape_name;
    if (d.shape_name == "ball") side["ball_radius"] = d.ball_radius;
    side["star_shaped"] = d.star_shaped;
    side["masked_nodes"] = d.masked_count();
    std::ofstream js(path + ".json", std::ios::trunc);
    if (!js) throw IoError("cannot open " + path + ".json for writing");
    js << side.dump(2) << "\n";
}

ScalarField load_field(const std::string& path) {
    require_little_endian();
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);

    char magic[4];
    read_bytes(is, magic, 4, "magic");
    if (std::memcmp(magic, "CHQF", 4) != 0) throw IoError(path + " is not a CHQF snapshot");
    std::uint32_t version = 0, dim = 0;
    read_bytes(is, &version, 4, "version");
    if (version != 1) throw IoError("unsupported CHQF version " + std::to_string(version));
    read_bytes(is, &dim, 4, "dim");
    if (dim < 3 || dim > 5) throw IoError("CHQF dim out of range");
    std::uint32_t n = 0;
    for (std::uint32_t a = 0; a < dim; ++a) {
        std::uint32_t na = 0;
        read_bytes(is, &na, 4, "extent");
        if (a == 0) {
            n = na;
        } else if (na != n) {
            throw IoError("CHQF grids must be cubic");
        }
    }
    if (n < 8 || n > 4096) throw IoError("CHQF extent out of range");
    double half_width = 0.0;
    read_bytes(is, &half_width, 8, "half_width");
    if (!(half_width > 0.0)) throw IoError("CHQF half_width must be positive");

    auto d = std::make_shared<GridDomain>();
    d->dim = static_cast<int>(dim);
    d->points_per_axis = static_cast<int>(n);
    d->half_width = half_width;
    d->spacing = 2.0 * half_width / (n - 1);
    const std::int64_t total = d->total_nodes();

    std::vector<double> values(total);
    read_bytes(is, values.data(), total * sizeof(double), "values");
    d->mask.assign(total, 0);
    read_bytes(is, d->mask.data(), total, "mask");
    std::uint8_t star = 0, code = 2;
    read_bytes(is, &star, 1, "star flag");
    read_bytes(is, &code, 1, "shape code");
    read_bytes(is, &d->ball_radius, 8, "ball radius");
    d->star_shaped = star != 0;
    d->shape_name = shape_from_code(code);

    try {
        finalize_domain(*d);
    } catch (const Error& e) {
        throw IoError("corrupt CHQF mask in " + path + ": " + e.what());
    }

    ScalarField u;
    u.domain = std::move(d);
    u.values = std::move(values);
    mask_project(u);
    return u;
}

} // namespace choquard
