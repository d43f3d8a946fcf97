#include "choquard/riesz.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "choquard/constants.hpp"

namespace choquard {

namespace {

// FFTW planning mutates global state; execution on private buffers does not.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

int next_pow2_at_least(int v) {
    int p = 1;
    while (p < v) p *= 2;
    return p;
}

std::int64_t ipow64(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

struct FftwBuffer {
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    FftwBuffer(std::int64_t nreal, std::int64_t ncplx) {
        real = static_cast<double*>(fftw_malloc(sizeof(double) * nreal));
        cplx = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * ncplx));
        if (!real || !cplx) {
            fftw_free(real);
            fftw_free(cplx);
            throw ResourceError("FFT scratch allocation failed");
        }
    }
    ~FftwBuffer() {
        fftw_free(real);
        fftw_free(cplx);
    }
};

} // namespace

struct RieszPlan::Impl {
    int dim = 0;
    int extent = 0;        // n
    int padded = 0;        // P
    std::int64_t padded_volume = 0;
    std::int64_t spectrum_size = 0;  // P^{dim-1} * (P/2 + 1)
    std::vector<std::complex<double>> kernel_spectrum;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

RieszPlan::RieszPlan() = default;
RieszPlan::~RieszPlan() = default;
RieszPlan::RieszPlan(RieszPlan&&) noexcept = default;
RieszPlan& RieszPlan::operator=(RieszPlan&&) noexcept = default;

RieszPlan make_riesz_plan(DomainPtr domain, double mu, std::int64_t padded_cap) {
    if (!domain) throw DomainError("null domain");
    require_supported_dim(domain->dim);
    require_mu_range(domain->dim, mu);

    const int dim = domain->dim;
    const int n = domain->points_per_axis;
    const double h = domain->spacing;
    const int P = next_pow2_at_least(2 * n - 1);
    const std::int64_t volume = ipow64(P, dim);
    if (volume > padded_cap) {
        throw ResourceError("padded FFT volume " + std::to_string(volume) +
                            " exceeds cap " + std::to_string(padded_cap));
    }

    RieszPlan plan;
    plan.domain_ = std::move(domain);
    plan.mu_ = mu;
    plan.padded_extent_ = P;
    // Exact mean of |z|^{-mu} over the ball with the volume of one cell.
    const double r_eff = h * std::pow(unit_ball_volume(dim), -1.0 / dim);
    plan.self_cell_value_ = dim / (dim - mu) * std::pow(r_eff, -mu);

    auto impl = std::make_unique<RieszPlan::Impl>();
    impl->dim = dim;
    impl->extent = n;
    impl->padded = P;
    impl->padded_volume = volume;
    impl->spectrum_size = ipow64(P, dim - 1) * (P / 2 + 1);

    // Sample the kernel with offsets wrapped onto the padded torus. Offsets
    // beyond n-1 in modulus never pair two in-grid nodes and stay zero.
    FftwBuffer buf(volume, impl->spectrum_size);
    for (std::int64_t id = 0; id < volume; ++id) {
        double r2 = 0.0;
        bool in_range = true;
        std::int64_t rest = id;
        for (int a = dim - 1; a >= 0; --a) {
            const int i = static_cast<int>(rest % P);
            rest /= P;
            const int off = i <= P / 2 ? i : i - P;
            if (off > n - 1 || off < -(n - 1)) {
                in_range = false;
                break;
            }
            r2 += static_cast<double>(off) * off;
        }
        if (!in_range) {
            buf.real[id] = 0.0;
        } else if (r2 == 0.0) {
            buf.real[id] = plan.self_cell_value_;
        } else {
            buf.real[id] = std::pow(h * std::sqrt(r2), -mu);
        }
    }

    std::vector<int> dims(dim, P);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        impl->forward = fftw_plan_dft_r2c(dim, dims.data(), buf.real, buf.cplx, FFTW_ESTIMATE);
        impl->backward = fftw_plan_dft_c2r(dim, dims.data(), buf.cplx, buf.real, FFTW_ESTIMATE);
    }
    if (!impl->forward || !impl->backward) throw ResourceError("FFT planning failed");

    fftw_execute_dft_r2c(impl->forward, buf.real, buf.cplx);
    impl->kernel_spectrum.resize(impl->spectrum_size);
    const auto* spec = reinterpret_cast<const std::complex<double>*>(buf.cplx);
    std::copy(spec, spec + impl->spectrum_size, impl->kernel_spectrum.begin());

    plan.impl_ = std::move(impl);
    return plan;
}

ScalarField apply(const RieszPlan& plan, const ScalarField& f) {
    if (!plan.impl_) throw DomainError("moved-from convolution plan");
    const GridDomain& fd = *f.domain;
    if (!same_geometry(*plan.domain_, fd)) {
        throw DimensionError("field grid does not match the convolution plan");
    }
    const RieszPlan::Impl& im = *plan.impl_;
    const int dim = im.dim;
    const int n = im.extent;
    const int P = im.padded;

    FftwBuffer buf(im.padded_volume, im.spectrum_size);
    std::memset(buf.real, 0, sizeof(double) * im.padded_volume);

    // Copy the n^dim block row by row; rows are contiguous on both sides.
    const std::int64_t rows = ipow64(n, dim - 1);
    std::vector<int> multi(dim, 0);
    for (std::int64_t row = 0; row < rows; ++row) {
        std::int64_t rest = row, dst = 0;
        for (int a = dim - 2; a >= 0; --a) {
            multi[a] = static_cast<int>(rest % n);
            rest /= n;
        }
        for (int a = 0; a < dim - 1; ++a) dst = dst * P + multi[a];
        dst *= P;
        std::memcpy(buf.real + dst, f.values.data() + row * n, sizeof(double) * n);
    }

    fftw_execute_dft_r2c(im.forward, buf.real, buf.cplx);
    const auto* ks = im.kernel_spectrum.data();
    auto* fs = reinterpret_cast<std::complex<double>*>(buf.cplx);
    for (std::int64_t i = 0; i < im.spectrum_size; ++i) fs[i] *= ks[i];
    fftw_execute_dft_c2r(im.backward, buf.cplx, buf.real);

    const double scale = std::pow(fd.spacing, dim) / static_cast<double>(im.padded_volume);
    ScalarField out = make_field(f.domain);
    for (const std::int64_t q : fd.interior_nodes) {
        std::int64_t rest = q, src = 0;
        for (int a = dim - 1; a >= 0; --a) {
            multi[a] = static_cast<int>(rest % n);
            rest /= n;
        }
        for (int a = 0; a < dim; ++a) src = src * P + multi[a];
        out.values[q] = buf.real[src] * scale;
    }
    return out;
}

ScalarField apply_direct(const ScalarField& f, double mu, std::int64_t node_cap) {
    const GridDomain& d = *f.domain;
    require_mu_range(d.dim, mu);
    const std::int64_t m = d.masked_count();
    if (m > node_cap) {
        throw ResourceError("direct convolution over " + std::to_string(m) +
                            " nodes exceeds cap " + std::to_string(node_cap));
    }
    const int dim = d.dim;
    const int n = d.points_per_axis;
    const double h = d.spacing;
    const double r_eff = h * std::pow(unit_ball_volume(dim), -1.0 / dim);
    const double self_val = dim / (dim - mu) * std::pow(r_eff, -mu);

    // Kernel table over the (2n-1)^dim offset cube.
    const int w = 2 * n - 1;
    std::vector<double> table(ipow64(w, dim));
    for (std::int64_t id = 0; id < static_cast<std::int64_t>(table.size()); ++id) {
        std::int64_t rest = id;
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            const int off = static_cast<int>(rest % w) - (n - 1);
            rest /= w;
            r2 += static_cast<double>(off) * off;
        }
        table[id] = r2 == 0.0 ? self_val : std::pow(h * std::sqrt(r2), -mu);
    }

    std::vector<std::array<int, 5>> coords(m);
    for (std::int64_t i = 0; i < m; ++i) {
        std::int64_t rest = d.interior_nodes[i];
        for (int a = dim - 1; a >= 0; --a) {
            coords[i][a] = static_cast<int>(rest % n);
            rest /= n;
        }
    }

    ScalarField out = make_field(f.domain);
    const double scale = std::pow(h, dim);
    for (std::int64_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::int64_t k = 0; k < m; ++k) {
            std::int64_t t = 0;
            for (int a = 0; a < dim; ++a) {
                t = t * w + (coords[i][a] - coords[k][a] + (n - 1));
            }
            acc += table[t] * f.values[d.interior_nodes[k]];
        }
        out.values[d.interior_nodes[i]] = acc * scale;
    }
    return out;
}

double double_integral(const RieszPlan& plan, const ScalarField& p, const ScalarField& q) {
    require_same_domain(p, q);
    ScalarField kq = apply(plan, q);
    return inner_l2(p, kq);
}

} // namespace choquard
