#pragma once

#include <cstdint>
#include <memory>

#include "choquard/field.hpp"

namespace choquard {

/// Precomputed machinery for convolving grid functions with the kernel
/// |x|^{-mu}: zero-padded FFT buffers and the kernel spectrum.
///
/// The plan is keyed on grid geometry (dim, extent, half_width) only, so a
/// field living on any mask over the same grid can be convolved with it.
/// The kernel's singular cell at offset zero carries the exact mean of
/// |z|^{-mu} over the volume-equivalent ball of one grid cell:
///   dim/(dim - mu) * r_eff^{-mu},  r_eff = h * V_dim^{-1/dim}.
///
/// Plans are immutable after construction and safe to share across
/// threads; apply() uses per-call scratch buffers.
class RieszPlan {
  public:
    RieszPlan(RieszPlan&&) noexcept;
    RieszPlan& operator=(RieszPlan&&) noexcept;
    RieszPlan(const RieszPlan&) = delete;
    RieszPlan& operator=(const RieszPlan&) = delete;
    ~RieszPlan();

    const DomainPtr& domain() const { return domain_; }
    double mu() const { return mu_; }
    int padded_extent() const { return padded_extent_; }
    double self_cell_value() const { return self_cell_value_; }

  private:
    RieszPlan();
    friend RieszPlan make_riesz_plan(DomainPtr, double, std::int64_t);
    friend ScalarField apply(const RieszPlan&, const ScalarField&);

    DomainPtr domain_;
    double mu_ = 0.0;
    int padded_extent_ = 0;
    double self_cell_value_ = 0.0;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Default cap on the padded FFT volume (number of real samples).
inline constexpr std::int64_t kDefaultPaddedCap = std::int64_t{1} << 27;

/// Builds a convolution plan. The padded extent is the smallest power of
/// two at or above 2n - 1 per axis; exceeding `padded_cap` total samples
/// throws ResourceError.
RieszPlan make_riesz_plan(DomainPtr domain, double mu,
                          std::int64_t padded_cap = kDefaultPaddedCap);

/// (K * f)(x) = h^dim sum_y |x - y|^{-mu} f(y), evaluated by padded FFT,
/// returned on f's domain with its mask applied. Throws DimensionError if
/// f's grid geometry differs from the plan's.
ScalarField apply(const RieszPlan& plan, const ScalarField& f);

/// Reference evaluation by direct double summation with the same
/// self-cell rule. Quadratic cost; more than `node_cap` masked nodes is a
/// ResourceError.
ScalarField apply_direct(const ScalarField& f, double mu,
                         std::int64_t node_cap = 20000);

/// Symmetric double integral  h^{2 dim} sum_{x,y} p(x) |x-y|^{-mu} q(y).
/// Both fields must share a domain compatible with the plan.
double double_integral(const RieszPlan& plan, const ScalarField& p, const ScalarField& q);

} // namespace choquard
