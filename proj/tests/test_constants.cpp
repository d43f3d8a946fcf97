#include <doctest.h>

#include <cmath>

#include "choquard/constants.hpp"

using namespace choquard;

// Reference values computed independently with 40-digit arithmetic from the
// Gamma-function closed forms.

TEST_CASE("sharp convolution constant matches high-precision references") {
    CHECK(hls_sharp_constant(3, 1.0) == doctest::Approx(2.294010703541599).epsilon(1e-13));
    CHECK(hls_sharp_constant(3, 2.0) == doctest::Approx(7.30387211937510916).epsilon(1e-13));
    CHECK(hls_sharp_constant(4, 1.0) == doctest::Approx(1.81199546500932835).epsilon(1e-13));
    CHECK(hls_sharp_constant(4, 2.0) == doctest::Approx(3.84764949048559229).epsilon(1e-13));
    CHECK(hls_sharp_constant(5, 2.0) == doctest::Approx(2.63322875022327716).epsilon(1e-13));
    CHECK(hls_sharp_constant(5, 4.0) == doctest::Approx(15.6012607147554948).epsilon(1e-13));
}

TEST_CASE("best Sobolev constant: closed form values") {
    CHECK(best_sobolev_constant(3) == doctest::Approx(5.47790408953133187).epsilon(1e-13));
    CHECK(best_sobolev_constant(4) == doctest::Approx(10.2603986412949128).epsilon(1e-13));
    CHECK(best_sobolev_constant(5) == doctest::Approx(14.811911720005934).epsilon(1e-13));
}

TEST_CASE("best Sobolev constant: quadrature route agrees with closed form") {
    for (int dim = 3; dim <= 5; ++dim) {
        const double closed = best_sobolev_constant(dim);
        const double quad = best_sobolev_constant_quadrature(dim, 512);
        CHECK(std::abs(quad - closed) / closed < 1e-10);
    }
}

TEST_CASE("nonlocal best constant and threshold level") {
    CHECK(best_nonlocal_constant(3, 1.0) == doctest::Approx(4.63975807314754599).epsilon(1e-13));
    CHECK(best_nonlocal_constant(3, 2.0) == doctest::Approx(3.33216220361877469).epsilon(1e-13));
    CHECK(best_nonlocal_constant(4, 2.0) == doctest::Approx(6.54785520418287409).epsilon(1e-13));
    CHECK(threshold_level(3, 1.0) == doctest::Approx(2.72382474804681728).epsilon(1e-13));
    CHECK(threshold_level(3, 2.0) == doctest::Approx(1.8663773112462705).epsilon(1e-13));
    CHECK(threshold_level(4, 2.0) == doctest::Approx(5.58505360638185465).epsilon(1e-13));
}

TEST_CASE("dim 5, mu 4 collapses to exact rationals") {
    // S / C^{3/6} with the Gamma factors cancelling: S_HL = 15/4.
    CHECK(best_nonlocal_constant(5, 4.0) == doctest::Approx(3.75).epsilon(1e-14));
    // (3/12) * (15/4)^2 = 225/64.
    CHECK(threshold_level(5, 4.0) == doctest::Approx(3.515625).epsilon(1e-14));
}

TEST_CASE("bundle fields are mutually consistent") {
    for (const auto& [dim, mu] : {std::pair{3, 1.0}, {3, 2.5}, {4, 2.0}, {5, 4.0}}) {
        const SharpConstants c = make_sharp_constants(dim, mu);
        const double n = dim;
        CHECK(c.sobolev_exp == doctest::Approx(2.0 * n / (n - 2.0)));
        CHECK(c.upper_crit == doctest::Approx((2.0 * n - mu) / (n - 2.0)));
        CHECK(c.lower_crit == doctest::Approx((2.0 * n - mu) / n));
        CHECK(c.lower_crit < 2.0);
        // mu = 4 puts the upper exponent exactly at 2 (dim 5 only).
        CHECK(c.upper_crit >= 2.0);
        CHECK(c.upper_crit <= c.sobolev_exp);
        CHECK(c.hls_const == doctest::Approx(hls_sharp_constant(dim, mu)));
        CHECK(c.nonlocal_S_HL ==
              doctest::Approx(c.sobolev_S / std::pow(c.hls_const, (n - 2.0) / (2.0 * n - mu))));
        CHECK(c.ps_threshold == doctest::Approx(threshold_level(c)));
        // The exponent pairing that makes the nonlocal term scale critically.
        CHECK((2.0 * n - mu) / (2.0 * c.upper_crit) == doctest::Approx((n - 2.0) / 2.0));
    }
}

TEST_CASE("upper critical exponent decreases in mu") {
    double prev = 1e9;
    for (double mu = 0.5; mu < 3.0; mu += 0.5) {
        const SharpConstants c = make_sharp_constants(3, mu);
        CHECK(c.upper_crit < prev);
        prev = c.upper_crit;
    }
}

TEST_CASE("extremal profile values") {
    // U(0) = [N(N-2)]^{(N-2)/4}; for N = 3 this is 3^{1/4}.
    CHECK(extremal_value(3, 0.0) == doctest::Approx(1.31607401295249246).epsilon(1e-14));
    CHECK(extremal_value(3, 1.0) == doctest::Approx(1.31607401295249246 / std::sqrt(2.0)).epsilon(1e-14));
    // Family at a = 0, b = 1 reproduces the base profile.
    for (double r : {0.0, 0.7, 2.5}) {
        CHECK(extremal_family_value(4, 1.0, r) == doctest::Approx(extremal_value(4, r)).epsilon(1e-14));
    }
    // Decreasing in |x - a| and in 1/b near the core.
    CHECK(extremal_family_value(3, 0.5, 1.0) < extremal_family_value(3, 0.5, 0.5));
}

TEST_CASE("whole-space Dirichlet energy of the extremal is S^{N/2}") {
    CHECK(extremal_grad_integral(3) == doctest::Approx(12.8209922049691268).epsilon(1e-13));
    CHECK(extremal_grad_integral(4) == doctest::Approx(105.275780278286492).epsilon(1e-13));
    CHECK(extremal_grad_integral(5) == doctest::Approx(844.36026476273856).epsilon(1e-13));
}

TEST_CASE("normalized profile prefactor hits the quotient-normalized energy") {
    CHECK(scaled_extremal_prefactor(3, 1.0) == doctest::Approx(0.728783895275957959).epsilon(1e-13));
    CHECK(scaled_extremal_prefactor(4, 2.0) == doctest::Approx(0.398942280401432678).epsilon(1e-13));
    // pref^2 * S^{N/2} = S_HL^{(2N-mu)/(N-mu+2)}.
    const double lhs3 = std::pow(scaled_extremal_prefactor(3, 1.0), 2.0) * extremal_grad_integral(3);
    CHECK(lhs3 == doctest::Approx(6.80956187011704321).epsilon(1e-12));
    const double s_hl = best_nonlocal_constant(3, 1.0);
    CHECK(lhs3 == doctest::Approx(std::pow(s_hl, 5.0 / 4.0)).epsilon(1e-12));
    const double lhs4 = std::pow(scaled_extremal_prefactor(4, 2.0), 2.0) * extremal_grad_integral(4);
    CHECK(lhs4 == doctest::Approx(std::pow(best_nonlocal_constant(4, 2.0), 6.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("sphere area and ball volume") {
    CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * 3.14159265358979323846).epsilon(1e-14));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 / 3.0 * 3.14159265358979323846).epsilon(1e-14));
    for (int dim = 3; dim <= 5; ++dim) {
        CHECK(unit_sphere_area(dim) == doctest::Approx(dim * unit_ball_volume(dim)).epsilon(1e-14));
    }
}

TEST_CASE("gauss_legendre basics") {
    std::vector<double> x, w;
    gauss_legendre(16, x, w);
    double sum = 0.0, quartic = 0.0;
    for (int i = 0; i < 16; ++i) {
        sum += w[i];
        quartic += w[i] * std::pow(x[i], 4);
    }
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(quartic == doctest::Approx(0.4).epsilon(1e-13));
    CHECK_THROWS_AS(gauss_legendre(1, x, w), ConfigError);
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(hls_sharp_constant(2, 1.0), DimensionError);
    CHECK_THROWS_AS(hls_sharp_constant(6, 1.0), DimensionError);
    CHECK_THROWS_AS(hls_sharp_constant(3, 0.0), DomainError);
    CHECK_THROWS_AS(hls_sharp_constant(3, 3.0), DomainError);
    CHECK_THROWS_AS(hls_sharp_constant(3, -1.0), DomainError);
    CHECK_THROWS_AS(make_sharp_constants(4, 4.5), DomainError);
    CHECK_THROWS_AS(extremal_family_value(3, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(extremal_family_value(3, -2.0, 1.0), DomainError);
    CHECK_THROWS_AS(best_sobolev_constant_quadrature(3, 8), ConfigError);
}
