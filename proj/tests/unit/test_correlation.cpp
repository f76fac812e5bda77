#include <doctest.h>

#include <sbsim/correlation.hpp>
#include <sbsim/errors.hpp>
#include <sbsim/units.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

using namespace sbsim;
using namespace sbsim::correlation;

namespace {

constexpr double kHbarBeta = 5.91e-6;

BathParams paper_bath() {
    BathParams p;
    p.omega_m = hz(100e3);
    p.kappa = hz(1.25e3);
    p.lambda = hz(100e3);
    p.hbar_beta = kHbarBeta;
    p.n_matsubara = 10000;
    return p;
}

spectral::LorentzianComponent as_component(const BathParams& p) {
    return spectral::make_lorentzian(p.lambda, p.kappa, p.omega_m);
}

}  // namespace

TEST_CASE("temperature conversions") {
    CHECK(nbar_to_hbar_beta(0.025, hz(100e3)) == doctest::Approx(5.91e-6).epsilon(5e-4));
    CHECK(nbar_to_hbar_beta(1.0 / (std::exp(1.0) - 1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(nbar_to_hbar_beta(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(nbar_to_hbar_beta(0.1, 0.0), std::invalid_argument);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logn(std::log(1e-3), std::log(10.0));
    for (int i = 0; i < 20; ++i) {
        const double nbar = std::exp(logn(rng));
        const double w = hz(100e3);
        CHECK(hbar_beta_to_nbar(nbar_to_hbar_beta(nbar, w), w) == doctest::Approx(nbar).epsilon(1e-12));
    }
    CHECK(thermal_coth(kHbarBeta, hz(100e3)) == doctest::Approx(1.05).epsilon(1e-3));
    CHECK(matsubara_frequency(3, 2.0) == doctest::Approx(3.0 * std::numbers::pi));
}

TEST_CASE("bath validation") {
    BathParams p = paper_bath();
    CHECK_NOTHROW(p.validate());
    p.kappa = p.omega_m;
    CHECK_THROWS_AS(l_ohmic(p, 0.0), std::invalid_argument);
    p = paper_bath();
    p.n_matsubara = 0;
    CHECK_THROWS_AS(l_ohmic(p, 0.0), std::invalid_argument);
    p = paper_bath();
    p.hbar_beta = 0.0;
    CHECK_THROWS_AS(l_lindblad(p, 0.0), std::invalid_argument);
}

TEST_CASE("ohmic correlation at t = 0") {
    const auto p = paper_bath();
    const auto l0 = l_ohmic(p, 0.0);
    CHECK(l0.imag == 0.0);
    const double l2 = p.lambda * p.lambda;
    const double coth = thermal_coth(p.hbar_beta, p.omega_m);
    CHECK(l0.real / l2 > coth * 0.99);
    CHECK(l_ohmic_matsubara(p, 0.0) < 0.0);
    // the Matsubara part is a small short-time correction
    CHECK(std::abs(l_ohmic_matsubara(p, 0.0)) < 0.01 * l2);
}

TEST_CASE("parity in time") {
    const auto p = paper_bath();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 20.0 / p.omega_m);
    for (int i = 0; i < 20; ++i) {
        const double t = u(rng);
        const auto a = l_ohmic(p, t);
        const auto b = l_ohmic(p, -t);
        CHECK(a.real == b.real);
        CHECK(a.imag == -b.imag);
        const auto c = l_lindblad(p, t);
        const auto d = l_lindblad(p, -t);
        CHECK(c.real == d.real);
        CHECK(c.imag == -d.imag);
    }
}

TEST_CASE("undamped limit of the ohmic correlation") {
    BathParams p = paper_bath();
    p.kappa = 1e-6 * p.omega_m;
    const double l2 = p.lambda * p.lambda;
    const double coth = thermal_coth(p.hbar_beta, p.omega_m);
    for (int i = 0; i <= 100; ++i) {
        const double t = 10.0 / p.omega_m * i / 100.0;
        const double expect = l2 * coth * std::cos(p.omega_m * t);
        CHECK(std::abs(l_ohmic(p, t).real - expect) <= 1e-3 * l2 * coth);
    }
}

TEST_CASE("lindblad correlation closed form") {
    const auto p = paper_bath();
    const double l2 = p.lambda * p.lambda;
    const double nbar = hbar_beta_to_nbar(p.hbar_beta, p.omega_m);
    const auto l0 = l_lindblad(p, 0.0);
    CHECK(l0.real == doctest::Approx(l2 * (2.0 * nbar + 1.0)).epsilon(1e-14));
    CHECK(l0.imag == 0.0);

    const double t = 1.0 / p.kappa;
    const double expect = l2 * thermal_coth(p.hbar_beta, p.omega_m) * std::cos(p.omega_m / p.kappa) * std::exp(-1.0);
    CHECK(l_lindblad(p, t).real == doctest::Approx(expect).epsilon(1e-12));
    CHECK(l_lindblad(p, t).real == doctest::Approx(l2 * 1.05 * std::cos(p.omega_m / p.kappa) * std::exp(-1.0)).epsilon(2e-3));
}

TEST_CASE("imaginary parts coincide") {
    const auto p = paper_bath();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-50.0 / p.omega_m, 50.0 / p.omega_m);
    for (int i = 0; i < 50; ++i) {
        const double t = u(rng);
        // the two evaluations may differ in the last bit through sin/cos fusion
        CHECK(std::abs(l_ohmic(p, t).imag - l_lindblad(p, t).imag) <= 1e-15 * p.lambda * p.lambda);
    }
}

TEST_CASE("quadrature: zero density") {
    const spectral::CompositeSpectralDensity empty;
    const auto l = l_from_spectral_density(empty, kHbarBeta, 1e-5);
    CHECK(l.real == 0.0);
    CHECK(l.imag == 0.0);
}

TEST_CASE("quadrature reproduces the closed forms") {
    const auto p = paper_bath();
    const spectral::CompositeSpectralDensity j{{as_component(p)}};
    const double l2 = p.lambda * p.lambda;
    for (double s : {0.2, 1.0, 5.0}) {
        const double t = s / p.omega_m;
        const auto q = l_from_spectral_density(j, p.hbar_beta, t);
        const double closed = l_ohmic(p, t).imag;
        CHECK(q.imag == doctest::Approx(closed).epsilon(1e-4));
        CHECK(std::abs(q.real - l_ohmic(p, t).real) <= 1e-4 * l2);
    }
    // t = 0: the real part is the thermal-weighted total weight
    const auto q0 = l_from_spectral_density(j, p.hbar_beta, 0.0);
    CHECK(std::abs(q0.real - l_ohmic(p, 0.0).real) <= 1e-4 * l2);
    CHECK(q0.imag == 0.0);
}

TEST_CASE("regression-theorem integrand Fourier-pairs with the lindblad form") {
    const auto p = paper_bath();
    const auto integrand = regression_integrand(as_component(p), p.hbar_beta);
    const double l2 = p.lambda * p.lambda;
    for (double s : {0.0, 0.3, 2.0, 7.0}) {
        const double t = s / p.omega_m;
        const auto q = l_from_spectral_density(integrand, p.hbar_beta, t);
        const auto closed = l_lindblad(p, t);
        CHECK(std::abs(q.real - closed.real) <= 1e-4 * l2);
        CHECK(std::abs(q.imag - closed.imag) <= 1e-4 * l2);
    }
}

TEST_CASE("quadrature on a target") {
    const spectral::TargetSpectralDensity flat{spectral::FlatBandTarget{2.0, 1.0, 3.0}};
    // (1/π)∫₁³ 2 sin(ωt) dω = (2/π)(cos t − cos 3t)/t
    const double t = 0.7;
    const auto q = l_from_spectral_density(flat, 1.0, t);
    CHECK(q.imag == doctest::Approx(-(2.0 / std::numbers::pi) * (std::cos(t) - std::cos(3.0 * t)) / t).epsilon(1e-7));
}

TEST_CASE("quadrature failure is reported") {
    const auto p = paper_bath();
    const spectral::CompositeSpectralDensity j{{as_component(p)}};
    QuadratureConfig cfg;
    cfg.rel_tolerance = 1e-300;
    cfg.max_depth = 1;
    CHECK_THROWS_AS(l_from_spectral_density(j, p.hbar_beta, 1.0 / p.omega_m, cfg), QuadratureError);
}

TEST_CASE("distance d against direct time integration") {
    // Moderate parameters keep the oscillatory integral cheap.
    BathParams p;
    p.omega_m = 1.0;
    p.kappa = 0.15;
    p.hbar_beta = 1.5;
    p.lambda = 1.0;
    p.n_matsubara = 400;
    auto diff = [&](double t) { return l_ohmic(p, t).real - l_lindblad(p, t).real; };
    using boost::math::quadrature::gauss_kronrod;
    double integral = 0.0;
    const double edges[] = {0.0, 1e-3, 1e-2, 0.1, 1.0};
    for (int i = 0; i + 1 < 5; ++i) integral += gauss_kronrod<double, 61>::integrate(diff, edges[i], edges[i + 1], 15, 1e-11);
    for (double a = 1.0; a < 220.0; a += 2.0) integral += gauss_kronrod<double, 61>::integrate(diff, a, a + 2.0, 3, 1e-11);
    CHECK(distance_d(p) == doctest::Approx(std::abs(integral)).epsilon(1e-6));
}

TEST_CASE("distance d limits and trends") {
    BathParams p = paper_bath();
    p.kappa = 1e-9 * p.omega_m;
    CHECK(distance_d(p) < 1e-9 / p.omega_m);

    p = paper_bath();
    double previous = 0.0;
    for (double k : {0.5e3, 1e3, 2e3, 4e3, 8e3}) {
        p.kappa = hz(k);
        const double d = distance_d(p);
        CHECK(d > previous);
        previous = d;
    }
}

TEST_CASE("Matsubara truncation converges") {
    BathParams p = paper_bath();
    p.n_matsubara = 1000;
    const double coarse = l_ohmic_matsubara(p, 0.0);
    p.n_matsubara = 100000;
    const double fine = l_ohmic_matsubara(p, 0.0);
    p.n_matsubara = 10000;
    const double mid = l_ohmic_matsubara(p, 0.0);
    CHECK(std::abs(mid - fine) < std::abs(coarse - fine));
    CHECK(std::abs(mid - fine) < 1e-3 * std::abs(fine));
    CHECK(kappa_over_nu1(p.kappa, p.hbar_beta) == doctest::Approx(p.kappa * p.hbar_beta / (2.0 * std::numbers::pi)));
}
