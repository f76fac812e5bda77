#include <doctest.h>

#include <sbsim/correlation.hpp>
#include <sbsim/spectral.hpp>
#include <sbsim/units.hpp>

#include <cmath>
#include <fstream>
#include <random>

using namespace sbsim;
using namespace sbsim::spectral;

namespace {

const LorentzianComponent kPaper{hz(100e3), hz(1.25e3), hz(100e3)};
constexpr double kHbarBeta = 5.91e-6;

// J̃ written with coth directly, independent of the tanh-ratio implementation.
double j_tilde_oracle(const LorentzianComponent& c, double hb, double w) {
    const double a = c.kappa / (c.kappa * c.kappa + (w - c.omega_m) * (w - c.omega_m));
    const double b = c.kappa / (c.kappa * c.kappa + (w + c.omega_m) * (w + c.omega_m));
    const double coth_m = std::cosh(0.5 * hb * c.omega_m) / std::sinh(0.5 * hb * c.omega_m);
    const double coth_w = std::cosh(0.5 * hb * w) / std::sinh(0.5 * hb * w);
    return c.lambda * c.lambda * coth_m / coth_w * (a + b);
}

}  // namespace

TEST_CASE("component validation") {
    CHECK_NOTHROW(make_lorentzian(1.0, 0.1, 1.0));
    CHECK_THROWS_AS(make_lorentzian(1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_lorentzian(1.0, 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_lorentzian(-1.0, 0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_lorentzian(1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_lorentzian(1.0, 0.1, NAN), std::invalid_argument);
    CHECK(kPaper.free_frequency() == doctest::Approx(std::hypot(hz(100e3), hz(1.25e3))));
}

TEST_CASE("lorentzian values") {
    CHECK(eval_lorentzian(kPaper, 0.0) == 0.0);
    const double l2 = kPaper.lambda * kPaper.lambda;
    const double k = kPaper.kappa;
    const double expected = l2 * (1.0 / k - k / (k * k + 4.0 * kPaper.omega_m * kPaper.omega_m));
    CHECK(eval_lorentzian(kPaper, kPaper.omega_m) == doctest::Approx(expected).epsilon(1e-14));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, hz(400e3));
    for (int i = 0; i < 20; ++i) {
        const double w = u(rng);
        CHECK(eval_lorentzian(kPaper, -w) == -eval_lorentzian(kPaper, w));
        CHECK(eval_lorentzian(kPaper, w) >= 0.0);
    }
}

TEST_CASE("ohmic slope at small frequency") {
    const double slope = ohmic_slope(kPaper);
    for (double f : {1e-2, 1e-3, 1e-4}) {
        const double w = f * kPaper.omega_m;
        CHECK(eval_lorentzian(kPaper, w) / w == doctest::Approx(slope).epsilon(0.01));
    }
    const double h = 1e-6 * kPaper.omega_m;
    const double fd = (eval_lorentzian(kPaper, h) - eval_lorentzian(kPaper, -h)) / (2.0 * h);
    CHECK(fd == doctest::Approx(slope).epsilon(1e-6));
}

TEST_CASE("composite is the sum of its components") {
    CompositeSpectralDensity empty;
    CHECK(eval_composite(empty, 3.0) == 0.0);
    const CompositeSpectralDensity one{{kPaper}};
    const CompositeSpectralDensity two{{kPaper, kPaper}};
    for (double w : {hz(10e3), hz(99e3), hz(250e3)}) {
        CHECK(one(w) == eval_lorentzian(kPaper, w));
        CHECK(two(w) == 2.0 * one(w));
    }
    CHECK(two(0.0) == 0.0);
}

TEST_CASE("regression-theorem spectral density") {
    CHECK(eval_regression_sd(kPaper, kHbarBeta, 0.0) == 0.0);
    CHECK(eval_regression_sd(kPaper, kHbarBeta, 1e-9) >= 0.0);
    CHECK(eval_regression_sd(kPaper, kHbarBeta, 1e-9) < 1e-3 * eval_regression_sd(kPaper, kHbarBeta, kPaper.omega_m));
    CHECK_THROWS_AS(eval_regression_sd(kPaper, 0.0, 1.0), std::invalid_argument);

    const double k = kPaper.kappa;
    const double l2 = kPaper.lambda * kPaper.lambda;
    const double at_peak = l2 * (1.0 / k + k / (k * k + 4.0 * kPaper.omega_m * kPaper.omega_m));
    CHECK(eval_regression_sd(kPaper, kHbarBeta, kPaper.omega_m) == doctest::Approx(at_peak).epsilon(1e-13));

    for (double f : {1e3, 5e3, 50e3, 100e3, 150e3, 300e3}) {
        const double w = hz(f);
        CHECK(eval_regression_sd(kPaper, kHbarBeta, w) ==
              doctest::Approx(j_tilde_oracle(kPaper, kHbarBeta, w)).epsilon(1e-12));
    }
}

TEST_CASE("relative error epsilon_J") {
    CHECK_FALSE(relative_error_epsilon_j(kPaper, kHbarBeta, 0.0).has_value());

    // n̄ → 0: the coth ratio is 1 at ω_m and ε_J → 2B/(A−B).
    const double a = 1.0 / kPaper.kappa;
    const double b = kPaper.kappa / (kPaper.kappa * kPaper.kappa + 4.0 * kPaper.omega_m * kPaper.omega_m);
    const auto cold = relative_error_epsilon_j(kPaper, 1.0, kPaper.omega_m);
    REQUIRE(cold.has_value());
    CHECK(*cold == doctest::Approx(2.0 * b / (a - b)).epsilon(1e-10));

    double previous = 0.0;
    for (int i = 1; i <= 150; ++i) {
        const auto e = relative_error_epsilon_j(kPaper, kHbarBeta, hz(1e3 * i));
        REQUIRE(e.has_value());
        CHECK(*e >= 0.0);
        if (i > 110) CHECK(*e > previous);  // rising toward the high-frequency end
        previous = *e;
    }
}

TEST_CASE("epsilon_J golden value at 150 kHz") {
    std::ifstream in(std::string(SBSIM_TEST_DATA_DIR) + "/epsilon_j_150khz.txt");
    REQUIRE(in.good());
    double golden = 0.0;
    in >> golden;
    const auto e = relative_error_epsilon_j(kPaper, kHbarBeta, hz(150e3));
    REQUIRE(e.has_value());
    CHECK(*e == doctest::Approx(golden).epsilon(1e-12));
    CHECK(std::isfinite(*e));
    CHECK(*e < 0.5);
}

TEST_CASE("target families") {
    const TargetSpectralDensity flat{FlatBandTarget{2.0, 1.0, 3.0}};
    CHECK(flat(0.5) == 0.0);
    CHECK(flat(2.0) == 2.0);
    CHECK(flat(3.5) == 0.0);
    CHECK(flat.finite_support());
    CHECK(flat.support_hint() == 3.0);

    const TargetSpectralDensity tab{TabulatedTarget{{1.0, 2.0, 4.0}, {0.0, 2.0, 1.0}}};
    CHECK(tab(1.5) == doctest::Approx(1.0));
    CHECK(tab(3.0) == doctest::Approx(1.5));
    CHECK(tab(5.0) == 0.0);

    CHECK_THROWS_AS(TargetSpectralDensity(TabulatedTarget{{1.0, 1.0}, {0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(TargetSpectralDensity(TabulatedTarget{{1.0, 2.0}, {0.0, -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(TargetSpectralDensity(TabulatedTarget{{1.0}, {0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(TargetSpectralDensity(FlatBandTarget{1.0, 2.0, 1.0}), std::invalid_argument);

    const TargetSpectralDensity lor{LorentzianSumTarget{CompositeSpectralDensity{{kPaper}}}};
    CHECK_FALSE(lor.finite_support());
    const auto grid = default_fit_grid(lor);
    CHECK(grid.size() == 2000);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(2.0 * kPaper.omega_m));
}

TEST_CASE("fit: fixed point at the truth") {
    const CompositeSpectralDensity truth{{kPaper}};
    const TargetSpectralDensity target{LorentzianSumTarget{truth}};
    const auto grid = default_fit_grid(target);
    CHECK(fit_objective(target, truth, grid) == 0.0);
    const auto fit = fit_spectral_density(target, 1, grid, {kPaper});
    REQUIRE(fit.density.components.size() == 1);
    const auto& c = fit.density.components[0];
    CHECK(c.lambda == doctest::Approx(kPaper.lambda).epsilon(1e-6));
    CHECK(c.kappa == doctest::Approx(kPaper.kappa).epsilon(1e-6));
    CHECK(c.omega_m == doctest::Approx(kPaper.omega_m).epsilon(1e-6));

    double scale = 0.0;
    for (double w : grid) scale += target(w) * target(w) * (grid[1] - grid[0]);
    CHECK(fit.residual <= 1e-12 * scale);
}

TEST_CASE("fit: two separated Lorentzians round-trip") {
    const CompositeSpectralDensity truth{{
        make_lorentzian(hz(20e3), hz(1e3), hz(50e3)),
        make_lorentzian(hz(30e3), hz(1e3), hz(150e3)),
    }};
    const TargetSpectralDensity target{LorentzianSumTarget{truth}};
    const auto grid = default_fit_grid(target);
    const auto fit = fit_spectral_density(target, 2, grid);
    REQUIRE(fit.converged);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& a = fit.density.components[k];
        const auto& b = truth.components[k];
        CHECK(a.lambda == doctest::Approx(b.lambda).epsilon(1e-3));
        CHECK(a.kappa == doctest::Approx(b.kappa).epsilon(1e-3));
        CHECK(a.omega_m == doctest::Approx(b.omega_m).epsilon(1e-3));
    }
    CHECK(fit.density.components[0].omega_m < fit.density.components[1].omega_m);
}

TEST_CASE("fit: flat band broadens and decreases monotonically") {
    const TargetSpectralDensity target{FlatBandTarget{1.0, hz(40e3), hz(60e3)}};
    const auto grid = default_fit_grid(target);
    const auto fit = fit_spectral_density(target, 1, grid);
    CHECK(fit.residual > 0.0);
    REQUIRE(fit.history.size() >= 2);
    for (std::size_t i = 1; i < fit.history.size(); ++i) CHECK(fit.history[i] <= fit.history[i - 1]);
    const auto& c = fit.density.components[0];
    CHECK(c.kappa > hz(2e3));
    CHECK(c.kappa < c.omega_m);
    CHECK(c.omega_m > hz(40e3));
    CHECK(c.omega_m < hz(60e3));
    CHECK(fit.residual == doctest::Approx(fit_objective(target, fit.density, grid)).epsilon(1e-9));
}

TEST_CASE("fit: deterministic across thread counts") {
    const CompositeSpectralDensity truth{{
        make_lorentzian(hz(20e3), hz(2e3), hz(40e3)),
        make_lorentzian(hz(25e3), hz(4e3), hz(90e3)),
    }};
    const TargetSpectralDensity target{LorentzianSumTarget{truth}};
    const auto grid = default_fit_grid(target, 600);
    FitOptions serial;
    FitOptions parallel;
    parallel.threads = 3;
    const auto a = fit_spectral_density(target, 2, grid, {}, serial);
    const auto b = fit_spectral_density(target, 2, grid, {}, parallel);
    CHECK(a.residual == b.residual);
    CHECK(a.restart == b.restart);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(a.density.components[k].lambda == b.density.components[k].lambda);
        CHECK(a.density.components[k].omega_m == b.density.components[k].omega_m);
    }
}

TEST_CASE("fit: non-convergence carries the best result") {
    const TargetSpectralDensity target{FlatBandTarget{1.0, 1.0, 2.0}};
    const auto grid = default_fit_grid(target, 200);
    FitOptions o;
    o.max_iterations = 0;
    o.restarts = 2;
    try {
        fit_spectral_density(target, 1, grid, {}, o);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(e.best().residual > 0.0);
        CHECK(e.best().density.components.size() == 1);
    }
}

TEST_CASE("fit: argument checks") {
    const TargetSpectralDensity target{FlatBandTarget{1.0, 1.0, 2.0}};
    const auto grid = default_fit_grid(target, 100);
    CHECK_THROWS_AS(fit_spectral_density(target, 0, grid), std::invalid_argument);
    CHECK_THROWS_AS(fit_spectral_density(target, 2, grid, {kPaper}), std::invalid_argument);
    CHECK_THROWS_AS(fit_spectral_density(target, 1, {0.0, 1.0}), std::invalid_argument);
}
