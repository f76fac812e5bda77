// Closed-form and quadrature reservoir correlation functions

#include "sbsim/correlation.hpp"

#include "sbsim/errors.hpp"
#include "sbsim/units.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sbsim::correlation {

void BathParams::validate() const {
    if (!(omega_m > 0.0)) throw std::invalid_argument("BathParams: omega_m must be > 0");
    if (!(kappa >= 0.0)) throw std::invalid_argument("BathParams: kappa must be >= 0");
    if (!(kappa < omega_m)) throw std::invalid_argument("BathParams: underdamped regime requires kappa < omega_m");
    if (!(hbar_beta > 0.0)) throw std::invalid_argument("BathParams: hbar_beta must be > 0");
    if (n_matsubara < 1) throw std::invalid_argument("BathParams: n_matsubara must be >= 1");
}

double nbar_to_hbar_beta(double nbar, double omega) {
    if (!(nbar > 0.0)) throw std::invalid_argument("nbar_to_hbar_beta: nbar must be > 0 (nbar = 0 is infinite beta)");
    if (!(omega > 0.0)) throw std::invalid_argument("nbar_to_hbar_beta: omega must be > 0");
    return std::log1p(1.0 / nbar) / omega;
}

double hbar_beta_to_nbar(double hbar_beta, double omega) {
    if (!(hbar_beta > 0.0) || !(omega > 0.0)) {
        throw std::invalid_argument("hbar_beta_to_nbar: hbar_beta and omega must be > 0");
    }
    return 1.0 / std::expm1(hbar_beta * omega);
}

double matsubara_frequency(std::size_t n, double hbar_beta) {
    return two_pi * static_cast<double>(n) / hbar_beta;
}

double kappa_over_nu1(double kappa, double hbar_beta) noexcept {
    return kappa * hbar_beta / two_pi;
}

double thermal_coth(double hbar_beta, double omega) noexcept {
    return 1.0 / std::tanh(0.5 * hbar_beta * omega);
}

namespace {

// sinh(x)/(cosh(x) - cos(y)) and sin(y)/(cosh(x) - cos(y)), written in e^{-x}
// so that large ħβω_m does not overflow.
struct ThermalCoefficients {
    double cosine;
    double sine;
};

ThermalCoefficients thermal_coefficients(const BathParams& p) {
    const double x = p.hbar_beta * p.omega_m;
    const double y = p.hbar_beta * p.kappa;
    const double e1 = std::exp(-x);
    const double e2 = e1 * e1;
    const double den = 1.0 + e2 - 2.0 * std::cos(y) * e1;
    return {(1.0 - e2) / den, 2.0 * std::sin(y) * e1 / den};
}

// Σ_{n=1}^{N} term(n), summed from the small tail upwards.
template <typename Term>
double reverse_sum(std::size_t n_terms, Term term) {
    double s = 0.0;
    double c = 0.0;  // Kahan compensation
    for (std::size_t n = n_terms; n >= 1; --n) {
        const double y = term(n) - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

// L''(t) is the same for both environments.
double l_imaginary(const BathParams& p, double t) {
    return -p.lambda * p.lambda * std::sin(p.omega_m * t) * std::exp(-p.kappa * std::abs(t));
}

}  // namespace

double l_ohmic_principal(const BathParams& p, double t) {
    const auto tc = thermal_coefficients(p);
    const double at = std::abs(t);
    return p.lambda * p.lambda *
           (tc.cosine * std::cos(p.omega_m * t) + tc.sine * std::sin(p.omega_m * at)) *
           std::exp(-p.kappa * at);
}

double l_ohmic_matsubara(const BathParams& p, double t) {
    const double at = std::abs(t);
    const double omega_sq = p.free_frequency_sq();
    const double k2 = p.kappa * p.kappa;
    const double sum = reverse_sum(p.n_matsubara, [&](std::size_t n) {
        const double nu = matsubara_frequency(n, p.hbar_beta);
        const double a = omega_sq + nu * nu;
        return nu * std::exp(-nu * at) / (a * a - 4.0 * k2 * nu * nu);
    });
    return -p.lambda * p.lambda * 8.0 * p.kappa * p.omega_m / p.hbar_beta * sum;
}

ComplexCorrelation l_ohmic(const BathParams& p, double t) {
    p.validate();
    ComplexCorrelation out;
    out.real = l_ohmic_principal(p, t) + l_ohmic_matsubara(p, t);
    out.imag = l_imaginary(p, t);
    return out;
}

ComplexCorrelation l_lindblad(const BathParams& p, double t) {
    p.validate();
    const double decay = std::exp(-p.kappa * std::abs(t));
    ComplexCorrelation out;
    out.real = p.lambda * p.lambda * thermal_coth(p.hbar_beta, p.omega_m) *
               std::cos(p.omega_m * t) * decay;
    out.imag = l_imaginary(p, t);
    return out;
}

double distance_d(const BathParams& p) {
    p.validate();
    const auto tc = thermal_coefficients(p);
    const double c_q = tc.cosine - thermal_coth(p.hbar_beta, p.omega_m);
    const double c_cl = tc.sine;
    const double omega_sq = p.free_frequency_sq();
    const double k2 = p.kappa * p.kappa;
    const double sum = reverse_sum(p.n_matsubara, [&](std::size_t n) {
        const double nu = matsubara_frequency(n, p.hbar_beta);
        const double a = omega_sq + nu * nu;
        return 1.0 / (a * a - 4.0 * k2 * nu * nu);
    });
    const double d = c_q * p.kappa / omega_sq + c_cl * p.omega_m / omega_sq -
                     8.0 * p.kappa * p.omega_m / p.hbar_beta * sum;
    return std::abs(d);
}

// ------------------------------ quadrature route -----------------------------

SpectralIntegrand integrand_for(const spectral::CompositeSpectralDensity& j) {
    j.validate();
    SpectralIntegrand out;
    out.cos_weight = [j](double w) { return spectral::eval_composite(j, w); };
    out.sin_weight = out.cos_weight;
    double cut = 0.0;
    double ref = 0.0;
    for (const auto& c : j.components) {
        for (double k : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
            out.breakpoints.push_back(c.omega_m + k * c.kappa);
        }
        cut = std::max(cut, c.omega_m + 50.0 * c.kappa);
        ref = std::max(ref, c.omega_m);
    }
    out.omega_ref = ref > 0.0 ? ref : 1.0;
    out.omega_cut = cut > 0.0 ? cut : 1.0;
    return out;
}

SpectralIntegrand integrand_for(const spectral::TargetSpectralDensity& j) {
    if (const auto* sum = std::get_if<spectral::LorentzianSumTarget>(&j.representation())) {
        return integrand_for(sum->density);
    }
    SpectralIntegrand out;
    out.cos_weight = [j](double w) { return j(w); };
    out.sin_weight = out.cos_weight;
    out.omega_ref = j.support_hint();
    out.omega_cut = j.support_hint();
    out.finite_support = true;
    if (const auto* tab = std::get_if<spectral::TabulatedTarget>(&j.representation())) {
        out.breakpoints = tab->omega;
    } else if (const auto* flat = std::get_if<spectral::FlatBandTarget>(&j.representation())) {
        out.breakpoints = {flat->lo, flat->hi};
    }
    return out;
}

SpectralIntegrand regression_integrand(const spectral::LorentzianComponent& c, double hbar_beta) {
    if (!(hbar_beta > 0.0)) throw std::invalid_argument("regression_integrand: hbar_beta must be > 0");
    SpectralIntegrand out = integrand_for(spectral::CompositeSpectralDensity{{c}});
    const double coth_m = thermal_coth(hbar_beta, c.omega_m);
    out.cos_weight_has_coth = true;
    out.cos_weight = [c, coth_m](double w) {
        const double k2 = c.kappa * c.kappa;
        const double dm = w - c.omega_m;
        const double dp = w + c.omega_m;
        return c.lambda * c.lambda * coth_m * (c.kappa / (k2 + dm * dm) + c.kappa / (k2 + dp * dp));
    };
    return out;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

struct Accumulated {
    double value{0.0};
    double error{0.0};
    double l1{0.0};
};

template <typename F>
Accumulated integrate_panels(F f, const std::vector<double>& edges, const QuadratureConfig& cfg) {
    Accumulated acc;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double err = 0.0;
        double l1 = 0.0;
        acc.value += gauss_kronrod<double, 61>::integrate(
            f, edges[i], edges[i + 1], static_cast<unsigned>(cfg.max_depth),
            0.1 * cfg.rel_tolerance, &err, &l1);
        acc.error += err;
        acc.l1 += l1;
    }
    return acc;
}

}  // namespace

ComplexCorrelation l_from_spectral_density(const SpectralIntegrand& j, double hbar_beta,
                                           double t, const QuadratureConfig& cfg) {
    if (!(hbar_beta > 0.0)) throw std::invalid_argument("l_from_spectral_density: hbar_beta must be > 0");
    const double cut = cfg.omega_cut > 0.0 ? cfg.omega_cut : j.omega_cut;
    if (!(cut > 0.0)) throw std::invalid_argument("l_from_spectral_density: omega_cut must be > 0");

    std::vector<double> edges{0.0, cut};
    for (double b : j.breakpoints) {
        if (b > 0.0 && b < cut) edges.push_back(b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    // J(ω)coth(ħβω/2) has a removable singularity at 0; below omega_small use
    // J ≈ ω·J(ω_s)/ω_s and ω·coth(x) = (2/ħβ)(x coth x) ≈ (2/ħβ)(1 + x²/3).
    const double omega_small = 1e-6 * j.omega_ref;
    const double slope_small = j.cos_weight(omega_small) / omega_small;
    auto thermal_weight = [&](double w) {
        if (j.cos_weight_has_coth) return j.cos_weight(w);
        if (w < omega_small) {
            const double x = 0.5 * hbar_beta * w;
            return slope_small * (2.0 / hbar_beta) * (1.0 + x * x / 3.0);
        }
        return j.cos_weight(w) / std::tanh(0.5 * hbar_beta * w);
    };

    auto fc = [&](double w) { return thermal_weight(w) * std::cos(w * t); };
    auto fs = [&](double w) { return j.sin_weight(w) * std::sin(w * t); };
    const auto c = integrate_panels(fc, edges, cfg);
    const auto s = t == 0.0 ? Accumulated{} : integrate_panels(fs, edges, cfg);

    double cos_total = c.value;
    double sin_total = s.value;
    double err_total = c.error + s.error;
    double scale = std::max(c.l1, s.l1);

    if (cfg.include_tail && !j.finite_support) {
        if (t == 0.0) {
            boost::math::quadrature::exp_sinh<double> es;
            double err = 0.0;
            double l1 = 0.0;
            cos_total += es.integrate(thermal_weight, cut, std::numeric_limits<double>::infinity(),
                                      0.1 * cfg.rel_tolerance, &err, &l1);
            err_total += err;
            scale += l1;
        } else {
            // ∫_cut^∞ g(ω) trig(ωt) dω with ω = cut + y/|t|, using the angle-sum identities.
            const double at = std::abs(t);
            const double sgn = t < 0.0 ? -1.0 : 1.0;
            auto shifted_c = [&](double y) { return thermal_weight(cut + y / at) / at; };
            auto shifted_s = [&](double y) { return j.sin_weight(cut + y / at) / at; };
            thread_local boost::math::quadrature::ooura_fourier_sin<double> osin(1e-11);
            thread_local boost::math::quadrature::ooura_fourier_cos<double> ocos(1e-11);
            const auto cc = ocos.integrate(shifted_c, 1.0);
            const auto cs = osin.integrate(shifted_c, 1.0);
            const auto sc = ocos.integrate(shifted_s, 1.0);
            const auto ss = osin.integrate(shifted_s, 1.0);
            const double cw = std::cos(cut * at);
            const double sw = std::sin(cut * at);
            cos_total += cw * cc.first - sw * cs.first;
            sin_total += sgn * (sw * sc.first + cw * ss.first);
            err_total += std::abs(cc.first) * cc.second + std::abs(cs.first) * cs.second +
                         std::abs(sc.first) * sc.second + std::abs(ss.first) * ss.second;
        }
    }

    const double tolerance = cfg.rel_tolerance * std::max(scale, std::numeric_limits<double>::min());
    if (!(err_total <= tolerance)) {
        throw QuadratureError(err_total / std::numbers::pi, tolerance / std::numbers::pi);
    }
    return {cos_total / std::numbers::pi, -sin_total / std::numbers::pi};
}

ComplexCorrelation l_from_spectral_density(const spectral::CompositeSpectralDensity& j,
                                           double hbar_beta, double t,
                                           const QuadratureConfig& cfg) {
    if (j.components.empty()) return {};
    return l_from_spectral_density(integrand_for(j), hbar_beta, t, cfg);
}

ComplexCorrelation l_from_spectral_density(const spectral::TargetSpectralDensity& j,
                                           double hbar_beta, double t,
                                           const QuadratureConfig& cfg) {
    return l_from_spectral_density(integrand_for(j), hbar_beta, t, cfg);
}

}  // namespace sbsim::correlation
