// Reservoir correlation functions L(t) of a damped mode
//
// Two closed forms share an imaginary part: the oscillator damped by an Ohmic
// bath (with its Matsubara series) and the Lindblad-damped oscillator (from the
// quantum regression theorem). A quadrature route evaluates L(t) directly from
// any spectral density. Times in seconds, frequencies in rad/s.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "sbsim/spectral.hpp"

namespace sbsim::correlation {

struct BathParams {
    double omega_m{1.0};    // reduced mode frequency
    double kappa{0.1};      // damping rate
    double hbar_beta{1.0};  // ħβ in seconds
    double lambda{1.0};     // spin-mode coupling
    std::size_t n_matsubara{10000};

    void validate() const;
    double free_frequency_sq() const noexcept { return omega_m * omega_m + kappa * kappa; }
};

struct ComplexCorrelation {
    double real{0.0};  // L'
    double imag{0.0};  // L''

    std::complex<double> value() const noexcept { return {real, imag}; }
};

// ħβ = ln(1 + 1/n̄)/ω. Throws for nbar <= 0 or omega <= 0.
double nbar_to_hbar_beta(double nbar, double omega);

// n̄ = 1/(exp(ħβω) - 1).
double hbar_beta_to_nbar(double hbar_beta, double omega);

// ν_n = 2πn/(ħβ).
double matsubara_frequency(std::size_t n, double hbar_beta);

// κħβ/(2π), i.e. κ/ν₁.
double kappa_over_nu1(double kappa, double hbar_beta) noexcept;

// Thermal factor coth(ħβω_m/2) = 1 + 2n̄.
double thermal_coth(double hbar_beta, double omega) noexcept;

// L1(t): the damped cosine/sine part of the Ohmic-bath real part.
double l_ohmic_principal(const BathParams& p, double t);

// L2(t): the (negative) Matsubara series, truncated at p.n_matsubara terms.
double l_ohmic_matsubara(const BathParams& p, double t);

ComplexCorrelation l_ohmic(const BathParams& p, double t);
ComplexCorrelation l_lindblad(const BathParams& p, double t);

// (1/λ²)|∫₀^∞ [L(t) - L_L(t)] dt| in closed form.
double distance_d(const BathParams& p);

// ------------------------------ quadrature route -----------------------------

struct QuadratureConfig {
    double omega_cut{0.0};      // end of the adaptive panel region; 0 picks max ω_m + 50κ
    double rel_tolerance{1e-8}; // relative to (1/π)∫|J| on the panel region
    bool include_tail{true};    // add the semi-infinite tail [omega_cut, ∞)
    std::size_t max_depth{18};
};

// A spectral weight to integrate against coth·cos and sin. `cos_weight`
// multiplies coth(ħβω/2)cos(ωt) unless `cos_weight_has_coth` is set, in which
// case it already contains the thermal factor (e.g. J̃·coth).
struct SpectralIntegrand {
    std::function<double(double)> cos_weight;
    std::function<double(double)> sin_weight;
    bool cos_weight_has_coth{false};
    std::vector<double> breakpoints;  // peaks where panels should split
    double omega_ref{1.0};            // characteristic frequency (for the small-ω series switch)
    double omega_cut{0.0};            // default cut when the config leaves it at 0
    bool finite_support{false};       // J == 0 beyond omega_cut
};

SpectralIntegrand integrand_for(const spectral::CompositeSpectralDensity& j);
SpectralIntegrand integrand_for(const spectral::TargetSpectralDensity& j);

// J̃(ω)coth(ħβω/2) against cos and J(ω) against sin: the Fourier pair of L_L(t).
SpectralIntegrand regression_integrand(const spectral::LorentzianComponent& c, double hbar_beta);

// L(t) = (1/π)∫₀^∞ dω J(ω)[coth(ħβω/2)cos(ωt) - i sin(ωt)].
// Throws QuadratureError when the estimated error stays above tolerance.
ComplexCorrelation l_from_spectral_density(const SpectralIntegrand& j, double hbar_beta,
                                           double t, const QuadratureConfig& cfg = {});
ComplexCorrelation l_from_spectral_density(const spectral::CompositeSpectralDensity& j,
                                           double hbar_beta, double t,
                                           const QuadratureConfig& cfg = {});
ComplexCorrelation l_from_spectral_density(const spectral::TargetSpectralDensity& j,
                                           double hbar_beta, double t,
                                           const QuadratureConfig& cfg = {});

}  // namespace sbsim::correlation
