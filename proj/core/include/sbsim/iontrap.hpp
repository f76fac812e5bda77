// Trapped-ion parameters for the spin-boson simulator: axial modes of a
// two-ion crystal, Lamb-Dicke factors, Raman-laser effective couplings,
// off-resonant scattering and the regime checks that make the mapping valid.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sbsim::iontrap {

using cplx = std::complex<double>;

struct TwoIonCrystal {
    double mass_1{24.0};          // amu, coolant
    double mass_2{25.0};          // amu, spin ion
    double omega_com_ref{0.0};    // rad/s, lone ion of mass_ref
    double mass_ref{24.0};        // amu

    void validate() const;
};

struct AxialModes {
    double omega_1{0.0};  // in phase
    double omega_2{0.0};  // out of phase
    // amplitudes(j, n): mode n at ion j, mass-weighted; each column has a
    // non-negative entry for ion 0.
    Eigen::Matrix2d amplitudes{Eigen::Matrix2d::Identity()};

    double omega(std::size_t n) const { return n == 0 ? omega_1 : omega_2; }
};

struct RamanLasers {
    double wavelength{280e-9};             // m
    double geometry_angle{1.5707963267948966};  // rad between the two beams
    double omega_odf{0.0};                 // rad/s
    double detuning_delta_m{0.0};          // rad/s
    double big_detuning{0.0};              // Δ_R, rad/s
    double gamma{0.0};                     // excited-state linewidth, rad/s
    double rabi_0{0.0};                    // single-beam Rabi scale, rad/s

    void validate() const;
    double effective_wavenumber() const;  // |k_L| = 2 (2π/λ) sin(angle/2)
};

AxialModes axial_normal_modes(const TwoIonCrystal& crystal);

// η_n = √(ħ/(2 m ω_n)) |M̃_{jn}| |k_L| for ion j of mass `ion_mass_amu`.
// The sign of M̃ is a laser-phase convention and is dropped.
std::array<double, 2> lamb_dicke(const AxialModes& modes, const RamanLasers& lasers,
                                 std::size_t spin_ion, double ion_mass_amu);

// λ = η Ω_odf with the laser phase chosen to make it real and positive.
double spin_motion_coupling(double eta, double omega_odf);

// Rabi frequencies Ω_{l,s} of beam l on transition s → e, s ∈ {↑ = 0, ↓ = 1}.
struct RabiTable {
    std::vector<std::array<cplx, 2>> omega;
    // δ_{l,s}; empty means every detuning equals the scalar big detuning.
    std::vector<std::array<double, 2>> detuning;

    double detuning_at(std::size_t l, std::size_t s, double big_detuning) const;
    std::size_t beams() const noexcept { return omega.size(); }
};

struct EffectiveRabi {
    Eigen::MatrixXcd omega_sr;      // Ω^sr_{l',l}, row l', column l
    std::array<cplx, 2> omega_s{};  // Ω_↑, Ω_↓ from beams 1 and 2
    cplx omega_odf{};               // ½(Ω_↑* − Ω_↓*)
    cplx omega_rw{};                // ½(Ω_↑* + Ω_↓*)
    std::array<double, 2> stark{};  // Δε_s/ħ, rad/s
};

// Needs at least two beams; Ω_s uses beams 0 and 1.
EffectiveRabi effective_rabi_frequencies(const RabiTable& table, double big_detuning, double gamma);

struct ScatteringRates {
    double rayleigh_up{0.0};    // coefficient of σ^z in L_↑↑
    double rayleigh_down{0.0};  // coefficient of σ^z in L_↓↓
    double raman_up_down{0.0};  // coefficient of σ^+ in L_↑↓
    double raman_down_up{0.0};  // coefficient of σ^- in L_↓↑
    double gamma_eff{0.0};      // Γ Ω_L/Δ_R with Ω_L = Ω₀²/(2Δ_R)
    double rabi_0{0.0};         // RMS of |Ω_{l,s}| used for the estimate
};

ScatteringRates scattering_rates(const RabiTable& table, double big_detuning, double gamma_up,
                                 double gamma_down);

enum class Verdict { pass, warn, fail };

std::string_view to_string(Verdict v);

inline constexpr double regime_pass_below = 0.05;
inline constexpr double regime_warn_below = 0.2;

Verdict classify(double ratio);

struct RegimeItem {
    std::string name;  // e.g. "kappa/omega_m"
    std::string rule;  // the condition in words
    double ratio{0.0};
    Verdict verdict{Verdict::pass};
};

struct RegimeReport {
    std::vector<RegimeItem> items;

    Verdict worst() const;
    const RegimeItem* first_failure() const;
};

struct RegimeInputs {
    double omega_m{0.0};
    double kappa{0.0};
    double nbar{0.0};
    std::optional<double> omega_1;    // in-phase mode frequency
    std::optional<double> omega_L;    // ODF beat-note frequency
    std::optional<double> eta_1;      // Lamb-Dicke factor of the in-phase mode
    std::optional<double> omega_odf;
    std::optional<double> gamma;        // scattering linewidth Γ
    std::optional<double> big_detuning; // Δ_R
};

// Ratios: κ/ω_m, κ/ν₁ = κħβ/(2π), Ω_odf/(2ω_L), η₁Ω_odf/|ω₁ − ω_L|, Γ/Δ_R.
// Items whose inputs are absent are skipped; n̄ = 0 gives κ/ν₁ = 0.
RegimeReport regime_check(const RegimeInputs& in);

}  // namespace sbsim::iontrap
