#include "sbsim/iontrap.hpp"

#include "sbsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbsim::iontrap {

void TwoIonCrystal::validate() const {
    if (!(mass_1 > 0.0) || !(mass_2 > 0.0) || !(mass_ref > 0.0) || !(omega_com_ref > 0.0)) {
        throw std::invalid_argument("TwoIonCrystal: masses and omega_com_ref must be > 0");
    }
}

void RamanLasers::validate() const {
    if (!(wavelength > 0.0)) throw std::invalid_argument("RamanLasers: wavelength must be > 0");
    if (!(geometry_angle >= 0.0) || geometry_angle > std::numbers::pi) {
        throw std::invalid_argument("RamanLasers: geometry_angle must lie in [0, pi]");
    }
    for (double v : {omega_odf, detuning_delta_m, big_detuning, gamma, rabi_0}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("RamanLasers: frequencies must be finite and >= 0");
        }
    }
}

double RamanLasers::effective_wavenumber() const {
    return 2.0 * (two_pi / wavelength) * std::sin(0.5 * geometry_angle);
}

AxialModes axial_normal_modes(const TwoIonCrystal& crystal) {
    crystal.validate();
    // Hessian k[[2,-1],[-1,2]] with k = m_ref ω_ref²; the Coulomb curvature at
    // the equilibrium spacing equals k. Mass-weighted and in units of ω_ref².
    const double mu1 = crystal.mass_1 / crystal.mass_ref;
    const double mu2 = crystal.mass_2 / crystal.mass_ref;
    Eigen::Matrix2d a;
    a << 2.0 / mu1, -1.0 / std::sqrt(mu1 * mu2), -1.0 / std::sqrt(mu1 * mu2), 2.0 / mu2;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
    AxialModes out;
    out.omega_1 = crystal.omega_com_ref * std::sqrt(es.eigenvalues()(0));
    out.omega_2 = crystal.omega_com_ref * std::sqrt(es.eigenvalues()(1));
    out.amplitudes = es.eigenvectors();
    for (int n = 0; n < 2; ++n) {
        if (out.amplitudes(0, n) < 0.0) out.amplitudes.col(n) *= -1.0;
    }
    return out;
}

std::array<double, 2> lamb_dicke(const AxialModes& modes, const RamanLasers& lasers,
                                 std::size_t spin_ion, double ion_mass_amu) {
    if (spin_ion > 1) throw std::out_of_range("lamb_dicke: spin_ion must be 0 or 1");
    if (!(ion_mass_amu > 0.0)) throw std::invalid_argument("lamb_dicke: ion mass must be > 0");
    lasers.validate();
    const double m = ion_mass_amu * atomic_mass_unit;
    const double k = lasers.effective_wavenumber();
    std::array<double, 2> eta{};
    for (std::size_t n = 0; n < 2; ++n) {
        const double w = modes.omega(n);
        if (!(w > 0.0)) throw std::invalid_argument("lamb_dicke: mode frequencies must be > 0");
        eta[n] = std::sqrt(hbar / (2.0 * m * w)) *
                 std::abs(modes.amplitudes(static_cast<Eigen::Index>(spin_ion), static_cast<Eigen::Index>(n))) * k;
    }
    return eta;
}

double spin_motion_coupling(double eta, double omega_odf) {
    if (!(eta >= 0.0) || !(omega_odf >= 0.0)) {
        throw std::invalid_argument("spin_motion_coupling: eta and omega_odf must be >= 0");
    }
    return eta * omega_odf;
}

double RabiTable::detuning_at(std::size_t l, std::size_t s, double big_detuning) const {
    if (detuning.empty()) return big_detuning;
    if (detuning.size() != omega.size()) throw std::invalid_argument("RabiTable: detuning table size mismatch");
    return detuning[l][s];
}

EffectiveRabi effective_rabi_frequencies(const RabiTable& table, double big_detuning, double gamma) {
    const std::size_t nl = table.beams();
    if (nl < 2) throw std::invalid_argument("effective_rabi_frequencies: need at least two beams");
    if (!(gamma >= 0.0)) throw std::invalid_argument("effective_rabi_frequencies: gamma must be >= 0");
    constexpr cplx I{0.0, 1.0};
    constexpr std::size_t up = 0;
    constexpr std::size_t dn = 1;
    auto d = [&](std::size_t l, std::size_t s) {
        const double v = table.detuning_at(l, s, big_detuning);
        if (v == 0.0 && gamma == 0.0) throw std::invalid_argument("effective_rabi_frequencies: zero detuning with gamma = 0");
        return v;
    };

    EffectiveRabi out;
    out.omega_sr.resize(static_cast<Eigen::Index>(nl), static_cast<Eigen::Index>(nl));
    for (std::size_t lp = 0; lp < nl; ++lp) {
        for (std::size_t l = 0; l < nl; ++l) {
            const double dl = d(l, up);
            const double dlp = d(lp, dn);
            out.omega_sr(static_cast<Eigen::Index>(lp), static_cast<Eigen::Index>(l)) =
                -std::conj(table.omega[l][up]) * table.omega[lp][dn] * (dlp + dl) /
                ((2.0 * dlp - I * gamma) * (2.0 * dl + I * gamma));
        }
    }
    for (std::size_t s = 0; s < 2; ++s) {
        const double d1 = d(0, s);
        const double d2 = d(1, s);
        out.omega_s[s] = -std::conj(table.omega[0][s]) * table.omega[1][s] * (d2 + d1) /
                         ((2.0 * d2 - I * gamma) * (2.0 * d1 + I * gamma));
        double shift = 0.0;
        for (std::size_t l = 0; l < nl; ++l) {
            const double dl = d(l, s);
            shift -= std::norm(table.omega[l][s]) * dl / (4.0 * dl * dl + gamma * gamma);
        }
        out.stark[s] = shift;
    }
    out.omega_odf = 0.5 * (std::conj(out.omega_s[up]) - std::conj(out.omega_s[dn]));
    out.omega_rw = 0.5 * (std::conj(out.omega_s[up]) + std::conj(out.omega_s[dn]));
    return out;
}

ScatteringRates scattering_rates(const RabiTable& table, double big_detuning, double gamma_up,
                                 double gamma_down) {
    if (!(gamma_up >= 0.0) || !(gamma_down >= 0.0) || !(gamma_up + gamma_down > 0.0)) {
        throw std::invalid_argument("scattering_rates: need gamma_up, gamma_down >= 0 with positive sum");
    }
    if (!(big_detuning > 0.0)) throw std::invalid_argument("scattering_rates: big_detuning must be > 0");
    const double den = 4.0 * big_detuning * big_detuning;
    double sum_up = 0.0;
    double sum_dn = 0.0;
    for (const auto& beam : table.omega) {
        sum_up += std::norm(beam[0]);
        sum_dn += std::norm(beam[1]);
    }
    ScatteringRates r;
    r.rayleigh_up = 0.5 * std::sqrt(gamma_up * sum_up / den);
    r.rayleigh_down = 0.5 * std::sqrt(gamma_down * sum_dn / den);
    r.raman_up_down = std::sqrt(gamma_up * sum_dn / den);
    r.raman_down_up = std::sqrt(gamma_down * sum_up / den);
    const std::size_t entries = 2 * table.beams();
    r.rabi_0 = entries > 0 ? std::sqrt((sum_up + sum_dn) / static_cast<double>(entries)) : 0.0;
    const double omega_l = r.rabi_0 * r.rabi_0 / (2.0 * big_detuning);
    r.gamma_eff = (gamma_up + gamma_down) * omega_l / big_detuning;
    return r;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::warn: return "warn";
        case Verdict::fail: return "fail";
    }
    return "?";
}

Verdict classify(double ratio) {
    if (!std::isfinite(ratio)) return Verdict::fail;
    const double r = std::abs(ratio);
    if (r < regime_pass_below) return Verdict::pass;
    if (r < regime_warn_below) return Verdict::warn;
    return Verdict::fail;
}

Verdict RegimeReport::worst() const {
    Verdict w = Verdict::pass;
    for (const auto& it : items) w = std::max(w, it.verdict);
    return w;
}

const RegimeItem* RegimeReport::first_failure() const {
    for (const auto& it : items) {
        if (it.verdict == Verdict::fail) return &it;
    }
    return nullptr;
}

RegimeReport regime_check(const RegimeInputs& in) {
    if (!(in.omega_m > 0.0)) throw std::invalid_argument("regime_check: omega_m must be > 0");
    RegimeReport rep;
    auto add = [&](std::string name, std::string rule, double ratio) {
        rep.items.push_back({std::move(name), std::move(rule), ratio, classify(ratio)});
    };
    add("kappa/omega_m", "weak damping: kappa << omega_m", in.kappa / in.omega_m);
    const double k_nu1 = in.nbar > 0.0
                             ? std::log1p(1.0 / in.nbar) / two_pi * (in.kappa / in.omega_m)
                             : 0.0;
    add("kappa/nu_1", "few Matsubara corrections: hbar*beta*kappa/(2 pi) << 1", k_nu1);
    if (in.omega_odf && in.omega_L) {
        add("omega_odf/(2 omega_L)", "RWA: omega_odf << 2 omega_L", *in.omega_odf / (2.0 * *in.omega_L));
    }
    if (in.omega_odf && in.omega_L && in.eta_1 && in.omega_1) {
        add("eta_1 omega_odf/|omega_1 - omega_L|", "spectator mode off resonant",
            *in.eta_1 * *in.omega_odf / std::abs(*in.omega_1 - *in.omega_L));
    }
    if (in.gamma && in.big_detuning) {
        add("gamma/Delta_R", "far-detuned Raman beams: Gamma << Delta_R", *in.gamma / *in.big_detuning);
    }
    return rep;
}

}  // namespace sbsim::iontrap
