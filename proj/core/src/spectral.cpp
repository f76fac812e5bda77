// Evaluation of Lorentzian spectral densities and targets

#include "sbsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace sbsim::spectral {

void LorentzianComponent::validate() const {
    if (!std::isfinite(lambda) || !std::isfinite(kappa) || !std::isfinite(omega_m)) {
        throw std::invalid_argument("LorentzianComponent: parameters must be finite");
    }
    if (lambda < 0.0) throw std::invalid_argument("LorentzianComponent: lambda must be >= 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("LorentzianComponent: kappa must be > 0");
    if (!(omega_m > 0.0)) throw std::invalid_argument("LorentzianComponent: omega_m must be > 0");
    if (!(kappa < omega_m)) {
        throw std::invalid_argument("LorentzianComponent: underdamped regime requires kappa < omega_m");
    }
}

double LorentzianComponent::free_frequency() const noexcept {
    return std::hypot(omega_m, kappa);
}

LorentzianComponent make_lorentzian(double lambda, double kappa, double omega_m) {
    LorentzianComponent c{lambda, kappa, omega_m};
    c.validate();
    return c;
}

void CompositeSpectralDensity::validate() const {
    for (const auto& c : components) c.validate();
}

double CompositeSpectralDensity::operator()(double omega) const noexcept {
    return eval_composite(*this, omega);
}

double CompositeSpectralDensity::max_omega_m() const noexcept {
    double m = 0.0;
    for (const auto& c : components) m = std::max(m, c.omega_m);
    return m;
}

double eval_lorentzian(const LorentzianComponent& c, double omega) noexcept {
    const double k2 = c.kappa * c.kappa;
    const double dm = omega - c.omega_m;
    const double dp = omega + c.omega_m;
    return c.lambda * c.lambda * (c.kappa / (k2 + dm * dm) - c.kappa / (k2 + dp * dp));
}

double eval_composite(const CompositeSpectralDensity& s, double omega) noexcept {
    double j = 0.0;
    for (const auto& c : s.components) j += eval_lorentzian(c, omega);
    return j;
}

double eval_regression_sd(const LorentzianComponent& c, double hbar_beta, double omega) {
    if (!(hbar_beta > 0.0)) throw std::invalid_argument("eval_regression_sd: hbar_beta must be > 0");
    const double k2 = c.kappa * c.kappa;
    const double dm = omega - c.omega_m;
    const double dp = omega + c.omega_m;
    const double sum = c.kappa / (k2 + dm * dm) + c.kappa / (k2 + dp * dp);
    // coth(x_m)/coth(x) written as tanh(x)/tanh(x_m): finite everywhere, 0 at omega = 0
    const double ratio = std::tanh(0.5 * hbar_beta * omega) / std::tanh(0.5 * hbar_beta * c.omega_m);
    return c.lambda * c.lambda * ratio * sum;
}

std::optional<double> relative_error_epsilon_j(const LorentzianComponent& c,
                                               double hbar_beta, double omega) {
    const double j = eval_lorentzian(c, omega);
    if (j == 0.0) return std::nullopt;
    return std::abs(eval_regression_sd(c, hbar_beta, omega) - j) / std::abs(j);
}

double ohmic_slope(const LorentzianComponent& c) noexcept {
    const double d = c.kappa * c.kappa + c.omega_m * c.omega_m;
    return 4.0 * c.lambda * c.lambda * c.kappa * c.omega_m / (d * d);
}

// ---------------------------------- targets ----------------------------------

TargetSpectralDensity::TargetSpectralDensity(LorentzianSumTarget t) : rep_(std::move(t)) {
    std::get<LorentzianSumTarget>(rep_).density.validate();
}

TargetSpectralDensity::TargetSpectralDensity(FlatBandTarget t) : rep_(t) {
    if (!(t.level >= 0.0) || !(t.lo >= 0.0) || !(t.hi > t.lo)) {
        throw std::invalid_argument("FlatBandTarget: need level >= 0 and 0 <= lo < hi");
    }
}

TargetSpectralDensity::TargetSpectralDensity(TabulatedTarget t) : rep_(std::move(t)) {
    const auto& tab = std::get<TabulatedTarget>(rep_);
    if (tab.omega.size() != tab.value.size() || tab.omega.size() < 2) {
        throw std::invalid_argument("TabulatedTarget: need >= 2 samples of equal length");
    }
    for (std::size_t i = 0; i < tab.omega.size(); ++i) {
        if (!(tab.value[i] >= 0.0)) throw std::invalid_argument("TabulatedTarget: J_i must be >= 0");
        if (i > 0 && !(tab.omega[i] > tab.omega[i - 1])) {
            throw std::invalid_argument("TabulatedTarget: omega must be strictly increasing");
        }
    }
}

double TargetSpectralDensity::operator()(double omega) const {
    return std::visit(
        [omega](const auto& t) -> double {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, LorentzianSumTarget>) {
                return eval_composite(t.density, omega);
            } else if constexpr (std::is_same_v<T, FlatBandTarget>) {
                return (omega >= t.lo && omega <= t.hi) ? t.level : 0.0;
            } else {
                if (omega < t.omega.front() || omega > t.omega.back()) return 0.0;
                auto it = std::upper_bound(t.omega.begin(), t.omega.end(), omega);
                if (it == t.omega.end()) return t.value.back();
                const auto i = static_cast<std::size_t>(std::distance(t.omega.begin(), it));
                const double w = (omega - t.omega[i - 1]) / (t.omega[i] - t.omega[i - 1]);
                return (1.0 - w) * t.value[i - 1] + w * t.value[i];
            }
        },
        rep_);
}

double TargetSpectralDensity::support_hint() const {
    return std::visit(
        [](const auto& t) -> double {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, LorentzianSumTarget>) {
                return t.density.max_omega_m();
            } else if constexpr (std::is_same_v<T, FlatBandTarget>) {
                return t.hi;
            } else {
                return t.omega.back();
            }
        },
        rep_);
}

bool TargetSpectralDensity::finite_support() const noexcept {
    return !std::holds_alternative<LorentzianSumTarget>(rep_);
}

}  // namespace sbsim::spectral
