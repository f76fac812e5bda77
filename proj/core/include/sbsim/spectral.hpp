// Lorentzian spectral densities of damped modes, their sums,
// the regression-theorem counterpart J̃, and least-squares fitting to targets.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sbsim::spectral {

// One damped harmonic mode as seen by the spin. All fields in rad/s.
struct LorentzianComponent {
    double lambda{0.0};   // spin-mode coupling
    double kappa{1.0};    // amplitude damping rate
    double omega_m{1.0};  // reduced (damped) mode frequency

    // Throws std::invalid_argument unless lambda >= 0, 0 < kappa < omega_m.
    void validate() const;

    // Free oscillation frequency sqrt(omega_m^2 + kappa^2).
    double free_frequency() const noexcept;
};

LorentzianComponent make_lorentzian(double lambda, double kappa, double omega_m);

struct CompositeSpectralDensity {
    std::vector<LorentzianComponent> components;

    void validate() const;
    double operator()(double omega) const noexcept;
    double max_omega_m() const noexcept;
};

// Closed-form target families. Only what the fitter needs as a target.
struct LorentzianSumTarget {
    CompositeSpectralDensity density;
};

// J = level on [lo, hi], zero elsewhere.
struct FlatBandTarget {
    double level{1.0};
    double lo{0.0};
    double hi{1.0};
};

// Samples (omega_i, J_i), linearly interpolated, zero outside the sampled range.
struct TabulatedTarget {
    std::vector<double> omega;
    std::vector<double> value;
};

class TargetSpectralDensity {
public:
    using Representation = std::variant<LorentzianSumTarget, FlatBandTarget, TabulatedTarget>;

    explicit TargetSpectralDensity(LorentzianSumTarget t);
    explicit TargetSpectralDensity(FlatBandTarget t);
    explicit TargetSpectralDensity(TabulatedTarget t);

    double operator()(double omega) const;

    // Upper end of the region where the target carries weight; used for default grids.
    double support_hint() const;

    // True if J vanishes identically above support_hint().
    bool finite_support() const noexcept;

    const Representation& representation() const noexcept { return rep_; }

private:
    Representation rep_;
};

// J_eff(omega) = lambda^2 [kappa/(kappa^2+(omega-omega_m)^2) - kappa/(kappa^2+(omega+omega_m)^2)]
double eval_lorentzian(const LorentzianComponent& c, double omega) noexcept;

double eval_composite(const CompositeSpectralDensity& s, double omega) noexcept;

// J̃_eff: Lorentzian sum weighted by coth(hbar_beta*omega_m/2)/coth(hbar_beta*omega/2).
// Returns 0 at omega == 0 (the limit). hbar_beta in seconds.
double eval_regression_sd(const LorentzianComponent& c, double hbar_beta, double omega);

// |J̃ - J| / J. Empty where J(omega) == 0 (omega == 0 in particular).
std::optional<double> relative_error_epsilon_j(const LorentzianComponent& c,
                                               double hbar_beta, double omega);

// Slope of J_eff at omega -> 0: 4 lambda^2 kappa omega_m / (kappa^2 + omega_m^2)^2.
double ohmic_slope(const LorentzianComponent& c) noexcept;

// --------------------------------- fitting -----------------------------------

struct FitOptions {
    std::size_t restarts{8};         // random restarts, used only when no seeds are given
    std::uint64_t seed{20160601};    // restart RNG seed
    std::size_t max_iterations{400};
    double tolerance{1e-14};         // relative decrease of E that counts as converged
    std::size_t threads{1};          // restarts run concurrently when > 1
};

struct FitResult {
    CompositeSpectralDensity density;  // sorted by omega_m ascending
    double residual{0.0};              // E, trapezoidal on the grid
    std::size_t iterations{0};
    std::size_t restart{0};            // index of the winning start
    bool converged{false};
    std::vector<double> history;       // E after every accepted step of the winning start
};

class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, FitResult best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const FitResult& best() const noexcept { return best_; }

private:
    FitResult best_;
};

// 2000 uniformly spaced points on [0, 2 * support].
std::vector<double> default_fit_grid(const TargetSpectralDensity& target,
                                     std::size_t points = 2000);

// E = ∫ |J_t - J|^2 dω by the trapezoidal rule on grid.
double fit_objective(const TargetSpectralDensity& target,
                     const CompositeSpectralDensity& model,
                     const std::vector<double>& grid);

// Levenberg-Marquardt from the given seeds and from the target's tallest peaks,
// or multi-start when seeds are empty. The lowest-E converged start wins.
// Throws FitError (carrying the best-so-far result) if no start converges.
FitResult fit_spectral_density(const TargetSpectralDensity& target,
                               std::size_t n_components,
                               const std::vector<double>& grid,
                               const std::vector<LorentzianComponent>& seeds = {},
                               const FitOptions& options = {});

}  // namespace sbsim::spectral
