// Star-to-chain mapping of a bosonic bath (orthogonal polynomials of the
// measure J(ω)dω/π) and a small exact evolution of spin + truncated chain.

#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbsim/errors.hpp"
#include "sbsim/lindblad.hpp"
#include "sbsim/spectral.hpp"

namespace sbsim::chainmap {

struct DiscretizedMeasure {
    std::vector<double> nodes;    // strictly increasing in (0, omega_max]
    std::vector<double> weights;  // ≈ J(ω_i) Δω_i / π
    double omega_max{0.0};

    double total_weight() const;
};

// Panels are spread uniformly, or concentrated around each (center, width)
// pair in `focus` with the given fraction of all panels.
struct DiscretizationOptions {
    std::size_t panel_order{20};
    std::vector<std::pair<double, double>> focus;
    double focus_fraction{0.5};
};

// n_nodes is rounded up to a multiple of panel_order. Throws on a negative J sample.
DiscretizedMeasure discretize_measure(const std::function<double(double)>& j, double omega_max,
                                      std::size_t n_nodes, const DiscretizationOptions& options = {});

// Focus on every component peak (ω_m, κ).
DiscretizationOptions lorentzian_focus(const spectral::CompositeSpectralDensity& j);

struct ChainCoefficients {
    std::vector<double> omega;    // site frequencies ω_n, n = 0..N-1
    std::vector<double> hopping;  // t_n couples sites n and n+1 (last entry leads off the chain)
    double system_coupling{0.0};  // t_0 = √(total weight)

    std::size_t length() const noexcept { return omega.size(); }
};

class OrthogonalityLoss : public NumericalError {
public:
    OrthogonalityLoss(std::size_t index, double beta)
        : NumericalError("recurrence broke down at index " + std::to_string(index) +
                         " (beta = " + std::to_string(beta) + ")"),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Lanczos on diag(nodes) started from √weights, fully reorthogonalized twice.
// Requires n_chain ≤ nodes/2.
ChainCoefficients chain_coefficients(const DiscretizedMeasure& m, std::size_t n_chain);

struct ChainEvolutionOptions {
    std::size_t d_max{4};            // levels per site
    std::size_t n_sites{6};
    std::size_t dimension_cap{2 * 16384};
    double tolerance{1e-15};
};

struct ChainEvolution {
    std::vector<double> times;
    std::vector<double> sigma_z;
    double max_norm_error{0.0};  // max |⟨ψ|ψ⟩ − 1|
};

// Pure-state evolution of spin ⊗ chain vacuum under
// ε/2 σ^z − Δ/2 σ^x − (t_0/2)σ^z(b_0 + b_0†) + Σ ω_n b_n†b_n + Σ t_n(b_n†b_{n+1} + h.c.).
ChainEvolution exact_chain_evolution(const lindblad::SpinParams& spin, const ChainCoefficients& chain,
                                     const Eigen::Vector2cd& spin0, const std::vector<double>& times,
                                     const ChainEvolutionOptions& options = {});

}  // namespace sbsim::chainmap
