// Spin coupled to thermally damped harmonic modes: Hamiltonian, Lindblad
// dissipators, Liouvillian and time evolution of the density matrix.
//
// Tensor order: spin first, then modes in the order given. Spin basis
// index 0 is |↑⟩ (σ^z = +1). Density matrices are vectorized by stacking
// columns, so vec(A ρ B†) = (conj(B) ⊗ A) vec(ρ); the Liouvillian acts on that
// vector. Every H below is H/ħ in rad/s.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sbsim/expm.hpp"

namespace sbsim::lindblad {

struct SpinParams {
    double epsilon_over_hbar{0.0};  // δ
    double delta_rabi{0.0};         // Δ; the σ^x drive is Ω_d = −Δ
};

struct ModeSpec {
    double omega_m{0.0};
    double lambda{0.0};
    double kappa{0.0};  // enters the dissipator as written; populations relax at 2κ
    double nbar{0.0};
    std::size_t n_max{15};

    void validate() const;
};

// Extra Markovian channel on the spin alone: rate · D[op].
struct SpinJump {
    Eigen::Matrix2cd op;
    double rate{0.0};
};

struct SystemSpec {
    SpinParams spin;
    std::vector<ModeSpec> modes;
    std::vector<SpinJump> spin_jumps;
    std::size_t dimension_cap{1024};  // on the Hilbert dimension

    void validate() const;  // also throws CapExceeded
    std::size_t mode_dimension() const;  // Π (n_max + 1)
    std::size_t dimension() const;       // 2 · mode_dimension()
};

struct StateDiagnostics {
    double trace_error{0.0};      // |tr ρ − 1|
    double hermiticity_error{0.0};  // max |ρ − ρ†|
    double min_eigenvalue{0.0};
};

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(Eigen::MatrixXcd m);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
    Eigen::MatrixXcd& matrix() noexcept { return m_; }

    StateDiagnostics diagnostics() const;

    // Throws std::invalid_argument if any of the invariants fail.
    void check(double trace_tol = 1e-10, double herm_tol = 1e-12, double eig_tol = 1e-8) const;

private:
    Eigen::MatrixXcd m_;
};

enum class SpinStateTag { up, down, plus_x, minus_x, plus_y, minus_y };

SpinStateTag parse_spin_state(std::string_view name);
std::string_view to_string(SpinStateTag tag);
Eigen::Vector2cd spin_ket(SpinStateTag tag);
Eigen::Matrix2cd spin_projector(SpinStateTag tag);

Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();

// p_n ∝ (n̄/(n̄+1))^n, n = 0..n_max, renormalized.
DensityMatrix thermal_state(double nbar, std::size_t n_max);

// spin ⊗ thermal(mode 1) ⊗ thermal(mode 2) ⊗ ...
DensityMatrix product_state(const Eigen::Matrix2cd& spin, const SystemSpec& spec);

SparseMatrixC build_hamiltonian(const SystemSpec& spec);

// Superoperator of the thermal dissipator of one mode, on the full space.
SparseMatrixC build_dissipator(std::size_t mode, const SystemSpec& spec);

SparseMatrixC build_liouvillian(const SystemSpec& spec);

// Operators on the full Hilbert space.
SparseMatrixC spin_operator(const Eigen::Matrix2cd& op, const SystemSpec& spec);
SparseMatrixC annihilation(std::size_t mode, const SystemSpec& spec);
SparseMatrixC number_operator(std::size_t mode, const SystemSpec& spec);

// Superoperator conversions for column-stacked vectorization.
SparseMatrixC left_right_superop(const SparseMatrixC& a, const SparseMatrixC& b);  // ρ ↦ a ρ b†
SparseMatrixC lindblad_superop(const SparseMatrixC& c, double rate);                // rate · D[c]

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, std::size_t dim);

struct EvolveOptions {
    double tolerance{1e-15};        // Taylor truncation tolerance per step
    double blowup_tolerance{1e-6};  // |tr ρ − 1| beyond this aborts
    bool diagnostics{true};         // compute trace/Hermiticity/eigenvalue checks per output
};

struct EvolveStep {
    std::size_t index;
    double time;
    const DensityMatrix& rho;
    const StateDiagnostics& diagnostics;  // zeros when diagnostics are disabled
};

using Observer = std::function<void(const EvolveStep&)>;

// Propagates rho0 over the sorted grid, calling observer at every time
// (including times[0] == 0). Throws PropagationError naming the failing step.
void evolve(const SystemSpec& spec, const DensityMatrix& rho0, const std::vector<double>& times,
            const Observer& observer, const EvolveOptions& options = {});

std::vector<DensityMatrix> evolve(const SystemSpec& spec, const DensityMatrix& rho0,
                                  const std::vector<double>& times,
                                  const EvolveOptions& options = {});

// Stepwise propagation of an arbitrary (not necessarily Hermitian) operator.
// No diagnostics; used for map reconstruction.
void evolve_operator(const ExpmAction& propagator, const Eigen::MatrixXcd& x0,
                     const std::vector<double>& times,
                     const std::function<void(std::size_t, const Eigen::MatrixXcd&)>& observer);

// tr(O ρ). Throws on dimension mismatch or |imag| ≥ 1e-8.
double expect(const Eigen::MatrixXcd& observable, const DensityMatrix& rho);
double expect(const SparseMatrixC& observable, const DensityMatrix& rho);

// Reduced 2×2 spin state of a matrix on spin ⊗ rest.
Eigen::Matrix2cd partial_trace_spin(const Eigen::MatrixXcd& rho);

struct SigmaZPoint {
    double t;
    double sigma_z;
    double trace_error;
    double min_eigenvalue;
    double hermiticity_error;
};

std::vector<SigmaZPoint> sigma_z_trajectory(const SystemSpec& spec, const DensityMatrix& rho0,
                                            const std::vector<double>& times,
                                            const EvolveOptions& options = {});

// Re-runs with every n_max raised by `extra` and reports the largest ⟨σ_z⟩ deviation.
struct TruncationAudit {
    double max_deviation{0.0};
    std::size_t extra_levels{5};
};

TruncationAudit truncation_audit(const SystemSpec& spec, const Eigen::Matrix2cd& spin0,
                                 const std::vector<double>& times, std::size_t extra = 5,
                                 const EvolveOptions& options = {});

// Number of strict sign changes of a series (exact zeros are skipped).
std::size_t count_zero_crossings(const std::vector<double>& values);

std::vector<double> uniform_grid(double t_end, std::size_t n_steps);

}  // namespace sbsim::lindblad
