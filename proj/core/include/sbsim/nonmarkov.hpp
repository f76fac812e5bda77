// Reduced dynamical maps of the spin and two non-Markovianity measures:
// divisibility (Rivas-Huelga-Plenio) and trace-distance backflow
// (Breuer-Laine-Piilo).
//
// A spin state is vectorized row by row, v = [ρ↑↑, ρ↑↓, ρ↓↑, ρ↓↓]ᵀ, and a map
// E acts as v ↦ E v. Column c = 2k + j of E(t, 0) is the image of |k⟩⟨j|.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sbsim/errors.hpp"
#include "sbsim/lindblad.hpp"

namespace sbsim::nonmarkov {

using Map4 = Eigen::Matrix4cd;

struct DynamicalMapSeries {
    std::vector<double> times;
    std::vector<Map4> maps;  // E(t_i, t_0)
};

class IllConditionedMap : public NumericalError {
public:
    IllConditionedMap(std::size_t index, double condition)
        : NumericalError("dynamical map at index " + std::to_string(index) +
                         " is ill-conditioned (condition number " + std::to_string(condition) + ")"),
          index_(index), condition_(condition) {}
    std::size_t index() const noexcept { return index_; }
    double condition() const noexcept { return condition_; }

private:
    std::size_t index_;
    double condition_;
};

Eigen::Vector4cd to_vector(const Eigen::Matrix2cd& rho);
Eigen::Matrix2cd to_matrix(const Eigen::Vector4cd& v);

// Map of ρ ↦ U ρ U† in this layout: U ⊗ conj(U).
Map4 unitary_superop(const Eigen::Matrix2cd& u);

// Evolves |k⟩⟨j| ⊗ ρ_β for the four basis operators and traces out the modes.
DynamicalMapSeries reconstruct_maps(const lindblad::SystemSpec& spec, const std::vector<double>& times,
                                    const lindblad::EvolveOptions& options = {});

// E(t_i, t_j) = E(t_i, t_0) E(t_j, t_0)⁻¹ via pivoted LU. Throws IllConditionedMap
// when cond(E(t_j, t_0)) exceeds max_condition.
Map4 intermediate_map(const DynamicalMapSeries& series, std::size_t i, std::size_t j,
                      double max_condition = 1e12);

// Index permutation E^R(2p+q, 2u+v) = E(2p+u, 2q+v) followed by the 1/2 scale.
Eigen::Matrix4cd reshuffle(const Map4& e);

// The bare permutation (no scale); an involution.
Eigen::Matrix4cd reshuffle_unscaled(const Map4& e);

// Sum of singular values.
double trace_norm(const Eigen::MatrixXcd& m);

inline constexpr double default_threshold = 1e-14;

// (‖Choi(E(t_{i+1}, t_i))‖₁ − 1)/(t_{i+1} − t_i), zero when the numerator is below threshold.
double g_discrete(const DynamicalMapSeries& series, std::size_t i, double threshold = default_threshold);

std::vector<double> g_series(const DynamicalMapSeries& series, double threshold = default_threshold);

// Mean of tanh(g) over the points with g > 0; 0 if there are none.
double n_rhp(const std::vector<double>& g);
double n_rhp(const DynamicalMapSeries& series, double threshold = default_threshold);

// ½‖ρ₁ − ρ₂‖₁
double trace_distance(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2);

struct StatePair {
    lindblad::SpinStateTag first;
    lindblad::SpinStateTag second;
};

// (↑,↓), (+x,−x), (+y,−y)
std::vector<StatePair> canonical_pairs();

std::string pair_label(const StatePair& p);

struct BlpPair {
    StatePair pair;
    std::vector<double> distance;  // D(t_i)
    double measure{0.0};           // Σ positive increments above threshold
};

struct BlpResult {
    std::vector<BlpPair> pairs;
    double max{0.0};
};

// Σ_i max(0, D(t_{i+1}) − D(t_i)), counting only increments above threshold.
double blp_increments(const std::vector<double>& distance, double threshold = default_threshold);

// States are evolved through the reconstructed maps, which is exact by linearity
// because every pair shares the same thermal mode state.
BlpResult n_blp_lower_bound(const DynamicalMapSeries& series, const std::vector<StatePair>& pairs,
                            double threshold = default_threshold);

BlpResult n_blp_lower_bound(const lindblad::SystemSpec& spec, const std::vector<StatePair>& pairs,
                            const std::vector<double>& times, double threshold = default_threshold,
                            const lindblad::EvolveOptions& options = {});

}  // namespace sbsim::nonmarkov
