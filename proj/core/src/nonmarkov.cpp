#include "sbsim/nonmarkov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbsim::nonmarkov {

using lindblad::SpinStateTag;

Eigen::Vector4cd to_vector(const Eigen::Matrix2cd& rho) {
    return {rho(0, 0), rho(0, 1), rho(1, 0), rho(1, 1)};
}

Eigen::Matrix2cd to_matrix(const Eigen::Vector4cd& v) {
    Eigen::Matrix2cd m;
    m << v(0), v(1), v(2), v(3);
    return m;
}

Map4 unitary_superop(const Eigen::Matrix2cd& u) {
    Map4 e;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) e(2 * a + b, 2 * c + d) = u(a, c) * std::conj(u(b, d));
    return e;
}

DynamicalMapSeries reconstruct_maps(const lindblad::SystemSpec& spec, const std::vector<double>& times,
                                    const lindblad::EvolveOptions& options) {
    spec.validate();
    DynamicalMapSeries out;
    out.times = times;
    out.maps.assign(times.size(), Map4::Zero());

    const ExpmAction prop(lindblad::build_liouvillian(spec), options.tolerance);
    for (int k = 0; k < 2; ++k) {
        for (int j = 0; j < 2; ++j) {
            Eigen::Matrix2cd basis = Eigen::Matrix2cd::Zero();
            basis(k, j) = 1.0;
            // The product state is linear in its spin factor, so this is |k⟩⟨j| ⊗ ρ_β.
            const Eigen::MatrixXcd x0 = lindblad::product_state(basis, spec).matrix();
            const int col = 2 * k + j;
            lindblad::evolve_operator(prop, x0, times, [&](std::size_t i, const Eigen::MatrixXcd& x) {
                out.maps[i].col(col) = to_vector(lindblad::partial_trace_spin(x));
            });
        }
    }
    return out;
}

Map4 intermediate_map(const DynamicalMapSeries& series, std::size_t i, std::size_t j,
                      double max_condition) {
    if (i >= series.maps.size() || j > i) throw std::out_of_range("intermediate_map: need j <= i < size");
    if (i == j) return Map4::Identity();
    const Map4& ej = series.maps[j];
    const Eigen::Vector4d sv = Eigen::JacobiSVD<Map4>(ej).singularValues();
    const double cond = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    if (!(cond <= max_condition)) throw IllConditionedMap(j, cond);
    // X E_j = E_i  <=>  E_jᵀ Xᵀ = E_iᵀ
    const Map4 xt = ej.transpose().partialPivLu().solve(series.maps[i].transpose());
    return xt.transpose();
}

Eigen::Matrix4cd reshuffle_unscaled(const Map4& e) {
    Eigen::Matrix4cd r;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            for (int u = 0; u < 2; ++u)
                for (int v = 0; v < 2; ++v) r(2 * p + q, 2 * u + v) = e(2 * p + u, 2 * q + v);
    return r;
}

Eigen::Matrix4cd reshuffle(const Map4& e) {
    return 0.5 * reshuffle_unscaled(e);
}

double trace_norm(const Eigen::MatrixXcd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues().sum();
}

double g_discrete(const DynamicalMapSeries& series, std::size_t i, double threshold) {
    if (i + 1 >= series.times.size()) throw std::out_of_range("g_discrete: i must be below the last index");
    const double dt = series.times[i + 1] - series.times[i];
    if (!(dt > 0.0)) throw std::invalid_argument("g_discrete: time grid must be strictly increasing");
    const double numerator = trace_norm(reshuffle(intermediate_map(series, i + 1, i))) - 1.0;
    if (numerator < threshold) return 0.0;
    return numerator / dt;
}

std::vector<double> g_series(const DynamicalMapSeries& series, double threshold) {
    std::vector<double> g;
    if (series.times.size() < 2) return g;
    g.reserve(series.times.size() - 1);
    for (std::size_t i = 0; i + 1 < series.times.size(); ++i) g.push_back(g_discrete(series, i, threshold));
    return g;
}

double n_rhp(const std::vector<double>& g) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double x : g) {
        if (x > 0.0) {
            sum += std::tanh(x);
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double n_rhp(const DynamicalMapSeries& series, double threshold) {
    if (series.times.size() < 2) throw std::invalid_argument("n_rhp: need at least two times");
    return n_rhp(g_series(series, threshold));
}

double trace_distance(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2) {
    if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    const Eigen::MatrixXcd d = rho1 - rho2;
    const Eigen::MatrixXcd h = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::vector<StatePair> canonical_pairs() {
    return {{SpinStateTag::up, SpinStateTag::down},
            {SpinStateTag::plus_x, SpinStateTag::minus_x},
            {SpinStateTag::plus_y, SpinStateTag::minus_y}};
}

std::string pair_label(const StatePair& p) {
    return std::string(lindblad::to_string(p.first)) + "/" + std::string(lindblad::to_string(p.second));
}

double blp_increments(const std::vector<double>& distance, double threshold) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < distance.size(); ++i) {
        const double inc = distance[i + 1] - distance[i];
        if (inc > threshold) s += inc;
    }
    return s;
}

BlpResult n_blp_lower_bound(const DynamicalMapSeries& series, const std::vector<StatePair>& pairs,
                            double threshold) {
    BlpResult out;
    for (const auto& pair : pairs) {
        const Eigen::Vector4cd v1 = to_vector(lindblad::spin_projector(pair.first));
        const Eigen::Vector4cd v2 = to_vector(lindblad::spin_projector(pair.second));
        BlpPair bp{pair, {}, 0.0};
        bp.distance.reserve(series.maps.size());
        for (const auto& e : series.maps) {
            bp.distance.push_back(trace_distance(to_matrix(e * v1), to_matrix(e * v2)));
        }
        bp.measure = blp_increments(bp.distance, threshold);
        out.max = std::max(out.max, bp.measure);
        out.pairs.push_back(std::move(bp));
    }
    return out;
}

BlpResult n_blp_lower_bound(const lindblad::SystemSpec& spec, const std::vector<StatePair>& pairs,
                            const std::vector<double>& times, double threshold,
                            const lindblad::EvolveOptions& options) {
    return n_blp_lower_bound(reconstruct_maps(spec, times, options), pairs, threshold);
}

}  // namespace sbsim::nonmarkov
