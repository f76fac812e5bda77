#include "sbsim/chainmap.hpp"

#include "sbsim/expm.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sbsim::chainmap {

double DiscretizedMeasure::total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

namespace {

struct GaussRule {
    std::vector<double> x;  // on [-1, 1]
    std::vector<double> w;
};

GaussRule gauss_legendre(std::size_t n) {
    GaussRule r;
    for (double z : boost::math::legendre_p_zeros<double>(static_cast<int>(n))) {
        // legendre_p_zeros returns the non-negative roots
        const double dp = boost::math::legendre_p_prime(static_cast<int>(n), z);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.x.push_back(z);
        r.w.push_back(w);
        if (z != 0.0) {
            r.x.push_back(-z);
            r.w.push_back(w);
        }
    }
    std::vector<std::size_t> idx(r.x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r.x[a] < r.x[b]; });
    GaussRule s;
    for (auto i : idx) {
        s.x.push_back(r.x[i]);
        s.w.push_back(r.w[i]);
    }
    return s;
}

// Panel edges on [0, omega_max]: uniform, or the inverse of a mixed CDF that
// puts focus_fraction of the panels into Cauchy-shaped regions around each focus.
std::vector<double> panel_edges(double omega_max, std::size_t panels, const DiscretizationOptions& o) {
    std::vector<double> edges(panels + 1);
    if (o.focus.empty()) {
        for (std::size_t i = 0; i <= panels; ++i) {
            edges[i] = omega_max * static_cast<double>(i) / static_cast<double>(panels);
        }
        return edges;
    }
    const double f = std::clamp(o.focus_fraction, 0.0, 1.0);
    auto cauchy = [&](double w, double c, double g) { return std::atan((w - c) / g); };
    auto cdf = [&](double w) {
        double s = (1.0 - f) * w / omega_max;
        for (const auto& [c, g] : o.focus) {
            const double lo = cauchy(0.0, c, g);
            const double hi = cauchy(omega_max, c, g);
            s += f / static_cast<double>(o.focus.size()) * (cauchy(w, c, g) - lo) / (hi - lo);
        }
        return s;
    };
    edges.front() = 0.0;
    edges.back() = omega_max;
    for (std::size_t i = 1; i < panels; ++i) {
        const double target = static_cast<double>(i) / static_cast<double>(panels);
        double a = 0.0;
        double b = omega_max;
        for (int it = 0; it < 200 && b - a > 1e-15 * omega_max; ++it) {
            const double mid = 0.5 * (a + b);
            (cdf(mid) < target ? a : b) = mid;
        }
        edges[i] = 0.5 * (a + b);
    }
    return edges;
}

}  // namespace

DiscretizedMeasure discretize_measure(const std::function<double(double)>& j, double omega_max,
                                      std::size_t n_nodes, const DiscretizationOptions& options) {
    if (!(omega_max > 0.0)) throw std::invalid_argument("discretize_measure: omega_max must be > 0");
    if (options.panel_order < 1) throw std::invalid_argument("discretize_measure: panel_order must be >= 1");
    if (n_nodes < 1) throw std::invalid_argument("discretize_measure: n_nodes must be >= 1");
    for (const auto& [c, g] : options.focus) {
        if (!(g > 0.0)) throw std::invalid_argument("discretize_measure: focus widths must be > 0");
    }
    const std::size_t panels = (n_nodes + options.panel_order - 1) / options.panel_order;
    const GaussRule rule = gauss_legendre(options.panel_order);
    const auto edges = panel_edges(omega_max, panels, options);

    DiscretizedMeasure m;
    m.omega_max = omega_max;
    m.nodes.reserve(panels * options.panel_order);
    m.weights.reserve(panels * options.panel_order);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = edges[p];
        const double b = edges[p + 1];
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double w = mid + half * rule.x[k];
            const double jv = j(w);
            if (!(jv >= 0.0)) {
                throw std::invalid_argument("discretize_measure: J(" + std::to_string(w) +
                                            ") = " + std::to_string(jv) + " is negative");
            }
            m.nodes.push_back(w);
            m.weights.push_back(jv * half * rule.w[k] / std::numbers::pi);
        }
    }
    return m;
}

DiscretizationOptions lorentzian_focus(const spectral::CompositeSpectralDensity& j) {
    DiscretizationOptions o;
    for (const auto& c : j.components) o.focus.emplace_back(c.omega_m, c.kappa);
    return o;
}

ChainCoefficients chain_coefficients(const DiscretizedMeasure& m, std::size_t n_chain) {
    const std::size_t n = m.nodes.size();
    if (n_chain < 1) throw std::invalid_argument("chain_coefficients: n_chain must be >= 1");
    if (2 * n_chain > n) throw std::invalid_argument("chain_coefficients: n_chain must be <= n_nodes/2");
    const double beta0 = m.total_weight();
    if (!(beta0 > 0.0)) throw OrthogonalityLoss(0, beta0);

    const auto nn = static_cast<Eigen::Index>(n);
    const Eigen::Map<const Eigen::VectorXd> x(m.nodes.data(), nn);
    Eigen::MatrixXd q(nn, static_cast<Eigen::Index>(n_chain + 1));
    q.col(0) = Eigen::Map<const Eigen::VectorXd>(m.weights.data(), nn).cwiseSqrt() / std::sqrt(beta0);

    ChainCoefficients c;
    c.system_coupling = std::sqrt(beta0);
    for (std::size_t k = 0; k < n_chain; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        Eigen::VectorXd r = x.cwiseProduct(q.col(kk));
        const double alpha = q.col(kk).dot(r);
        c.omega.push_back(alpha);
        r -= alpha * q.col(kk);
        if (k > 0) r -= c.hopping.back() * q.col(kk - 1);
        for (int pass = 0; pass < 2; ++pass) {
            const auto basis = q.leftCols(kk + 1);
            r -= basis * (basis.transpose() * r);
        }
        const double beta = r.squaredNorm();
        if (!(beta > 0.0) || !std::isfinite(beta)) throw OrthogonalityLoss(k + 1, beta);
        c.hopping.push_back(std::sqrt(beta));
        q.col(kk + 1) = r / std::sqrt(beta);
    }
    return c;
}

ChainEvolution exact_chain_evolution(const lindblad::SpinParams& spin, const ChainCoefficients& chain,
                                     const Eigen::Vector2cd& spin0, const std::vector<double>& times,
                                     const ChainEvolutionOptions& o) {
    if (o.d_max < 1 || o.n_sites < 1) throw std::invalid_argument("exact_chain_evolution: need d_max, n_sites >= 1");
    if (o.n_sites > chain.length()) throw std::invalid_argument("exact_chain_evolution: chain shorter than n_sites");
    std::size_t dim = 2;
    for (std::size_t s = 0; s < o.n_sites; ++s) {
        if (dim > o.dimension_cap) break;
        dim *= o.d_max;
    }
    if (dim > o.dimension_cap) throw CapExceeded(dim, o.dimension_cap);

    // Basis index: spin * D^N + Σ n_s D^(N-1-s); site 0 is the most significant.
    const std::size_t d = o.d_max;
    const std::size_t ns = o.n_sites;
    std::vector<std::size_t> stride(ns);
    std::size_t chain_dim = 1;
    for (std::size_t s = ns; s-- > 0;) {
        stride[s] = chain_dim;
        chain_dim *= d;
    }

    std::vector<Eigen::Triplet<cplx>> trip;
    const double eps = spin.epsilon_over_hbar;
    const double delta = spin.delta_rabi;
    for (std::size_t sp = 0; sp < 2; ++sp) {
        const double sz = sp == 0 ? 1.0 : -1.0;
        for (std::size_t c = 0; c < chain_dim; ++c) {
            const auto row = static_cast<Eigen::Index>(sp * chain_dim + c);
            double diag = 0.5 * eps * sz;
            for (std::size_t s = 0; s < ns; ++s) diag += chain.omega[s] * static_cast<double>((c / stride[s]) % d);
            trip.emplace_back(row, row, diag);
            // −Δ/2 σ^x
            trip.emplace_back(row, static_cast<Eigen::Index>((1 - sp) * chain_dim + c), -0.5 * delta);
            // −(t_0/2) σ^z (b_0 + b_0†): raising and lowering entries of site 0
            const std::size_t n0 = (c / stride[0]) % d;
            if (n0 + 1 < d) {
                const auto col = static_cast<Eigen::Index>(sp * chain_dim + c + stride[0]);
                const double v = -0.5 * chain.system_coupling * sz * std::sqrt(static_cast<double>(n0 + 1));
                trip.emplace_back(row, col, v);
                trip.emplace_back(col, row, v);
            }
            // t_n (b_n† b_{n+1} + h.c.)
            for (std::size_t s = 0; s + 1 < ns; ++s) {
                const std::size_t a = (c / stride[s]) % d;
                const std::size_t b = (c / stride[s + 1]) % d;
                if (a + 1 < d && b >= 1) {
                    const std::size_t c2 = c + stride[s] - stride[s + 1];
                    const double v = chain.hopping[s] * std::sqrt(static_cast<double>((a + 1) * b));
                    const auto col = static_cast<Eigen::Index>(sp * chain_dim + c2);
                    trip.emplace_back(col, row, v);
                    trip.emplace_back(row, col, v);
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(dim);
    SparseMatrixC h(n, n);
    h.setFromTriplets(trip.begin(), trip.end());
    const ExpmAction prop(SparseMatrixC(cplx{0.0, -1.0} * h), o.tolerance);

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
    const Eigen::Vector2cd s0 = spin0.normalized();
    psi(0) = s0(0);
    psi(static_cast<Eigen::Index>(chain_dim)) = s0(1);

    ChainEvolution out;
    out.times = times;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_prev) throw std::invalid_argument("exact_chain_evolution: time grid must be ascending from 0");
        if (times[i] > t_prev) psi = prop.apply(times[i] - t_prev, psi);
        t_prev = times[i];
        if (!psi.allFinite()) throw PropagationError(i, times[i], "non-finite chain state");
        const auto cd = static_cast<Eigen::Index>(chain_dim);
        const double up = psi.head(cd).squaredNorm();
        const double dn = psi.tail(cd).squaredNorm();
        out.sigma_z.push_back(up - dn);
        out.max_norm_error = std::max(out.max_norm_error, std::abs(up + dn - 1.0));
    }
    return out;
}

}  // namespace sbsim::chainmap
