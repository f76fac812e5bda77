// Least-squares fit of a Lorentzian sum to a target J_t(ω)
//
// Each component is parameterized without bounds as (a, u, v) in scaled units:
//   lambda  = a * sqrt(S * W)
//   omega_m = W * exp(u)
//   kappa   = omega_m * sigmoid(v)        so 0 < kappa < omega_m always holds
// where W is the grid's largest frequency and S the target's peak value.
// The residual vector is sqrt(trapezoid weight) * (J_t - J) on the grid.

#include "sbsim/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

namespace sbsim::spectral {

namespace {

struct Scales {
    double omega{1.0};  // W
    double value{1.0};  // S
};

struct Problem {
    std::vector<double> x;        // scaled grid
    std::vector<double> sqrt_w;   // sqrt of trapezoid weights (scaled)
    std::vector<double> target;   // scaled target samples
    Scales scales;
    std::size_t n_components{1};
};

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double h = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

Eigen::VectorXd to_params(const std::vector<LorentzianComponent>& comps, const Scales& s) {
    Eigen::VectorXd p(3 * comps.size());
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto& c = comps[k];
        p(3 * k + 0) = c.lambda / std::sqrt(s.value * s.omega);
        p(3 * k + 1) = std::log(c.omega_m / s.omega);
        p(3 * k + 2) = logit(c.kappa / c.omega_m);
    }
    return p;
}

CompositeSpectralDensity from_params(const Eigen::VectorXd& p, const Scales& s) {
    CompositeSpectralDensity out;
    const auto n = static_cast<std::size_t>(p.size() / 3);
    for (std::size_t k = 0; k < n; ++k) {
        const double om = s.omega * std::exp(p(3 * k + 1));
        LorentzianComponent c;
        c.lambda = std::abs(p(3 * k + 0)) * std::sqrt(s.value * s.omega);
        c.omega_m = om;
        c.kappa = om * sigmoid(p(3 * k + 2));
        out.components.push_back(c);
    }
    std::sort(out.components.begin(), out.components.end(),
              [](const auto& a, const auto& b) { return a.omega_m < b.omega_m; });
    return out;
}

// Residuals and (optionally) Jacobian in scaled units.
void evaluate(const Problem& pr, const Eigen::VectorXd& p, Eigen::VectorXd& r,
              Eigen::MatrixXd* jac) {
    const std::size_t m = pr.x.size();
    r.resize(static_cast<Eigen::Index>(m));
    if (jac) jac->setZero(static_cast<Eigen::Index>(m), p.size());
    for (std::size_t i = 0; i < m; ++i) {
        const double x = pr.x[i];
        double model = 0.0;
        for (std::size_t k = 0; k < pr.n_components; ++k) {
            const double a = p(3 * k + 0);
            const double om = std::exp(p(3 * k + 1));
            const double sg = sigmoid(p(3 * k + 2));
            const double ka = om * sg;
            const double k2 = ka * ka;
            const double dm = x - om;
            const double dp = x + om;
            const double d1 = k2 + dm * dm;
            const double d2 = k2 + dp * dp;
            const double shape = ka / d1 - ka / d2;
            model += a * a * shape;
            if (jac) {
                const double d_om = a * a * (2.0 * ka * dm / (d1 * d1) + 2.0 * ka * dp / (d2 * d2));
                const double d_ka = a * a * ((d1 - 2.0 * k2) / (d1 * d1) - (d2 - 2.0 * k2) / (d2 * d2));
                const auto row = static_cast<Eigen::Index>(i);
                const auto col = static_cast<Eigen::Index>(3 * k);
                (*jac)(row, col + 0) = -pr.sqrt_w[i] * 2.0 * a * shape;
                (*jac)(row, col + 1) = -pr.sqrt_w[i] * (om * d_om + ka * d_ka);
                (*jac)(row, col + 2) = -pr.sqrt_w[i] * (om * sg * (1.0 - sg) * d_ka);
            }
        }
        r(static_cast<Eigen::Index>(i)) = pr.sqrt_w[i] * (pr.target[i] - model);
    }
}

struct StartResult {
    Eigen::VectorXd params;
    double residual{std::numeric_limits<double>::infinity()};  // scaled E
    std::size_t iterations{0};
    bool converged{false};
    std::vector<double> history;  // scaled E
};

StartResult levenberg_marquardt(const Problem& pr, Eigen::VectorXd p, const FitOptions& opt) {
    StartResult out;
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    evaluate(pr, p, r, &jac);
    double e = r.squaredNorm();
    out.history.push_back(e);
    double mu = 1e-3;
    const double floor_e = 1e-30;

    std::size_t it = 0;
    for (; it < opt.max_iterations; ++it) {
        if (e <= floor_e) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(e, floor_e)) {
            out.converged = true;
            break;
        }
        bool accepted = false;
        while (mu < 1e20) {
            Eigen::MatrixXd damped = a;
            for (Eigen::Index d = 0; d < a.rows(); ++d) {
                damped(d, d) += mu * std::max(a(d, d), 1e-12);
            }
            const Eigen::VectorXd step = damped.ldlt().solve(-g);
            if (!step.allFinite()) {
                mu *= 4.0;
                continue;
            }
            const Eigen::VectorXd trial = p + step;
            Eigen::VectorXd r_trial;
            evaluate(pr, trial, r_trial, nullptr);
            const double e_trial = r_trial.squaredNorm();
            if (std::isfinite(e_trial) && e_trial < e) {
                const double rel = (e - e_trial) / e;
                p = trial;
                e = e_trial;
                out.history.push_back(e);
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
                if (rel < opt.tolerance || step.norm() < 1e-13 * (p.norm() + 1e-13)) {
                    out.converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if (!accepted) {
            // No descent direction left at machine precision: a stationary point.
            out.converged = true;
            break;
        }
        if (out.converged) break;
        evaluate(pr, p, r, &jac);
    }
    out.params = p;
    out.residual = e;
    out.iterations = it;
    return out;
}

// Seeds from the tallest local maxima of the target: width from the half-maximum crossing.
std::vector<LorentzianComponent> peak_seeds(const Problem& pr, std::size_t n) {
    std::vector<std::pair<double, std::size_t>> peaks;
    for (std::size_t i = 1; i + 1 < pr.x.size(); ++i) {
        if (pr.target[i] > 0.0 && pr.target[i] >= pr.target[i - 1] && pr.target[i] > pr.target[i + 1]) {
            peaks.emplace_back(pr.target[i], i);
        }
    }
    std::sort(peaks.begin(), peaks.end(), std::greater<>());
    std::vector<LorentzianComponent> seeds;
    const double w = pr.scales.omega;
    for (std::size_t k = 0; k < std::min(n, peaks.size()); ++k) {
        const std::size_t i = peaks[k].second;
        const double h = pr.target[i];
        std::size_t j = i;
        while (j + 1 < pr.x.size() && pr.target[j] > 0.5 * h) ++j;
        const double om = pr.x[i] * w;
        const double half = std::max((pr.x[j] - pr.x[i]) * w, 1e-3 * om);
        const double ka = std::min(half, 0.5 * om);
        LorentzianComponent c;
        c.omega_m = om;
        c.kappa = ka;
        c.lambda = std::sqrt(h * pr.scales.value * ka);
        seeds.push_back(c);
    }
    return seeds;
}

std::vector<LorentzianComponent> random_seeds(const Problem& pr, std::size_t n, std::uint64_t seed,
                                              std::size_t restart,
                                              const TargetSpectralDensity& target) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (restart + 1));
    std::uniform_real_distribution<double> pos(0.05, 0.75);
    std::uniform_real_distribution<double> logwidth(std::log(1e-3), std::log(0.5));
    std::vector<LorentzianComponent> seeds;
    const double w = pr.scales.omega;
    for (std::size_t k = 0; k < n; ++k) {
        LorentzianComponent c;
        c.omega_m = pos(rng) * w;
        c.kappa = c.omega_m * std::exp(logwidth(rng));
        const double height = std::max(target(c.omega_m), 1e-3 * pr.scales.value);
        c.lambda = std::sqrt(height * c.kappa);
        seeds.push_back(c);
    }
    return seeds;
}

FitResult to_result(const StartResult& s, const Problem& pr, std::size_t restart) {
    FitResult out;
    out.density = from_params(s.params, pr.scales);
    const double unscale = pr.scales.value * pr.scales.value * pr.scales.omega;
    out.residual = s.residual * unscale;
    out.iterations = s.iterations;
    out.restart = restart;
    out.converged = s.converged;
    out.history.reserve(s.history.size());
    for (double e : s.history) out.history.push_back(e * unscale);
    return out;
}

}  // namespace

std::vector<double> default_fit_grid(const TargetSpectralDensity& target, std::size_t points) {
    if (points < 2) throw std::invalid_argument("default_fit_grid: need at least 2 points");
    const double hi = 2.0 * target.support_hint();
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

double fit_objective(const TargetSpectralDensity& target, const CompositeSpectralDensity& model,
                     const std::vector<double>& grid) {
    const auto w = trapezoid_weights(grid);
    double e = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = target(grid[i]) - model(grid[i]);
        e += w[i] * d * d;
    }
    return e;
}

FitResult fit_spectral_density(const TargetSpectralDensity& target, std::size_t n_components,
                               const std::vector<double>& grid,
                               const std::vector<LorentzianComponent>& seeds,
                               const FitOptions& options) {
    if (n_components == 0) throw std::invalid_argument("fit_spectral_density: n_components must be >= 1");
    if (grid.size() < 3 * n_components + 1) {
        throw std::invalid_argument("fit_spectral_density: grid too small for the parameter count");
    }
    if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0) {
        throw std::invalid_argument("fit_spectral_density: grid must be sorted and non-negative");
    }
    if (!seeds.empty() && seeds.size() != n_components) {
        throw std::invalid_argument("fit_spectral_density: need one seed per component");
    }
    for (const auto& s : seeds) s.validate();

    Problem pr;
    pr.n_components = n_components;
    pr.scales.omega = grid.back();
    double peak = 0.0;
    std::vector<double> raw(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        raw[i] = target(grid[i]);
        peak = std::max(peak, std::abs(raw[i]));
    }
    pr.scales.value = peak > 0.0 ? peak : 1.0;
    pr.x.resize(grid.size());
    pr.target.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        pr.x[i] = grid[i] / pr.scales.omega;
        pr.target[i] = raw[i] / pr.scales.value;
    }
    const auto w = trapezoid_weights(pr.x);
    pr.sqrt_w.resize(w.size());
    std::transform(w.begin(), w.end(), pr.sqrt_w.begin(), [](double v) { return std::sqrt(v); });

    std::vector<std::vector<LorentzianComponent>> starts;
    const std::size_t count = std::max<std::size_t>(options.restarts, 1);
    auto from_peaks = peak_seeds(pr, n_components);
    while (from_peaks.size() < n_components) {
        auto extra = random_seeds(pr, 1, options.seed, count + from_peaks.size(), target);
        from_peaks.push_back(extra.front());
    }
    // A narrow Lorentzian seeded a few widths off its peak can collapse into a
    // local minimum, so user seeds always race the peak-picked start.
    if (!seeds.empty()) starts.push_back(seeds);
    starts.push_back(std::move(from_peaks));
    if (seeds.empty()) {
        for (std::size_t k = 1; k < count; ++k) {
            starts.push_back(random_seeds(pr, n_components, options.seed, k, target));
        }
    }

    std::vector<StartResult> results(starts.size());
    auto run = [&](std::size_t k) {
        return levenberg_marquardt(pr, to_params(starts[k], pr.scales), options);
    };
    const std::size_t threads = std::max<std::size_t>(options.threads, 1);
    if (threads == 1 || starts.size() == 1) {
        for (std::size_t k = 0; k < starts.size(); ++k) results[k] = run(k);
    } else {
        for (std::size_t base = 0; base < starts.size(); base += threads) {
            std::vector<std::future<StartResult>> batch;
            for (std::size_t k = base; k < std::min(base + threads, starts.size()); ++k) {
                batch.push_back(std::async(std::launch::async, run, k));
            }
            for (std::size_t k = 0; k < batch.size(); ++k) results[base + k] = batch[k].get();
        }
    }

    // Best converged start by E; ties go to the lowest restart index.
    std::size_t best = results.size();
    std::size_t best_any = 0;
    for (std::size_t k = 0; k < results.size(); ++k) {
        if (results[k].residual < results[best_any].residual) best_any = k;
        if (!results[k].converged) continue;
        if (best == results.size() || results[k].residual < results[best].residual) best = k;
    }
    if (best == results.size()) {
        throw FitError("fit_spectral_density: optimizer did not converge",
                       to_result(results[best_any], pr, best_any));
    }
    return to_result(results[best], pr, best);
}

}  // namespace sbsim::spectral
