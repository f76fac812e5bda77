#include "sbsim/lindblad.hpp"

#include "sbsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbsim::lindblad {

namespace {

constexpr cplx I{0.0, 1.0};

using Triplet = Eigen::Triplet<cplx>;

SparseMatrixC identity(std::size_t n) {
    SparseMatrixC id(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    id.setIdentity();
    return id;
}

SparseMatrixC kron(const SparseMatrixC& a, const SparseMatrixC& b) {
    const Eigen::Index br = b.rows();
    const Eigen::Index bc = b.cols();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
        for (SparseMatrixC::InnerIterator ia(a, i); ia; ++ia) {
            for (Eigen::Index k = 0; k < b.outerSize(); ++k) {
                for (SparseMatrixC::InnerIterator ib(b, k); ib; ++ib) {
                    t.emplace_back(ia.row() * br + ib.row(), ia.col() * bc + ib.col(),
                                   ia.value() * ib.value());
                }
            }
        }
    }
    SparseMatrixC out(a.rows() * br, a.cols() * bc);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SparseMatrixC to_sparse(const Eigen::MatrixXcd& m) {
    return m.sparseView(0.0, 0.0);
}

SparseMatrixC ladder(std::size_t n_max) {
    const auto d = static_cast<Eigen::Index>(n_max + 1);
    SparseMatrixC a(d, d);
    std::vector<Triplet> t;
    for (Eigen::Index n = 1; n < d; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

SparseMatrixC adjoint(const SparseMatrixC& a) {
    return SparseMatrixC(a.adjoint());
}

}  // namespace

// ----------------------------------- specs -----------------------------------

void ModeSpec::validate() const {
    if (n_max < 1) throw std::invalid_argument("ModeSpec: n_max must be >= 1");
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw std::invalid_argument("ModeSpec: nbar must be >= 0");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("ModeSpec: kappa must be >= 0");
    if (!std::isfinite(omega_m) || !std::isfinite(lambda)) {
        throw std::invalid_argument("ModeSpec: omega_m and lambda must be finite");
    }
    if (omega_m < 0.0) throw std::invalid_argument("ModeSpec: omega_m must be >= 0");
}

std::size_t SystemSpec::mode_dimension() const {
    std::size_t d = 1;
    for (const auto& m : modes) {
        if (d > (dimension_cap + 1) * 2) return d * (m.n_max + 1);  // already far over the cap
        d *= m.n_max + 1;
    }
    return d;
}

std::size_t SystemSpec::dimension() const { return 2 * mode_dimension(); }

void SystemSpec::validate() const {
    if (!std::isfinite(spin.epsilon_over_hbar) || !std::isfinite(spin.delta_rabi)) {
        throw std::invalid_argument("SpinParams: epsilon_over_hbar and delta_rabi must be finite");
    }
    for (const auto& m : modes) m.validate();
    for (const auto& j : spin_jumps) {
        if (!(j.rate >= 0.0)) throw std::invalid_argument("SpinJump: rate must be >= 0");
    }
    const auto d = dimension();
    if (d > dimension_cap) throw CapExceeded(d, dimension_cap);
}

// ------------------------------- density matrix ------------------------------

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("DensityMatrix: matrix must be square");
}

StateDiagnostics DensityMatrix::diagnostics() const {
    StateDiagnostics d;
    if (m_.size() == 0) return d;
    d.trace_error = std::abs(m_.trace() - cplx{1.0, 0.0});
    d.hermiticity_error = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

void DensityMatrix::check(double trace_tol, double herm_tol, double eig_tol) const {
    const auto d = diagnostics();
    if (!(d.trace_error <= trace_tol)) {
        throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " + std::to_string(d.trace_error));
    }
    if (!(d.hermiticity_error <= herm_tol)) {
        throw std::invalid_argument("DensityMatrix: not Hermitian (" + std::to_string(d.hermiticity_error) + ")");
    }
    if (!(d.min_eigenvalue >= -eig_tol)) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(d.min_eigenvalue));
    }
}

// -------------------------------- spin states --------------------------------

SpinStateTag parse_spin_state(std::string_view name) {
    if (name == "up") return SpinStateTag::up;
    if (name == "down") return SpinStateTag::down;
    if (name == "plus_x") return SpinStateTag::plus_x;
    if (name == "minus_x") return SpinStateTag::minus_x;
    if (name == "plus_y") return SpinStateTag::plus_y;
    if (name == "minus_y") return SpinStateTag::minus_y;
    throw std::invalid_argument("unknown spin state '" + std::string(name) + "'");
}

std::string_view to_string(SpinStateTag tag) {
    switch (tag) {
        case SpinStateTag::up: return "up";
        case SpinStateTag::down: return "down";
        case SpinStateTag::plus_x: return "plus_x";
        case SpinStateTag::minus_x: return "minus_x";
        case SpinStateTag::plus_y: return "plus_y";
        case SpinStateTag::minus_y: return "minus_y";
    }
    return "?";
}

Eigen::Vector2cd spin_ket(SpinStateTag tag) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (tag) {
        case SpinStateTag::up: return {1.0, 0.0};
        case SpinStateTag::down: return {0.0, 1.0};
        case SpinStateTag::plus_x: return {r, r};
        case SpinStateTag::minus_x: return {r, -r};
        case SpinStateTag::plus_y: return {cplx{r, 0.0}, cplx{0.0, r}};
        case SpinStateTag::minus_y: return {cplx{r, 0.0}, cplx{0.0, -r}};
    }
    return {1.0, 0.0};
}

Eigen::Matrix2cd spin_projector(SpinStateTag tag) {
    const Eigen::Vector2cd k = spin_ket(tag);
    return k * k.adjoint();
}

Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Eigen::Matrix2cd pauli_y() {
    Eigen::Matrix2cd m;
    m << 0.0, -I, I, 0.0;
    return m;
}

Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

DensityMatrix thermal_state(double nbar, std::size_t n_max) {
    if (!(nbar >= 0.0)) throw std::invalid_argument("thermal_state: nbar must be >= 0");
    const double ratio = nbar / (nbar + 1.0);
    Eigen::VectorXd p(static_cast<Eigen::Index>(n_max + 1));
    double w = 1.0;
    for (Eigen::Index n = 0; n < p.size(); ++n) {
        p(n) = w;
        w *= ratio;
    }
    p /= p.sum();
    return DensityMatrix(p.cast<cplx>().asDiagonal().toDenseMatrix());
}

DensityMatrix product_state(const Eigen::Matrix2cd& spin, const SystemSpec& spec) {
    spec.validate();
    Eigen::MatrixXcd rho = spin;
    for (const auto& m : spec.modes) {
        const Eigen::MatrixXcd th = thermal_state(m.nbar, m.n_max).matrix();
        Eigen::MatrixXcd next(rho.rows() * th.rows(), rho.cols() * th.cols());
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            for (Eigen::Index j = 0; j < rho.cols(); ++j) {
                next.block(i * th.rows(), j * th.cols(), th.rows(), th.cols()) = rho(i, j) * th;
            }
        }
        rho = std::move(next);
    }
    return DensityMatrix(std::move(rho));
}

// --------------------------------- operators ---------------------------------

SparseMatrixC spin_operator(const Eigen::Matrix2cd& op, const SystemSpec& spec) {
    return kron(to_sparse(op), identity(spec.mode_dimension()));
}

SparseMatrixC annihilation(std::size_t mode, const SystemSpec& spec) {
    if (mode >= spec.modes.size()) throw std::out_of_range("annihilation: mode index out of range");
    std::size_t before = 1;
    std::size_t after = 1;
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
        if (k < mode) before *= spec.modes[k].n_max + 1;
        if (k > mode) after *= spec.modes[k].n_max + 1;
    }
    return kron(identity(2), kron(identity(before), kron(ladder(spec.modes[mode].n_max), identity(after))));
}

SparseMatrixC number_operator(std::size_t mode, const SystemSpec& spec) {
    const SparseMatrixC a = annihilation(mode, spec);
    return SparseMatrixC(adjoint(a) * a);
}

SparseMatrixC build_hamiltonian(const SystemSpec& spec) {
    spec.validate();
    const Eigen::Matrix2cd hs = 0.5 * spec.spin.epsilon_over_hbar * pauli_z() -
                                0.5 * spec.spin.delta_rabi * pauli_x();
    SparseMatrixC h = spin_operator(hs, spec);
    const SparseMatrixC sz = spin_operator(pauli_z(), spec);
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
        const auto& m = spec.modes[k];
        const SparseMatrixC a = annihilation(k, spec);
        const SparseMatrixC ad = adjoint(a);
        const SparseMatrixC x = a + ad;
        h += SparseMatrixC(-0.5 * m.lambda * (sz * x)) + SparseMatrixC(m.omega_m * (ad * a));
    }
    h.prune(cplx{0.0, 0.0});
    return h;
}

SparseMatrixC left_right_superop(const SparseMatrixC& a, const SparseMatrixC& b) {
    return kron(SparseMatrixC(b.conjugate()), a);
}

SparseMatrixC lindblad_superop(const SparseMatrixC& c, double rate) {
    const auto n = static_cast<std::size_t>(c.rows());
    const SparseMatrixC cdc = adjoint(c) * c;
    const SparseMatrixC id = identity(n);
    SparseMatrixC out = kron(SparseMatrixC(c.conjugate()), c);
    out -= 0.5 * kron(id, cdc);
    out -= 0.5 * kron(SparseMatrixC(cdc.transpose()), id);
    return SparseMatrixC(rate * out);
}

SparseMatrixC build_dissipator(std::size_t mode, const SystemSpec& spec) {
    spec.validate();
    const auto& m = spec.modes.at(mode);
    const auto n = static_cast<Eigen::Index>(spec.dimension());
    SparseMatrixC out(n * n, n * n);
    if (m.kappa == 0.0) return out;
    // κ(n̄+1)[aρa† − a†aρ] + κn̄[a†ρa − aa†ρ] + H.c. = 2κ(n̄+1)D[a] + 2κn̄D[a†]
    const SparseMatrixC a = annihilation(mode, spec);
    out += lindblad_superop(a, 2.0 * m.kappa * (m.nbar + 1.0));
    if (m.nbar > 0.0) out += lindblad_superop(adjoint(a), 2.0 * m.kappa * m.nbar);
    out.prune(cplx{0.0, 0.0});
    return out;
}

SparseMatrixC build_liouvillian(const SystemSpec& spec) {
    const SparseMatrixC h = build_hamiltonian(spec);
    const auto n = spec.dimension();
    const SparseMatrixC id = identity(n);
    SparseMatrixC l = -I * (kron(id, h) - kron(SparseMatrixC(h.transpose()), id));
    for (std::size_t k = 0; k < spec.modes.size(); ++k) l += build_dissipator(k, spec);
    for (const auto& j : spec.spin_jumps) {
        if (j.rate > 0.0) l += lindblad_superop(spin_operator(j.op, spec), j.rate);
    }
    l.prune(cplx{0.0, 0.0});
    l.makeCompressed();
    return l;
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    if (v.size() != d * d) throw std::invalid_argument("unvectorize: size mismatch");
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

// --------------------------------- evolution ---------------------------------

namespace {

void check_grid(const std::vector<double>& times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0) {
            throw std::invalid_argument("time grid must be finite and start at t >= 0");
        }
        if (i > 0 && times[i] < times[i - 1]) throw std::invalid_argument("time grid must be ascending");
    }
}

}  // namespace

void evolve(const SystemSpec& spec, const DensityMatrix& rho0, const std::vector<double>& times,
            const Observer& observer, const EvolveOptions& options) {
    spec.validate();
    check_grid(times);
    const auto dim = spec.dimension();
    if (rho0.dim() != dim) throw std::invalid_argument("evolve: rho0 dimension does not match the system");
    const ExpmAction prop(build_liouvillian(spec), options.tolerance);

    Eigen::VectorXcd v = vectorize(rho0.matrix());
    double t_prev = 0.0;
    DensityMatrix rho;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dt = times[i] - t_prev;
        if (dt > 0.0) v = prop.apply(dt, v);
        t_prev = times[i];
        if (!v.allFinite()) throw PropagationError(i, times[i], "non-finite state");
        rho = DensityMatrix(unvectorize(v, dim));
        StateDiagnostics diag;
        if (options.diagnostics) {
            diag = rho.diagnostics();
        } else {
            diag.trace_error = std::abs(rho.matrix().trace() - cplx{1.0, 0.0});
        }
        if (!(diag.trace_error <= options.blowup_tolerance)) {
            throw PropagationError(i, times[i], "trace error " + std::to_string(diag.trace_error));
        }
        if (observer) observer(EvolveStep{i, times[i], rho, diag});
    }
}

std::vector<DensityMatrix> evolve(const SystemSpec& spec, const DensityMatrix& rho0,
                                  const std::vector<double>& times, const EvolveOptions& options) {
    std::vector<DensityMatrix> out;
    out.reserve(times.size());
    evolve(spec, rho0, times, [&](const EvolveStep& s) { out.push_back(s.rho); }, options);
    return out;
}

void evolve_operator(const ExpmAction& propagator, const Eigen::MatrixXcd& x0,
                     const std::vector<double>& times,
                     const std::function<void(std::size_t, const Eigen::MatrixXcd&)>& observer) {
    check_grid(times);
    const auto dim = static_cast<std::size_t>(x0.rows());
    Eigen::VectorXcd v = vectorize(x0);
    double t_prev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dt = times[i] - t_prev;
        if (dt > 0.0) v = propagator.apply(dt, v);
        t_prev = times[i];
        if (!v.allFinite()) throw PropagationError(i, times[i], "non-finite state");
        observer(i, unvectorize(v, dim));
    }
}

double expect(const Eigen::MatrixXcd& observable, const DensityMatrix& rho) {
    if (observable.rows() != rho.matrix().rows() || observable.cols() != rho.matrix().cols()) {
        throw std::invalid_argument("expect: dimension mismatch");
    }
    const cplx v = observable.transpose().cwiseProduct(rho.matrix()).sum();
    if (!(std::abs(v.imag()) < 1e-8)) {
        throw NumericalError("expect: imaginary part " + std::to_string(v.imag()) + " signals a corrupted state");
    }
    return v.real();
}

double expect(const SparseMatrixC& observable, const DensityMatrix& rho) {
    const auto& r = rho.matrix();
    if (observable.rows() != r.rows() || observable.cols() != r.cols()) {
        throw std::invalid_argument("expect: dimension mismatch");
    }
    cplx v{0.0, 0.0};
    for (Eigen::Index k = 0; k < observable.outerSize(); ++k) {
        for (SparseMatrixC::InnerIterator it(observable, k); it; ++it) v += it.value() * r(it.col(), it.row());
    }
    if (!(std::abs(v.imag()) < 1e-8)) {
        throw NumericalError("expect: imaginary part " + std::to_string(v.imag()) + " signals a corrupted state");
    }
    return v.real();
}

Eigen::Matrix2cd partial_trace_spin(const Eigen::MatrixXcd& rho) {
    if (rho.rows() != rho.cols() || rho.rows() % 2 != 0) {
        throw std::invalid_argument("partial_trace_spin: need a square matrix of even dimension");
    }
    const Eigen::Index d = rho.rows() / 2;
    Eigen::Matrix2cd out;
    for (Eigen::Index a = 0; a < 2; ++a) {
        for (Eigen::Index b = 0; b < 2; ++b) out(a, b) = rho.block(a * d, b * d, d, d).trace();
    }
    return out;
}

std::vector<SigmaZPoint> sigma_z_trajectory(const SystemSpec& spec, const DensityMatrix& rho0,
                                            const std::vector<double>& times,
                                            const EvolveOptions& options) {
    std::vector<SigmaZPoint> out;
    out.reserve(times.size());
    const Eigen::Matrix2cd sz = pauli_z();
    evolve(
        spec, rho0, times,
        [&](const EvolveStep& s) {
            const Eigen::Matrix2cd r = partial_trace_spin(s.rho.matrix());
            const cplx v = (sz * r).trace();
            if (!(std::abs(v.imag()) < 1e-8)) {
                throw PropagationError(s.index, s.time, "complex <sigma_z>");
            }
            out.push_back({s.time, v.real(), s.diagnostics.trace_error, s.diagnostics.min_eigenvalue,
                           s.diagnostics.hermiticity_error});
        },
        options);
    return out;
}

TruncationAudit truncation_audit(const SystemSpec& spec, const Eigen::Matrix2cd& spin0,
                                 const std::vector<double>& times, std::size_t extra,
                                 const EvolveOptions& options) {
    SystemSpec big = spec;
    for (auto& m : big.modes) m.n_max += extra;
    big.dimension_cap = std::max(spec.dimension_cap, big.dimension());
    EvolveOptions quiet = options;
    quiet.diagnostics = false;
    const auto a = sigma_z_trajectory(spec, product_state(spin0, spec), times, quiet);
    const auto b = sigma_z_trajectory(big, product_state(spin0, big), times, quiet);
    TruncationAudit out;
    out.extra_levels = extra;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.max_deviation = std::max(out.max_deviation, std::abs(a[i].sigma_z - b[i].sigma_z));
    }
    return out;
}

std::size_t count_zero_crossings(const std::vector<double>& values) {
    std::size_t n = 0;
    int last = 0;
    for (double v : values) {
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (last != 0 && s != last) ++n;
        last = s;
    }
    return n;
}

std::vector<double> uniform_grid(double t_end, std::size_t n_steps) {
    if (n_steps == 0) throw std::invalid_argument("uniform_grid: need at least one step");
    std::vector<double> t(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        t[i] = t_end * static_cast<double>(i) / static_cast<double>(n_steps);
    }
    return t;
}

}  // namespace sbsim::lindblad
