#include <doctest.h>

#include <sbsim/expm.hpp>

#include <random>

using namespace sbsim;

namespace {

SparseMatrixC random_sparse(Eigen::Index n, double density, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || pick(rng) < density) trip.emplace_back(i, j, scale * cplx{u(rng), u(rng)});
        }
    }
    SparseMatrixC a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

Eigen::VectorXcd random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
    return v;
}

}  // namespace

TEST_CASE("expm action agrees with dense exponentiation") {
    std::mt19937_64 rng(42);
    for (Eigen::Index n : {1, 2, 5, 16, 40, 64}) {
        for (double scale : {0.1, 3.0, 40.0}) {
            const auto a = random_sparse(n, 0.2, scale, rng);
            const auto v = random_vector(n, rng);
            const ExpmAction prop(a);
            for (double t : {0.0, 0.37, 1.0}) {
                const Eigen::MatrixXcd dense = Eigen::MatrixXcd(a) * t;
                const Eigen::VectorXcd want = expm_dense(dense) * v;
                const Eigen::VectorXcd got = prop.apply(t, v);
                CAPTURE(n);
                CAPTURE(scale);
                CHECK((got - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
            }
        }
    }
}

TEST_CASE("dense oracle on closed forms") {
    // exp of a nilpotent matrix truncates; exp(iθσ_y) is a rotation.
    Eigen::Matrix3cd n = Eigen::Matrix3cd::Zero();
    n(0, 1) = 1.0;
    n(1, 2) = 1.0;
    Eigen::Matrix3cd want = Eigen::Matrix3cd::Identity() + n;
    want(0, 2) = 0.5;
    CHECK((expm_dense(n) - want).norm() < 1e-15);

    const double th = 0.8;
    Eigen::Matrix2cd r;
    r << 0.0, th, -th, 0.0;
    Eigen::Matrix2cd rot;
    rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
    CHECK((expm_dense(r) - rot).norm() < 1e-15);
}

TEST_CASE("semigroup property") {
    std::mt19937_64 rng(5);
    const auto a = random_sparse(48, 0.1, 5.0, rng);
    const auto v = random_vector(48, rng);
    const ExpmAction prop(a);
    const double h = 0.21;
    const Eigen::VectorXcd once = prop.apply(2.0 * h, v);
    const Eigen::VectorXcd twice = prop.apply(h, prop.apply(h, v));
    CHECK((once - twice).norm() <= 1e-12 * once.norm());
}

TEST_CASE("anti-Hermitian generators preserve the norm") {
    std::mt19937_64 rng(9);
    const auto b = random_sparse(30, 0.3, 10.0, rng);
    const SparseMatrixC h = 0.5 * (SparseMatrixC(b) + SparseMatrixC(b.adjoint()));
    const ExpmAction prop(SparseMatrixC(cplx{0.0, -1.0} * h));
    Eigen::VectorXcd v = random_vector(30, rng).normalized();
    for (int i = 0; i < 10; ++i) v = prop.apply(0.7, v);
    CHECK(std::abs(v.norm() - 1.0) < 1e-12);
}

TEST_CASE("trace shift and work counter") {
    SparseMatrixC a(3, 3);
    a.insert(0, 0) = 2.0;
    a.insert(1, 1) = 2.0;
    a.insert(2, 2) = 2.0;
    const ExpmAction prop(a);
    CHECK(prop.shift() == cplx{2.0, 0.0});
    CHECK(prop.norm1() == 0.0);
    const Eigen::VectorXcd v = Eigen::VectorXcd::Ones(3);
    const Eigen::VectorXcd r = prop.apply(1.5, v);
    CHECK((r - std::exp(3.0) * v).norm() < 1e-12 * r.norm());
    CHECK(ExpmAction::last_matvecs() == 0);
}
