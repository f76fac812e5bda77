// Action of the exponential of a sparse complex matrix on a vector.
//
// Truncated Taylor series with scaling (Al-Mohy & Higham 2011). The degree m
// and number of sub-steps s come from the 1-norm of the shifted matrix, so the
// cost per call grows roughly linearly in ‖tA‖₁.

#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sbsim {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

class ExpmAction {
public:
    // tol is the relative truncation tolerance of each Taylor series.
    explicit ExpmAction(SparseMatrixC a, double tol = 1e-15);

    // exp(t A) v
    Eigen::VectorXcd apply(double t, const Eigen::VectorXcd& v) const;

    const SparseMatrixC& matrix() const noexcept { return shifted_; }
    cplx shift() const noexcept { return mu_; }
    double norm1() const noexcept { return norm1_; }

    // Matrix-vector products spent by the last apply() call on this thread.
    static std::size_t last_matvecs() noexcept;

private:
    SparseMatrixC shifted_;  // A - mu I
    cplx mu_{0.0, 0.0};
    double norm1_{0.0};
    double tol_;
};

// Dense reference: exp(A) by scaling and squaring with Padé approximants.
Eigen::MatrixXcd expm_dense(const Eigen::MatrixXcd& a);

}  // namespace sbsim
