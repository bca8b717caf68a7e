#pragma once

#include "pess/sparse_matrix.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pess {

/// Row-major dense real matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t nrows, std::size_t ncols, double fill = 0.0)
        : nrows_(nrows), ncols_(ncols), values_(nrows * ncols, fill) {}
    DenseMatrix(std::size_t nrows, std::size_t ncols, std::vector<double> values);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_sparse(const SparseMatrix& M);
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t nrows() const { return nrows_; }
    std::size_t ncols() const { return ncols_; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * ncols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * ncols_ + j]; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * ncols_, ncols_}; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * ncols_, ncols_}; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    std::vector<double> values_;
};

DenseMatrix multiply(const DenseMatrix& X, const DenseMatrix& Y);
DenseMatrix transpose(const DenseMatrix& M);
Vector matvec(const DenseMatrix& M, std::span<const double> x);
double frobenius_norm(const DenseMatrix& M);
double trace(const DenseMatrix& M);
/// Max |M_ij − M_ji| relative to max |M_ij|.
double asymmetry(const DenseMatrix& M);

struct CholeskyFactor {
    std::size_t order = 0;
    DenseMatrix lower;
};

/// S = LLᵀ. Throws NotPositiveDefinite on a non-positive pivot.
CholeskyFactor cholesky(const DenseMatrix& S);
void cholesky_solve_inplace(const CholeskyFactor& F, std::span<double> x);
Vector cholesky_solve(const CholeskyFactor& F, std::span<const double> rhs);
/// Solves L y = b in place, skipping the leading zeros of b.
void forward_substitute(const CholeskyFactor& F, std::span<double> b);
/// Solves Lᵀ x = y in place.
void backward_substitute(const CholeskyFactor& F, std::span<double> y);

/// Partial-pivoting LU, kept for repeated solves.
struct LuFactor {
    DenseMatrix lu;
    std::vector<std::size_t> perm;
};

LuFactor lu_factor(const DenseMatrix& M);
Vector lu_solve(const LuFactor& F, std::span<const double> rhs);
Vector lu_solve(const DenseMatrix& M, std::span<const double> rhs);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending.
std::vector<double> eig_symmetric(const DenseMatrix& S);

struct ComplexSpectrum {
    std::vector<std::complex<double>> eigenvalues;
    double classification_tol = 1e-8;

    bool is_real(const std::complex<double>& z) const;
    std::vector<double> real_parts_of_real() const;
    std::vector<std::complex<double>> nonreal() const;
};

/// Eigenvalues of a general square matrix: Householder Hessenberg reduction
/// followed by Francis double-shift QR.
ComplexSpectrum eig_general(const DenseMatrix& M);

/// Eigenvalues of T⁻¹S for symmetric S and SPD T, ascending.
std::vector<double> gen_eig_spd(const DenseMatrix& S, const DenseMatrix& T);

/// 2-norm condition number from the extreme eigenvalues of MᵀM.
double cond2(const DenseMatrix& M);

} // namespace pess
