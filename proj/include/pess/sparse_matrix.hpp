#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pess {

using Vector = std::vector<double>;

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Real matrix in canonical compressed sparse row form: column indices
/// strictly increase within a row and no stored value is exactly zero.
class SparseMatrix {
public:
    SparseMatrix() : row_offsets_(1, 0) {}

    /// Adopts raw CSR arrays; throws unless they are already canonical.
    SparseMatrix(std::size_t nrows, std::size_t ncols,
                 std::vector<std::size_t> row_offsets,
                 std::vector<std::size_t> col_indices,
                 std::vector<double> values);

    /// Duplicates are summed, exact zeros dropped.
    static SparseMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                      std::vector<Triplet> entries);
    static SparseMatrix identity(std::size_t n);
    static SparseMatrix zero(std::size_t nrows, std::size_t ncols);
    static SparseMatrix diagonal(std::span<const double> diag);

    std::size_t nrows() const { return nrows_; }
    std::size_t ncols() const { return ncols_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<std::size_t>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry lookup by binary search within the row.
    double at(std::size_t i, std::size_t j) const;

    bool operator==(const SparseMatrix& other) const = default;

private:
    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// y = M x. Summation runs over ascending column index.
void matvec(const SparseMatrix& M, std::span<const double> x, std::span<double> y);
Vector matvec(const SparseMatrix& M, std::span<const double> x);

/// y = Mᵀ x without forming the transpose.
void matvec_transpose(const SparseMatrix& M, std::span<const double> x, std::span<double> y);
Vector matvec_transpose(const SparseMatrix& M, std::span<const double> x);

SparseMatrix transpose(const SparseMatrix& M);
SparseMatrix kron(const SparseMatrix& X, const SparseMatrix& Y);
SparseMatrix tridiag(std::size_t n, double sub, double diag, double super);
SparseMatrix spmm(const SparseMatrix& X, const SparseMatrix& Y);

/// alpha X + beta Y.
SparseMatrix add(const SparseMatrix& X, const SparseMatrix& Y, double alpha = 1.0, double beta = 1.0);
SparseMatrix scale(const SparseMatrix& M, double c);

/// Block matrix from a row-major grid of blocks; null entries are zero blocks.
SparseMatrix block_assemble(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                            const std::vector<std::size_t>& row_sizes,
                            const std::vector<std::size_t>& col_sizes);

struct NormEstimate {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// 2-norm by power iteration on MᵀM seeded with ones/√n.
NormEstimate norm2_estimate(const SparseMatrix& M, double tol = 1e-10, std::size_t maxit = 5000);

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration with the same seeding; equals its 2-norm.
NormEstimate spsd_norm_estimate(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                                std::size_t n, double tol = 1e-10, std::size_t maxit = 5000);

double frobenius_norm(const SparseMatrix& M);

/// Max relative entrywise deviation of M from its transpose.
double asymmetry(const SparseMatrix& M);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace pess
