#pragma once

#include "pess/dense.hpp"
#include "pess/sparse_matrix.hpp"

#include <span>
#include <string>
#include <vector>

namespace pess {

/// u = [x; y; z] stored contiguously.
class BlockVector {
public:
    BlockVector() = default;
    BlockVector(std::size_t n, std::size_t m, std::size_t p, double fill = 0.0)
        : n_(n), m_(m), p_(p), data_(n + m + p, fill) {}
    BlockVector(std::size_t n, std::size_t m, std::size_t p, Vector data);

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    std::size_t p() const { return p_; }
    std::size_t size() const { return data_.size(); }

    std::span<double> x() { return {data_.data(), n_}; }
    std::span<double> y() { return {data_.data() + n_, m_}; }
    std::span<double> z() { return {data_.data() + n_ + m_, p_}; }
    std::span<const double> x() const { return {data_.data(), n_}; }
    std::span<const double> y() const { return {data_.data() + n_, m_}; }
    std::span<const double> z() const { return {data_.data() + n_ + m_, p_}; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

private:
    std::size_t n_ = 0, m_ = 0, p_ = 0;
    Vector data_;
};

/// [A Bᵀ 0; −B 0 −Cᵀ; 0 C 0] with A n×n, B m×n, C p×m.
class SaddlePointSystem {
public:
    SaddlePointSystem(SparseMatrix A, SparseMatrix B, SparseMatrix C);

    const SparseMatrix& A() const { return A_; }
    const SparseMatrix& B() const { return B_; }
    const SparseMatrix& C() const { return C_; }
    std::size_t n() const { return A_.nrows(); }
    std::size_t m() const { return B_.nrows(); }
    std::size_t p() const { return C_.nrows(); }
    std::size_t size() const { return n() + m() + p(); }

    /// out = 𝒜 in on flat vectors.
    void apply(std::span<const double> in, std::span<double> out) const;
    /// out = 𝒜ᵀ in.
    void apply_transpose(std::span<const double> in, std::span<double> out) const;

private:
    SparseMatrix A_, B_, C_;
};

/// Checks shapes and symmetry of A (1e-12 relative).
SaddlePointSystem assemble(SparseMatrix A, SparseMatrix B, SparseMatrix C);

BlockVector operator_apply(const SaddlePointSystem& sys, const BlockVector& u);
BlockVector rhs_for_ones(const SaddlePointSystem& sys);
BlockVector make_block_vector(const SaddlePointSystem& sys, double fill = 0.0);

enum class ValidationLevel { kShape, kFull };

struct ValidationReport {
    ValidationLevel level = ValidationLevel::kShape;
    bool shape_ok = true;
    bool a_symmetric = true;
    bool a_spd = true;          // only evaluated at kFull
    bool b_full_row_rank = true;
    bool c_full_row_rank = true;
    bool nonsingular = true;    // implied by the three checks above
    std::vector<std::string> messages;

    bool ok() const { return shape_ok && a_symmetric && a_spd && b_full_row_rank && c_full_row_rank; }
};

ValidationReport validate(const SaddlePointSystem& sys, ValidationLevel level);
/// Throws NotPositiveDefinite or FullRankViolation when the report fails.
void require_valid(const ValidationReport& report);

DenseMatrix to_dense(const SaddlePointSystem& sys);
SparseMatrix to_sparse(const SaddlePointSystem& sys);

} // namespace pess
