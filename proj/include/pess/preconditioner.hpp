#pragma once

#include "pess/dense.hpp"
#include "pess/saddle_system.hpp"
#include "pess/sparse_matrix.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>

namespace pess {

/// Description of an SPD block (or the zero block): scaled identity or
/// diagonal vector, general sparse SPD matrix, or zero.
class SpdOperator {
public:
    enum class Kind { kZero, kDiagonal, kSparse };

    SpdOperator() = default;
    static SpdOperator zero(std::size_t n);
    static SpdOperator scaled_identity(std::size_t n, double c);
    static SpdOperator diagonal(Vector d);
    static SpdOperator sparse(SparseMatrix M);

    Kind kind() const { return kind_; }
    std::size_t order() const { return order_; }
    bool is_zero() const { return kind_ == Kind::kZero; }
    const Vector& diag() const { return diag_; }

    /// y = Λ x
    void apply(std::span<const double> x, std::span<double> y) const;
    SparseMatrix to_sparse() const;
    DenseMatrix to_dense() const;
    SpdOperator scaled(double c) const;
    double frobenius_norm() const;

private:
    Kind kind_ = Kind::kZero;
    std::size_t order_ = 0;
    Vector diag_;
    SparseMatrix matrix_;
};

/// Solver for an SPD block: elementwise for diagonals, dense Cholesky otherwise.
class SpdSolver {
public:
    SpdSolver() = default;
    explicit SpdSolver(const SpdOperator& op);
    void solve_inplace(std::span<double> x) const;
    std::size_t order() const { return order_; }

private:
    std::size_t order_ = 0;
    Vector inv_diag_;
    std::optional<CholeskyFactor> factor_;
};

enum class GssKind { kPess, kLpess, kSs, kRss, kEgss, kRpgss };

std::string to_string(GssKind kind);
GssKind gss_kind_from_string(const std::string& name);

/// (Λ1, Λ2, Λ3, s, t): P = [Λ1+tA, sBᵀ, 0; −sB, Λ2, −sCᵀ; 0, sC, Λ3].
struct GssConfig {
    GssKind kind = GssKind::kPess;
    SpdOperator lambda1, lambda2, lambda3;
    double s = 1.0;
    double t = 1.0;

    bool is_pess_instance() const { return t == s && !lambda1.is_zero(); }
};

/// Kind-specific inputs for make_config. Unused fields are ignored.
struct GssParams {
    double s = 1.0;
    double alpha = 1.0, beta = 1.0, gamma = 1.0;
    // PESS / LPESS blocks
    SpdOperator lambda1, lambda2, lambda3;
    // EGSS / RPGSS weights
    SpdOperator P, Q, W;
    // LPESS only: use the unit coefficient t = 1 instead of t = s
    bool lpess_unit_coefficient = false;
};

GssConfig make_config(GssKind kind, std::size_t n, std::size_t m, std::size_t p, const GssParams& params);

/// Anything that can apply w = P⁻¹ r.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual std::size_t size() const = 0;
    virtual void apply(std::span<const double> r, std::span<double> w) const = 0;
    virtual std::string name() const = 0;
    /// Whether Pᵀ = D P D with D = diag(I, −I, I); used by transpose-free condition estimates.
    virtual bool sign_symmetric() const { return true; }
    /// y = P x, when the preconditioner can form it.
    virtual void forward(std::span<const double> x, std::span<double> y) const;
};

enum class BuildStrategy { kDense, kInnerCg };

/// Precomputed inner factorizations for the block elimination solve.
class GssPreconditioner : public Preconditioner {
public:
    GssPreconditioner(const SaddlePointSystem& sys, GssConfig cfg, BuildStrategy strategy = BuildStrategy::kDense);

    std::size_t size() const override { return n_ + m_ + p_; }
    void apply(std::span<const double> r, std::span<double> w) const override;
    std::string name() const override { return to_string(cfg_.kind); }

    BlockVector apply(const BlockVector& r) const;
    /// y = P x (forward product).
    void multiply(std::span<const double> x, std::span<double> y) const;
    void forward(std::span<const double> x, std::span<double> y) const override { multiply(x, y); }

    const GssConfig& config() const { return cfg_; }
    const DenseMatrix& xhat() const { return xhat_; }
    /// Dense Ã; empty for the inner-CG strategy.
    const DenseMatrix& ablock() const { return ablock_; }
    std::size_t inner_cg_iterations() const { return cg_iterations_; }

private:
    void solve_ablock(std::span<const double> v, std::span<double> w) const;
    void ablock_matvec(std::span<const double> x, std::span<double> y) const;

    GssConfig cfg_;
    BuildStrategy strategy_;
    std::size_t n_, m_, p_;
    SparseMatrix A_, B_, C_;
    DenseMatrix xhat_, ablock_;
    CholeskyFactor xhat_factor_, ablock_factor_;
    SpdSolver lambda3_solver_;
    Vector cg_diag_;
    mutable std::size_t cg_iterations_ = 0;
};

/// build(sys, cfg, strategy).
std::unique_ptr<GssPreconditioner> build(const SaddlePointSystem& sys, const GssConfig& cfg,
                                         BuildStrategy strategy = BuildStrategy::kDense);

/// Exact block diagonal diag(A, S, C S⁻¹ Cᵀ) with S = B A⁻¹ Bᵀ.
class BdPreconditioner : public Preconditioner {
public:
    explicit BdPreconditioner(const SaddlePointSystem& sys);
    std::size_t size() const override { return n_ + m_ + p_; }
    void apply(std::span<const double> r, std::span<double> w) const override;
    std::string name() const override { return "bd"; }
    BlockVector apply(const BlockVector& r) const;
    void forward(std::span<const double> x, std::span<double> y) const override;
    const DenseMatrix& schur() const { return schur_; }

private:
    std::size_t n_, m_, p_;
    SparseMatrix A_;
    CholeskyFactor a_factor_, s_factor_, css_factor_;
    DenseMatrix schur_, css_;
};

std::unique_ptr<BdPreconditioner> build_bd(const SaddlePointSystem& sys);

/// Exact inverse of a dense matrix through LU; an oracle preconditioner.
class DenseLuPreconditioner : public Preconditioner {
public:
    explicit DenseLuPreconditioner(const DenseMatrix& M, bool sign_symmetric = true);
    std::size_t size() const override { return factor_.perm.size(); }
    void apply(std::span<const double> r, std::span<double> w) const override;
    std::string name() const override { return "dense-lu"; }
    bool sign_symmetric() const override { return sign_symmetric_; }
    void forward(std::span<const double> x, std::span<double> y) const override;

private:
    DenseMatrix matrix_;
    LuFactor factor_;
    bool sign_symmetric_;
};

/// Explicit P of a configuration (desk scale).
DenseMatrix to_dense_preconditioner(const SaddlePointSystem& sys, const GssConfig& cfg);
/// Explicit Q of the splitting 𝒜 = P − Q: Σ − (1−s)𝒜 for PESS instances, P − 𝒜 otherwise.
DenseMatrix to_dense_splitting_q(const SaddlePointSystem& sys, const GssConfig& cfg);
/// ‖(P − Q) − 𝒜‖_F.
double splitting_residual(const SaddlePointSystem& sys, const GssConfig& cfg);

} // namespace pess
