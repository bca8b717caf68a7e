#include "pess/preconditioner.hpp"

#include "pess/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pess {

// ---- SpdOperator ----

SpdOperator SpdOperator::zero(std::size_t n) {
    SpdOperator op;
    op.kind_ = Kind::kZero;
    op.order_ = n;
    return op;
}

SpdOperator SpdOperator::scaled_identity(std::size_t n, double c) {
    return diagonal(Vector(n, c));
}

SpdOperator SpdOperator::diagonal(Vector d) {
    for (double v : d)
        require<NotPositiveDefinite>(v > 0.0 && std::isfinite(v), "diagonal SPD block has a non-positive entry");
    SpdOperator op;
    op.kind_ = Kind::kDiagonal;
    op.order_ = d.size();
    op.diag_ = std::move(d);
    return op;
}

SpdOperator SpdOperator::sparse(SparseMatrix M) {
    require<DimensionMismatch>(M.nrows() == M.ncols(), "SPD block must be square");
    require<NotPositiveDefinite>(asymmetry(M) <= 1e-12, "SPD block is not symmetric");
    SpdOperator op;
    op.kind_ = Kind::kSparse;
    op.order_ = M.nrows();
    op.matrix_ = std::move(M);
    return op;
}

void SpdOperator::apply(std::span<const double> x, std::span<double> y) const {
    require<DimensionMismatch>(x.size() == order_ && y.size() == order_, "SpdOperator::apply: dimension mismatch");
    switch (kind_) {
    case Kind::kZero:
        std::fill(y.begin(), y.end(), 0.0);
        break;
    case Kind::kDiagonal:
        for (std::size_t i = 0; i < order_; ++i) y[i] = diag_[i] * x[i];
        break;
    case Kind::kSparse:
        matvec(matrix_, x, y);
        break;
    }
}

SparseMatrix SpdOperator::to_sparse() const {
    switch (kind_) {
    case Kind::kZero: return SparseMatrix::zero(order_, order_);
    case Kind::kDiagonal: return SparseMatrix::diagonal(diag_);
    case Kind::kSparse: return matrix_;
    }
    return {};
}

DenseMatrix SpdOperator::to_dense() const {
    return DenseMatrix::from_sparse(to_sparse());
}

SpdOperator SpdOperator::scaled(double c) const {
    switch (kind_) {
    case Kind::kZero: return *this;
    case Kind::kDiagonal: {
        Vector d = diag_;
        for (auto& v : d) v *= c;
        return diagonal(std::move(d));
    }
    case Kind::kSparse: return sparse(scale(matrix_, c));
    }
    return *this;
}

double SpdOperator::frobenius_norm() const {
    switch (kind_) {
    case Kind::kZero: return 0.0;
    case Kind::kDiagonal: return norm2(diag_);
    case Kind::kSparse: return pess::frobenius_norm(matrix_);
    }
    return 0.0;
}

SpdSolver::SpdSolver(const SpdOperator& op) : order_(op.order()) {
    switch (op.kind()) {
    case SpdOperator::Kind::kZero:
        throw NotPositiveDefinite("cannot factor a zero block");
    case SpdOperator::Kind::kDiagonal:
        inv_diag_.resize(order_);
        for (std::size_t i = 0; i < order_; ++i) inv_diag_[i] = 1.0 / op.diag()[i];
        break;
    case SpdOperator::Kind::kSparse:
        factor_ = cholesky(op.to_dense());
        break;
    }
}

void SpdSolver::solve_inplace(std::span<double> x) const {
    require<DimensionMismatch>(x.size() == order_, "SpdSolver: dimension mismatch");
    if (factor_) {
        cholesky_solve_inplace(*factor_, x);
    } else {
        for (std::size_t i = 0; i < order_; ++i) x[i] *= inv_diag_[i];
    }
}

// ---- configurations ----

std::string to_string(GssKind kind) {
    switch (kind) {
    case GssKind::kPess: return "pess";
    case GssKind::kLpess: return "lpess";
    case GssKind::kSs: return "ss";
    case GssKind::kRss: return "rss";
    case GssKind::kEgss: return "egss";
    case GssKind::kRpgss: return "rpgss";
    }
    return "?";
}

GssKind gss_kind_from_string(const std::string& name) {
    for (GssKind k : {GssKind::kPess, GssKind::kLpess, GssKind::kSs, GssKind::kRss, GssKind::kEgss, GssKind::kRpgss})
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown shift-splitting kind '" + name + "'");
}

namespace {

SpdOperator or_identity(const SpdOperator& op, std::size_t n) {
    if (op.order() == 0 && n > 0) return SpdOperator::scaled_identity(n, 1.0);
    require<DimensionMismatch>(op.order() == n, "SPD block has the wrong order");
    require<NotPositiveDefinite>(!op.is_zero(), "SPD block may not be zero");
    return op;
}

SpdOperator checked(const SpdOperator& op, std::size_t n, const char* what) {
    require<DimensionMismatch>(op.order() == n, std::string(what) + " has the wrong order");
    require<NotPositiveDefinite>(!op.is_zero(), std::string(what) + " must be SPD, not zero");
    return op;
}

} // namespace

GssConfig make_config(GssKind kind, std::size_t n, std::size_t m, std::size_t p, const GssParams& prm) {
    GssConfig c;
    c.kind = kind;
    auto positive = [](double v, const char* what) {
        require<InvalidArgument>(v > 0.0 && std::isfinite(v), std::string(what) + " must be positive");
    };
    switch (kind) {
    case GssKind::kPess:
        positive(prm.s, "s");
        c.lambda1 = checked(prm.lambda1, n, "Lambda1");
        c.lambda2 = checked(prm.lambda2, m, "Lambda2");
        c.lambda3 = checked(prm.lambda3, p, "Lambda3");
        c.s = c.t = prm.s;
        break;
    case GssKind::kLpess:
        positive(prm.s, "s");
        c.lambda1 = SpdOperator::zero(n);
        c.lambda2 = checked(prm.lambda2, m, "Lambda2");
        c.lambda3 = checked(prm.lambda3, p, "Lambda3");
        c.s = prm.s;
        c.t = prm.lpess_unit_coefficient ? 1.0 : prm.s;
        break;
    case GssKind::kSs:
        positive(prm.alpha, "alpha");
        c.lambda1 = SpdOperator::scaled_identity(n, prm.alpha / 2);
        c.lambda2 = SpdOperator::scaled_identity(m, prm.alpha / 2);
        c.lambda3 = SpdOperator::scaled_identity(p, prm.alpha / 2);
        c.s = c.t = 0.5;
        break;
    case GssKind::kRss:
        positive(prm.alpha, "alpha");
        c.lambda1 = SpdOperator::zero(n);
        c.lambda2 = SpdOperator::scaled_identity(m, prm.alpha / 2);
        c.lambda3 = SpdOperator::scaled_identity(p, prm.alpha / 2);
        c.s = c.t = 0.5;
        break;
    case GssKind::kEgss:
        positive(prm.alpha, "alpha");
        positive(prm.beta, "beta");
        positive(prm.gamma, "gamma");
        c.lambda1 = or_identity(prm.P, n).scaled(prm.alpha / 2);
        c.lambda2 = or_identity(prm.Q, m).scaled(prm.beta / 2);
        c.lambda3 = or_identity(prm.W, p).scaled(prm.gamma / 2);
        c.s = c.t = 0.5;
        break;
    case GssKind::kRpgss:
        positive(prm.beta, "beta");
        positive(prm.gamma, "gamma");
        c.lambda1 = SpdOperator::zero(n);
        c.lambda2 = or_identity(prm.Q, m).scaled(prm.beta);
        c.lambda3 = or_identity(prm.W, p).scaled(prm.gamma);
        c.s = c.t = 1.0;
        break;
    }
    return c;
}

// ---- GssPreconditioner ----

namespace {

void add_scaled_sparse(DenseMatrix& D, const SparseMatrix& M, double c) {
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t k = M.row_offsets()[i]; k < M.row_offsets()[i + 1]; ++k)
            D(i, M.col_indices()[k]) += c * M.values()[k];
}

// D += c · Y Yᵀ for row-major Y, blocked over rows for cache reuse.
void add_gram(DenseMatrix& D, const DenseMatrix& Y, double c) {
    const std::size_t n = Y.nrows();
    constexpr std::size_t kBlock = 32;
    for (std::size_t i0 = 0; i0 < n; i0 += kBlock) {
        const std::size_t i1 = std::min(n, i0 + kBlock);
        for (std::size_t j = 0; j < i1; ++j) {
            auto yj = Y.row(j);
            for (std::size_t i = std::max(i0, j); i < i1; ++i) {
                const double v = c * dot(Y.row(i), yj);
                D(i, j) += v;
                if (i != j) D(j, i) += v;
            }
        }
    }
}

// Rows of the result are L⁻¹ applied to the rows of M (sparse), i.e. (L⁻¹ Mᵀ)ᵀ.
DenseMatrix solve_rows(const CholeskyFactor& F, const SparseMatrix& M) {
    DenseMatrix Y(M.nrows(), F.order);
    for (std::size_t j = 0; j < M.nrows(); ++j) {
        auto yj = Y.row(j);
        for (std::size_t k = M.row_offsets()[j]; k < M.row_offsets()[j + 1]; ++k)
            yj[M.col_indices()[k]] = M.values()[k];
        forward_substitute(F, yj);
    }
    return Y;
}

void check_spd_block(const char* block, const std::function<void()>& f) {
    try {
        f();
    } catch (const NotPositiveDefinite& e) {
        throw NotPositiveDefinite(std::string(block) + ": " + e.what());
    }
}

} // namespace

GssPreconditioner::GssPreconditioner(const SaddlePointSystem& sys, GssConfig cfg, BuildStrategy strategy)
    : cfg_(std::move(cfg)), strategy_(strategy), n_(sys.n()), m_(sys.m()), p_(sys.p()),
      A_(sys.A()), B_(sys.B()), C_(sys.C()) {
    require<DimensionMismatch>(cfg_.lambda1.order() == n_ && cfg_.lambda2.order() == m_ && cfg_.lambda3.order() == p_,
                               "GssPreconditioner: configuration dimensions differ from the system");
    require<InvalidArgument>(cfg_.s > 0.0, "GssPreconditioner: s must be positive");
    require<InvalidArgument>(cfg_.t > 0.0 || !cfg_.lambda1.is_zero(), "GssPreconditioner: t must be positive when Lambda1 is zero");
    if (strategy_ == BuildStrategy::kDense)
        require<SizeGuardExceeded>(size() <= kDenseSizeGuard, "GssPreconditioner: dense strategy limited to size 5000");
    const double s = cfg_.s, s2 = s * s;

    check_spd_block("Lambda3", [&] { lambda3_solver_ = SpdSolver(cfg_.lambda3); });

    // X̂ = Λ2 + s² Cᵀ Λ3⁻¹ C
    xhat_ = cfg_.lambda2.to_dense();
    if (cfg_.lambda3.kind() == SpdOperator::Kind::kDiagonal) {
        Vector inv(p_);
        for (std::size_t i = 0; i < p_; ++i) inv[i] = 1.0 / cfg_.lambda3.diag()[i];
        const SparseMatrix K = spmm(transpose(C_), spmm(SparseMatrix::diagonal(inv), C_));
        add_scaled_sparse(xhat_, K, s2);
    } else {
        CholeskyFactor L3;
        check_spd_block("Lambda3", [&] { L3 = cholesky(cfg_.lambda3.to_dense()); });
        add_gram(xhat_, solve_rows(L3, transpose(C_)), s2);
    }
    check_spd_block("Xhat", [&] { xhat_factor_ = cholesky(xhat_); });

    if (strategy_ == BuildStrategy::kDense) {
        // Ã = Λ1 + tA + s² Bᵀ X̂⁻¹ B
        ablock_ = cfg_.lambda1.to_dense();
        add_scaled_sparse(ablock_, A_, cfg_.t);
        add_gram(ablock_, solve_rows(xhat_factor_, transpose(B_)), s2);
        check_spd_block("Atilde", [&] { ablock_factor_ = cholesky(ablock_); });
    } else {
        cg_diag_.assign(n_, 0.0);
        const SparseMatrix L1 = cfg_.lambda1.to_sparse();
        for (std::size_t i = 0; i < n_; ++i) cg_diag_[i] = L1.at(i, i) + cfg_.t * A_.at(i, i);
        for (double& v : cg_diag_)
            require<NotPositiveDefinite>(v > 0.0, "Atilde: non-positive diagonal for inner CG");
    }
}

void GssPreconditioner::ablock_matvec(std::span<const double> x, std::span<double> y) const {
    Vector t1(n_), bx(m_), bt(n_);
    cfg_.lambda1.apply(x, y);
    matvec(A_, x, t1);
    matvec(B_, x, bx);
    cholesky_solve_inplace(xhat_factor_, bx);
    matvec_transpose(B_, bx, bt);
    const double s2 = cfg_.s * cfg_.s;
    for (std::size_t i = 0; i < n_; ++i) y[i] += cfg_.t * t1[i] + s2 * bt[i];
}

void GssPreconditioner::solve_ablock(std::span<const double> v, std::span<double> w) const {
    if (strategy_ == BuildStrategy::kDense) {
        std::copy(v.begin(), v.end(), w.begin());
        cholesky_solve_inplace(ablock_factor_, w);
        return;
    }
    // Jacobi-preconditioned conjugate gradients to 1e-12 relative
    const double bnorm = norm2(v);
    std::fill(w.begin(), w.end(), 0.0);
    if (bnorm == 0.0) return;
    Vector r(v.begin(), v.end()), z(n_), pdir(n_), q(n_);
    for (std::size_t i = 0; i < n_; ++i) z[i] = r[i] / cg_diag_[i];
    pdir = z;
    double rz = dot(r, z);
    const std::size_t maxit = 10 * n_ + 100;
    for (std::size_t it = 0; it < maxit; ++it) {
        ablock_matvec(pdir, q);
        const double alpha = rz / dot(pdir, q);
        for (std::size_t i = 0; i < n_; ++i) {
            w[i] += alpha * pdir[i];
            r[i] -= alpha * q[i];
        }
        ++cg_iterations_;
        if (norm2(r) < 1e-12 * bnorm) return;
        for (std::size_t i = 0; i < n_; ++i) z[i] = r[i] / cg_diag_[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n_; ++i) pdir[i] = z[i] + beta * pdir[i];
    }
    throw ConvergenceFailure("inner CG on Atilde did not reach 1e-12");
}

void GssPreconditioner::apply(std::span<const double> r, std::span<double> w) const {
    require<DimensionMismatch>(r.size() == size() && w.size() == size(), "GssPreconditioner::apply: dimension mismatch");
    const double s = cfg_.s;
    auto r1 = r.subspan(0, n_), r2 = r.subspan(n_, m_), r3 = r.subspan(n_ + m_, p_);
    auto w1 = w.subspan(0, n_), w2 = w.subspan(n_, m_), w3 = w.subspan(n_ + m_, p_);

    // X̂ v1 = r2 + s Cᵀ Λ3⁻¹ r3
    Vector t3(r3.begin(), r3.end());
    lambda3_solver_.solve_inplace(t3);
    Vector v1(m_);
    matvec_transpose(C_, t3, v1);
    for (std::size_t i = 0; i < m_; ++i) v1[i] = r2[i] + s * v1[i];
    cholesky_solve_inplace(xhat_factor_, v1);

    // v = r1 − s Bᵀ v1, then Ã w1 = v
    Vector v(n_);
    matvec_transpose(B_, v1, v);
    for (std::size_t i = 0; i < n_; ++i) v[i] = r1[i] - s * v[i];
    solve_ablock(v, w1);

    // X̂ v2 = s B w1, w2 = v1 + v2
    Vector v2(m_);
    matvec(B_, w1, v2);
    for (auto& e : v2) e *= s;
    cholesky_solve_inplace(xhat_factor_, v2);
    for (std::size_t i = 0; i < m_; ++i) w2[i] = v1[i] + v2[i];

    // Λ3 w3 = r3 − s C w2
    matvec(C_, w2, w3);
    for (std::size_t i = 0; i < p_; ++i) w3[i] = r3[i] - s * w3[i];
    lambda3_solver_.solve_inplace(w3);
}

BlockVector GssPreconditioner::apply(const BlockVector& r) const {
    BlockVector w(n_, m_, p_);
    apply(r.data(), w.data());
    return w;
}

void GssPreconditioner::multiply(std::span<const double> x, std::span<double> y) const {
    require<DimensionMismatch>(x.size() == size() && y.size() == size(), "GssPreconditioner::multiply: dimension mismatch");
    const double s = cfg_.s;
    auto x1 = x.subspan(0, n_), x2 = x.subspan(n_, m_), x3 = x.subspan(n_ + m_, p_);
    auto y1 = y.subspan(0, n_), y2 = y.subspan(n_, m_), y3 = y.subspan(n_ + m_, p_);
    Vector a(n_), b(n_), c(m_), d(m_), e(p_);
    cfg_.lambda1.apply(x1, y1);
    matvec(A_, x1, a);
    matvec_transpose(B_, x2, b);
    for (std::size_t i = 0; i < n_; ++i) y1[i] += cfg_.t * a[i] + s * b[i];
    cfg_.lambda2.apply(x2, y2);
    matvec(B_, x1, c);
    matvec_transpose(C_, x3, d);
    for (std::size_t i = 0; i < m_; ++i) y2[i] += -s * c[i] - s * d[i];
    cfg_.lambda3.apply(x3, y3);
    matvec(C_, x2, e);
    for (std::size_t i = 0; i < p_; ++i) y3[i] += s * e[i];
}

std::unique_ptr<GssPreconditioner> build(const SaddlePointSystem& sys, const GssConfig& cfg, BuildStrategy strategy) {
    return std::make_unique<GssPreconditioner>(sys, cfg, strategy);
}

// ---- BD ----

void Preconditioner::forward(std::span<const double>, std::span<double>) const {
    throw InvalidArgument("preconditioner '" + name() + "' cannot form P x");
}

BdPreconditioner::BdPreconditioner(const SaddlePointSystem& sys)
    : n_(sys.n()), m_(sys.m()), p_(sys.p()), A_(sys.A()) {
    require<SizeGuardExceeded>(sys.size() <= kDenseSizeGuard, "BdPreconditioner: size guard 5000 exceeded");
    check_spd_block("A", [&] { a_factor_ = cholesky(DenseMatrix::from_sparse(sys.A())); });
    // S = B A⁻¹ Bᵀ, the Gram matrix of the rows y_i = L_A⁻¹ b_iᵀ
    schur_ = DenseMatrix(m_, m_);
    add_gram(schur_, solve_rows(a_factor_, sys.B()), 1.0);
    check_spd_block("S", [&] { s_factor_ = cholesky(schur_); });
    css_ = DenseMatrix(p_, p_);
    add_gram(css_, solve_rows(s_factor_, sys.C()), 1.0);
    check_spd_block("C S^-1 C^T", [&] { css_factor_ = cholesky(css_); });
}

void BdPreconditioner::forward(std::span<const double> x, std::span<double> y) const {
    require<DimensionMismatch>(x.size() == size() && y.size() == size(), "BdPreconditioner::forward: dimension mismatch");
    matvec(A_, x.subspan(0, n_), y.subspan(0, n_));
    const Vector y2 = matvec(schur_, x.subspan(n_, m_));
    const Vector y3 = matvec(css_, x.subspan(n_ + m_, p_));
    std::copy(y2.begin(), y2.end(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    std::copy(y3.begin(), y3.end(), y.begin() + static_cast<std::ptrdiff_t>(n_ + m_));
}

void BdPreconditioner::apply(std::span<const double> r, std::span<double> w) const {
    require<DimensionMismatch>(r.size() == size() && w.size() == size(), "BdPreconditioner::apply: dimension mismatch");
    std::copy(r.begin(), r.end(), w.begin());
    cholesky_solve_inplace(a_factor_, w.subspan(0, n_));
    cholesky_solve_inplace(s_factor_, w.subspan(n_, m_));
    cholesky_solve_inplace(css_factor_, w.subspan(n_ + m_, p_));
}

BlockVector BdPreconditioner::apply(const BlockVector& r) const {
    BlockVector w(n_, m_, p_);
    apply(r.data(), w.data());
    return w;
}

std::unique_ptr<BdPreconditioner> build_bd(const SaddlePointSystem& sys) {
    return std::make_unique<BdPreconditioner>(sys);
}

DenseLuPreconditioner::DenseLuPreconditioner(const DenseMatrix& M, bool sign_symmetric)
    : matrix_(M), factor_(lu_factor(M)), sign_symmetric_(sign_symmetric) {}

void DenseLuPreconditioner::forward(std::span<const double> x, std::span<double> y) const {
    const Vector v = matvec(matrix_, x);
    std::copy(v.begin(), v.end(), y.begin());
}

void DenseLuPreconditioner::apply(std::span<const double> r, std::span<double> w) const {
    const Vector x = lu_solve(factor_, r);
    std::copy(x.begin(), x.end(), w.begin());
}

// ---- explicit forms ----

DenseMatrix to_dense_preconditioner(const SaddlePointSystem& sys, const GssConfig& cfg) {
    require<SizeGuardExceeded>(sys.size() <= kDenseSizeGuard, "to_dense_preconditioner: size guard 5000 exceeded");
    const double s = cfg.s;
    const SparseMatrix P11 = add(cfg.lambda1.to_sparse(), sys.A(), 1.0, cfg.t);
    const SparseMatrix P12 = scale(transpose(sys.B()), s);
    const SparseMatrix P21 = scale(sys.B(), -s);
    const SparseMatrix P22 = cfg.lambda2.to_sparse();
    const SparseMatrix P23 = scale(transpose(sys.C()), -s);
    const SparseMatrix P32 = scale(sys.C(), s);
    const SparseMatrix P33 = cfg.lambda3.to_sparse();
    return DenseMatrix::from_sparse(block_assemble({{&P11, &P12, nullptr}, {&P21, &P22, &P23}, {nullptr, &P32, &P33}},
                                                   {sys.n(), sys.m(), sys.p()}, {sys.n(), sys.m(), sys.p()}));
}

DenseMatrix to_dense_splitting_q(const SaddlePointSystem& sys, const GssConfig& cfg) {
    const DenseMatrix Acal = to_dense(sys);
    const std::size_t N = sys.size();
    DenseMatrix Q(N, N);
    if (cfg.t == cfg.s) {
        // Q = Σ − (1 − s) 𝒜
        const SparseMatrix L1 = cfg.lambda1.to_sparse(), L2 = cfg.lambda2.to_sparse(), L3 = cfg.lambda3.to_sparse();
        const SparseMatrix Sigma = block_assemble({{&L1, nullptr, nullptr}, {nullptr, &L2, nullptr}, {nullptr, nullptr, &L3}},
                                                  {sys.n(), sys.m(), sys.p()}, {sys.n(), sys.m(), sys.p()});
        Q = DenseMatrix::from_sparse(Sigma);
        for (std::size_t i = 0; i < N * N; ++i) Q.values()[i] -= (1.0 - cfg.s) * Acal.values()[i];
    } else {
        Q = to_dense_preconditioner(sys, cfg);
        for (std::size_t i = 0; i < N * N; ++i) Q.values()[i] -= Acal.values()[i];
    }
    return Q;
}

double splitting_residual(const SaddlePointSystem& sys, const GssConfig& cfg) {
    const DenseMatrix P = to_dense_preconditioner(sys, cfg);
    const DenseMatrix Q = to_dense_splitting_q(sys, cfg);
    const DenseMatrix Acal = to_dense(sys);
    double s = 0.0;
    for (std::size_t i = 0; i < P.values().size(); ++i) {
        const double d = (P.values()[i] - Q.values()[i]) - Acal.values()[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace pess
