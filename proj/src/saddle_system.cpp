#include "pess/saddle_system.hpp"

#include "pess/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pess {

BlockVector::BlockVector(std::size_t n, std::size_t m, std::size_t p, Vector data)
    : n_(n), m_(m), p_(p), data_(std::move(data)) {
    require<DimensionMismatch>(data_.size() == n + m + p, "BlockVector: length != n+m+p");
}

SaddlePointSystem::SaddlePointSystem(SparseMatrix A, SparseMatrix B, SparseMatrix C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
    require<DimensionMismatch>(A_.nrows() == A_.ncols(), "A must be square");
    require<DimensionMismatch>(B_.ncols() == A_.nrows(), "B must have n columns");
    require<DimensionMismatch>(C_.ncols() == B_.nrows(), "C must have m columns");
}

void SaddlePointSystem::apply(std::span<const double> in, std::span<double> out) const {
    require<DimensionMismatch>(in.size() == size() && out.size() == size(), "operator_apply: dimension mismatch");
    const std::size_t n = this->n(), m = this->m(), p = this->p();
    auto x = in.subspan(0, n), y = in.subspan(n, m), z = in.subspan(n + m, p);
    auto o1 = out.subspan(0, n), o2 = out.subspan(n, m), o3 = out.subspan(n + m, p);
    Vector t1(n), t2(m);
    matvec(A_, x, o1);
    matvec_transpose(B_, y, t1);
    for (std::size_t i = 0; i < n; ++i) o1[i] += t1[i];
    matvec(B_, x, o2);
    matvec_transpose(C_, z, t2);
    for (std::size_t i = 0; i < m; ++i) o2[i] = -o2[i] - t2[i];
    matvec(C_, y, o3);
}

void SaddlePointSystem::apply_transpose(std::span<const double> in, std::span<double> out) const {
    // 𝒜ᵀ = D 𝒜 D with D = diag(I, −I, I)
    Vector t(in.begin(), in.end());
    for (std::size_t i = n(); i < n() + m(); ++i) t[i] = -t[i];
    apply(t, out);
    for (std::size_t i = n(); i < n() + m(); ++i) out[i] = -out[i];
}

SaddlePointSystem assemble(SparseMatrix A, SparseMatrix B, SparseMatrix C) {
    require<DimensionMismatch>(A.nrows() == A.ncols(), "assemble: A must be square");
    require<DimensionMismatch>(B.ncols() == A.nrows(), "assemble: B must be m x n");
    require<DimensionMismatch>(C.ncols() == B.nrows(), "assemble: C must be p x m");
    require<InvalidArgument>(asymmetry(A) <= 1e-12, "assemble: A is not symmetric");
    return SaddlePointSystem(std::move(A), std::move(B), std::move(C));
}

BlockVector make_block_vector(const SaddlePointSystem& sys, double fill) {
    return BlockVector(sys.n(), sys.m(), sys.p(), fill);
}

BlockVector operator_apply(const SaddlePointSystem& sys, const BlockVector& u) {
    require<DimensionMismatch>(u.n() == sys.n() && u.m() == sys.m() && u.p() == sys.p(),
                               "operator_apply: block sizes differ from the system");
    BlockVector out = make_block_vector(sys);
    sys.apply(u.data(), out.data());
    return out;
}

BlockVector rhs_for_ones(const SaddlePointSystem& sys) {
    return operator_apply(sys, make_block_vector(sys, 1.0));
}

namespace {

bool full_row_rank(const SparseMatrix& M, std::string& why) {
    if (M.nrows() == 0) return true;
    if (M.nrows() > M.ncols()) {
        why = "more rows than columns";
        return false;
    }
    const DenseMatrix D = DenseMatrix::from_sparse(M);
    DenseMatrix G(M.nrows(), M.nrows());
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t j = 0; j <= i; ++j) G(i, j) = G(j, i) = dot(D.row(i), D.row(j));
    const auto ev = eig_symmetric(G);
    const double smax = std::sqrt(std::max(ev.back(), 0.0));
    const double smin = std::sqrt(std::max(ev.front(), 0.0));
    if (smax == 0.0 || smin <= 1e-10 * smax) {
        why = "smallest singular value " + std::to_string(smin) + " vs largest " + std::to_string(smax);
        return false;
    }
    return true;
}

} // namespace

ValidationReport validate(const SaddlePointSystem& sys, ValidationLevel level) {
    ValidationReport r;
    r.level = level;
    r.a_symmetric = asymmetry(sys.A()) <= 1e-12;
    if (!r.a_symmetric) r.messages.push_back("A is not symmetric within 1e-12");
    if (level == ValidationLevel::kFull) {
        require<SizeGuardExceeded>(sys.size() <= kDenseSizeGuard, "validate: full level limited to size 5000");
        try {
            (void)cholesky(DenseMatrix::from_sparse(sys.A()));
        } catch (const Error& e) {
            r.a_spd = false;
            r.messages.push_back(std::string("A is not SPD: ") + e.what());
        }
        std::string why;
        r.b_full_row_rank = full_row_rank(sys.B(), why);
        if (!r.b_full_row_rank) r.messages.push_back("B lacks full row rank: " + why);
        r.c_full_row_rank = full_row_rank(sys.C(), why);
        if (!r.c_full_row_rank) r.messages.push_back("C lacks full row rank: " + why);
    }
    r.nonsingular = r.ok();
    return r;
}

void require_valid(const ValidationReport& report) {
    if (!report.a_symmetric || !report.a_spd) throw NotPositiveDefinite("validation failed: A is not SPD");
    if (!report.b_full_row_rank || !report.c_full_row_rank)
        throw FullRankViolation("validation failed: B or C lacks full row rank");
}

SparseMatrix to_sparse(const SaddlePointSystem& sys) {
    const SparseMatrix Bt = transpose(sys.B()), Ct = transpose(sys.C());
    const SparseMatrix nB = scale(sys.B(), -1.0), nCt = scale(Ct, -1.0);
    return block_assemble({{&sys.A(), &Bt, nullptr}, {&nB, nullptr, &nCt}, {nullptr, &sys.C(), nullptr}},
                          {sys.n(), sys.m(), sys.p()}, {sys.n(), sys.m(), sys.p()});
}

DenseMatrix to_dense(const SaddlePointSystem& sys) {
    require<SizeGuardExceeded>(sys.size() <= kDenseSizeGuard, "to_dense: size guard 5000 exceeded");
    return DenseMatrix::from_sparse(to_sparse(sys));
}

} // namespace pess
