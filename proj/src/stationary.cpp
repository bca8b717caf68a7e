#include "pess/stationary.hpp"

#include "pess/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pess {

StationaryReport pess_iterate(const SaddlePointSystem& sys, const GssConfig& cfg, const BlockVector& u0,
                              const BlockVector& d, double tol, std::size_t maxit) {
    require<InvalidArgument>(cfg.t == cfg.s, "pess_iterate: configuration is not a PESS instance (t != s)");
    require<DimensionMismatch>(u0.size() == sys.size() && d.size() == sys.size(), "pess_iterate: vector length mismatch");
    const GssPreconditioner P(sys, cfg);
    const std::size_t N = sys.size();
    StationaryReport rep;
    Vector u = u0.data(), pu(N), au(N), rhs(N);
    const double dn = norm2(d.data());
    require<InvalidArgument>(dn > 0.0, "pess_iterate: zero right-hand side");
    auto res = [&] {
        sys.apply(u, au);
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += (au[i] - d.data()[i]) * (au[i] - d.data()[i]);
        return std::sqrt(s) / dn;
    };
    double r = res();
    rep.error_history.push_back(r);
    while (r >= tol && rep.iterations < maxit) {
        // au already holds 𝒜u from the residual evaluation
        P.multiply(u, pu);
        for (std::size_t i = 0; i < N; ++i) rhs[i] = pu[i] - au[i] + d.data()[i];
        P.apply(rhs, u);
        ++rep.iterations;
        r = res();
        rep.error_history.push_back(r);
        if (!(r <= 1e12)) throw Diverged("pess_iterate: RES exceeded 1e12 at iteration " + std::to_string(rep.iterations));
    }
    rep.converged = r < tol;
    rep.solution = BlockVector(sys.n(), sys.m(), sys.p(), std::move(u));
    return rep;
}

namespace {

// L⁻¹ M L⁻ᵀ for the block Cholesky factor L of Σ.
DenseMatrix congruence(const SaddlePointSystem& sys, const GssConfig& cfg, const DenseMatrix& M) {
    require<SizeGuardExceeded>(sys.size() <= kDenseSizeGuard, "predicate: size guard 5000 exceeded");
    require<InvalidArgument>(!cfg.lambda1.is_zero(), "predicate: Sigma needs an SPD Lambda1");
    const std::size_t n = sys.n(), m = sys.m(), N = sys.size();
    const CholeskyFactor F1 = cholesky(cfg.lambda1.to_dense());
    const CholeskyFactor F2 = cholesky(cfg.lambda2.to_dense());
    const CholeskyFactor F3 = cholesky(cfg.lambda3.to_dense());
    auto solve_block = [&](std::span<double> v) {
        forward_substitute(F1, v.subspan(0, n));
        forward_substitute(F2, v.subspan(n, m));
        forward_substitute(F3, v.subspan(n + m));
    };
    // rows of R are L⁻¹ applied to the columns of M, so R = (L⁻¹M)ᵀ
    DenseMatrix R = transpose(M);
    for (std::size_t j = 0; j < N; ++j) solve_block(R.row(j));
    // row j of K becomes column j of L⁻¹ Mᵀ L⁻ᵀ, hence K = L⁻¹ M L⁻ᵀ
    DenseMatrix K = transpose(R);
    for (std::size_t j = 0; j < N; ++j) solve_block(K.row(j));
    return K;
}

} // namespace

PredicateResult convergence_predicate(const SaddlePointSystem& sys, const GssConfig& cfg) {
    const DenseMatrix S = congruence(sys, cfg, to_dense(sys));
    const ComplexSpectrum spec = eig_general(S);
    PredicateResult out;
    const double s = cfg.s;
    for (const auto& mu : spec.eigenvalues)
        out.witnesses.push_back({mu, (2 * s - 1) * std::norm(mu) + 2 * mu.real()});
    std::sort(out.witnesses.begin(), out.witnesses.end(),
              [](const PredicateWitness& a, const PredicateWitness& b) { return a.lhs < b.lhs; });
    if (!out.witnesses.empty()) out.worst = out.witnesses.front();
    out.holds = out.witnesses.empty() || out.worst.lhs > 0.0;
    return out;
}

double sufficient_s_lower_bound(const SaddlePointSystem& sys, const GssConfig& cfg) {
    const DenseMatrix Acal = to_dense(sys);
    const std::size_t N = sys.size();
    DenseMatrix sym(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) sym(i, j) = Acal(i, j) + Acal(j, i);
    DenseMatrix Ssym = congruence(sys, cfg, sym);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < i; ++j) Ssym(i, j) = Ssym(j, i) = 0.5 * (Ssym(i, j) + Ssym(j, i));
    const double lmin = eig_symmetric(Ssym).front();
    const ComplexSpectrum spec = eig_general(congruence(sys, cfg, Acal));
    double rho = 0.0;
    for (const auto& mu : spec.eigenvalues) rho = std::max(rho, std::abs(mu));
    require<Singular>(rho > 0.0, "sufficient_s_lower_bound: zero spectral radius");
    return std::max(0.5 * (1.0 - lmin / (rho * rho)), 0.0);
}

double iteration_spectral_radius(const SaddlePointSystem& sys, const GssConfig& cfg) {
    const DenseMatrix Acal = to_dense(sys);
    const GssPreconditioner P(sys, cfg);
    const std::size_t N = sys.size();
    // columns of P⁻¹𝒜 via rows of 𝒜ᵀ
    const DenseMatrix At = transpose(Acal);
    DenseMatrix T(N, N);
    Vector col(N);
    for (std::size_t j = 0; j < N; ++j) {
        P.apply(At.row(j), col);
        for (std::size_t i = 0; i < N; ++i) T(i, j) = (i == j ? 1.0 : 0.0) - col[i];
    }
    double rho = 0.0;
    for (const auto& z : eig_general(T).eigenvalues) rho = std::max(rho, std::abs(z));
    return rho;
}

} // namespace pess
