#include "pess/spectral.hpp"

#include "pess/errors.hpp"
#include "pess/gmres.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <random>

namespace pess {

DenseMatrix densify_preconditioned(const SaddlePointSystem& sys, const Preconditioner* precond) {
    const DenseMatrix Acal = to_dense(sys);
    if (!precond) return Acal;
    require<DimensionMismatch>(precond->size() == sys.size(), "densify_preconditioned: size mismatch");
    const std::size_t N = sys.size();
    const DenseMatrix At = transpose(Acal);
    DenseMatrix Mt(N, N);  // row j = P⁻¹ 𝒜 e_j
    for (std::size_t j = 0; j < N; ++j) precond->apply(At.row(j), Mt.row(j));
    return transpose(Mt);
}

ComplexSpectrum preconditioned_spectrum(const SaddlePointSystem& sys, const Preconditioner* precond) {
    return eig_general(densify_preconditioned(sys, precond));
}

namespace {

// Gram matrix of L⁻¹-solved rows of M: M S⁻¹ Mᵀ with S = LLᵀ.
DenseMatrix solved_gram(const CholeskyFactor& F, const SparseMatrix& M) {
    DenseMatrix Y(M.nrows(), F.order);
    for (std::size_t j = 0; j < M.nrows(); ++j) {
        auto yj = Y.row(j);
        for (std::size_t k = M.row_offsets()[j]; k < M.row_offsets()[j + 1]; ++k)
            yj[M.col_indices()[k]] = M.values()[k];
        forward_substitute(F, yj);
    }
    DenseMatrix G(M.nrows(), M.nrows());
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t j = 0; j <= i; ++j) G(i, j) = G(j, i) = dot(Y.row(i), Y.row(j));
    return G;
}

std::pair<double, double> min_max(const std::vector<double>& ev) {
    return {ev.front(), ev.back()};
}

} // namespace

ScalarExtremes scalar_extremes(const SaddlePointSystem& sys, const GssConfig& cfg, ThetaTildeForm form) {
    require<SizeGuardExceeded>(sys.size() <= kDenseSizeGuard, "scalar_extremes: size guard 5000 exceeded");
    ScalarExtremes ex;
    ex.theta_tilde_form = form;
    const DenseMatrix L2 = cfg.lambda2.to_dense();
    const CholeskyFactor FA = cholesky(DenseMatrix::from_sparse(sys.A()));
    const CholeskyFactor F3 = cholesky(cfg.lambda3.to_dense());
    const DenseMatrix K = solved_gram(F3, transpose(sys.C()));  // Cᵀ Λ3⁻¹ C

    if (!cfg.lambda1.is_zero()) {
        ex.has_xi_eta = true;
        const DenseMatrix L1 = cfg.lambda1.to_dense();
        std::tie(ex.xi_min, ex.xi_max) = min_max(gen_eig_spd(DenseMatrix::from_sparse(sys.A()), L1));
        std::tie(ex.eta_min, ex.eta_max) = min_max(gen_eig_spd(solved_gram(cholesky(L1), sys.B()), L2));
    }
    const auto kev = gen_eig_spd(K, L2);
    ex.theta_max = kev.back();
    std::tie(ex.vartheta_min, ex.vartheta_max) = min_max(gen_eig_spd(solved_gram(FA, sys.B()), L2));
    if (form == ThetaTildeForm::kCouplingScaled) {
        std::tie(ex.theta_tilde_min, ex.theta_tilde_max) = min_max(kev);
    } else {
        const DenseMatrix C = DenseMatrix::from_sparse(sys.C());
        DenseMatrix CCt(sys.p(), sys.p());
        for (std::size_t i = 0; i < sys.p(); ++i)
            for (std::size_t j = 0; j <= i; ++j) CCt(i, j) = CCt(j, i) = dot(C.row(i), C.row(j));
        std::tie(ex.theta_tilde_min, ex.theta_tilde_max) = min_max(gen_eig_spd(CCt, cfg.lambda3.to_dense()));
    }
    return ex;
}

double BoundReport::bound(const std::string& name) const {
    for (const auto& [k, v] : bounds)
        if (k == name) return v;
    throw InvalidArgument("BoundReport: no bound named '" + name + "'");
}

namespace {

constexpr double kSlack = 1e-6;

void add_branch(BoundReport& r, const std::string& name) {
    for (auto& [k, c] : r.branches)
        if (k == name) {
            ++c;
            return;
        }
    r.branches.emplace_back(name, 1);
}

void violate(BoundReport& r, std::complex<double> z, double margin, const std::string& what) {
    r.holds = false;
    r.violations.push_back({z, margin, what});
}

// distance outside [lo, hi]; zero inside
double outside(double v, double lo, double hi) {
    return std::max({lo - v, v - hi, 0.0});
}

} // namespace

BoundReport check_unit_disk(const ComplexSpectrum& spectrum, double s) {
    BoundReport r;
    r.theorem = "unit-disk";
    r.bounds = {{"center", 1.0}, {"radius", 1.0}, {"s", s}};
    for (const auto& z : spectrum.eigenvalues) {
        ++r.checked;
        const double d = std::abs(z - 1.0);
        if (!(d < 1.0 + 1e-9)) violate(r, z, d - 1.0, "|lambda-1| < 1");
    }
    return r;
}

RealInterval pess_real_interval(const ScalarExtremes& ex, double s) {
    require<InapplicableBound>(ex.has_xi_eta, "real interval needs an SPD Lambda1");
    return {0.0, ex.xi_max / (1.0 + s * ex.xi_max), true};
}

BoundReport check_pess_real(const ComplexSpectrum& spectrum, const ScalarExtremes& ex, double s) {
    const RealInterval iv = pess_real_interval(ex, s);
    BoundReport r;
    r.theorem = "pess-real-interval";
    r.bounds = {{"lower", iv.lower}, {"upper", iv.upper}};
    for (const auto& z : spectrum.eigenvalues) {
        if (!spectrum.is_real(z)) continue;
        ++r.checked;
        const double x = z.real();
        if (!(x > -1e-9 && x <= iv.upper + 1e-9)) violate(r, z, outside(x, 0.0, iv.upper), "(0, xi_max/(1+s xi_max)]");
    }
    return r;
}

BoundReport check_real_positive_below_inverse_s(const ComplexSpectrum& spectrum, double s) {
    BoundReport r;
    r.theorem = "real-in-open-0-inv-s";
    r.bounds = {{"lower", 0.0}, {"upper", 1.0 / s}};
    for (const auto& z : spectrum.eigenvalues) {
        ++r.checked;
        if (std::abs(z - 1.0 / s) <= 1e-10) violate(r, z, 1e-10 - std::abs(z - 1.0 / s), "lambda != 1/s");
        if (!spectrum.is_real(z)) continue;
        if (!(z.real() > 1e-10)) violate(r, z, 1e-10 - z.real(), "lambda > 0");
        if (!(z.real() < 1.0 / s)) violate(r, z, z.real() - 1.0 / s, "lambda < 1/s");
    }
    return r;
}

NonrealBounds pess_nonreal_bounds(const ScalarExtremes& ex, double s) {
    require<InapplicableBound>(ex.has_xi_eta, "non-real bounds need an SPD Lambda1");
    NonrealBounds b;
    b.modulus_lower = ex.xi_min / (2.0 + s * ex.xi_min);
    b.modulus_upper = std::sqrt(ex.eta_max / (1.0 + s * ex.xi_min + s * s * ex.eta_max));
    b.re_mu_lower = ex.xi_min * ex.eta_min / (2.0 * (ex.xi_max * ex.xi_max + ex.eta_max + ex.theta_max));
    b.re_mu_upper = ex.xi_max / 2.0;
    b.im_mu_max = std::sqrt(ex.eta_max + ex.theta_max);
    return b;
}

BoundReport check_pess_nonreal(const ComplexSpectrum& spectrum, const ScalarExtremes& ex, double s) {
    const NonrealBounds b = pess_nonreal_bounds(ex, s);
    BoundReport r;
    r.theorem = "pess-nonreal-disjunction";
    r.bounds = {{"modulus_lower", b.modulus_lower}, {"modulus_upper", b.modulus_upper},
                {"re_mu_lower", b.re_mu_lower},     {"re_mu_upper", b.re_mu_upper},
                {"im_mu_max", b.im_mu_max}};
    for (const auto& z : spectrum.eigenvalues) {
        if (spectrum.is_real(z)) continue;
        ++r.checked;
        const double m1 = outside(std::abs(z), b.modulus_lower, b.modulus_upper);
        double m2 = std::numeric_limits<double>::infinity();
        const std::complex<double> den = 1.0 - s * z;
        if (std::abs(den) > 1e-12) {
            const std::complex<double> mu = z / den;
            m2 = std::max(outside(mu.real(), b.re_mu_lower, b.re_mu_upper), std::abs(mu.imag()) - b.im_mu_max);
            m2 = std::max(m2, 0.0);
        }
        const bool p1 = m1 <= kSlack, p2 = m2 <= kSlack;
        if (p1 && p2)
            add_branch(r, "both");
        else if (p1)
            add_branch(r, "part1");
        else if (p2)
            add_branch(r, "part2");
        else
            violate(r, z, std::min(m1, m2), "part (1) or part (2)");
    }
    return r;
}

LpessBounds lpess_bounds(const ScalarExtremes& ex, double s) {
    LpessBounds b;
    const double vmin = ex.vartheta_min, vmax = ex.vartheta_max;
    const double tmin = ex.theta_tilde_min, tmax = ex.theta_tilde_max;
    b.real_lower = std::min(vmin / (1.0 + s * vmin), tmin / (vmax + s * tmin));
    b.real_upper = vmax / (1.0 + s * vmax);
    b.modulus_lower = vmin / (2.0 + s * vmin);
    b.modulus_upper = std::sqrt(tmax / (1.0 + s * vmin + s * s * tmax));
    b.annulus_lower = 1.0 / (s * (1.0 + s * std::sqrt(tmax)));
    b.annulus_upper = 2.0 / (s * (2.0 + s * vmin));
    return b;
}

std::size_t count_near(const ComplexSpectrum& spectrum, std::complex<double> z, double tol) {
    return static_cast<std::size_t>(std::count_if(spectrum.eigenvalues.begin(), spectrum.eigenvalues.end(),
                                                  [&](const auto& w) { return std::abs(w - z) <= tol; }));
}

BoundReport check_lpess(const ComplexSpectrum& spectrum, const ScalarExtremes& ex, double s, std::size_t n) {
    const LpessBounds b = lpess_bounds(ex, s);
    BoundReport r;
    r.theorem = "lpess";
    r.bounds = {{"real_lower", b.real_lower},       {"real_upper", b.real_upper},
                {"modulus_lower", b.modulus_lower}, {"modulus_upper", b.modulus_upper},
                {"annulus_lower", b.annulus_lower}, {"annulus_upper", b.annulus_upper}};
    const double inv_s = 1.0 / s;
    const std::size_t cluster = count_near(spectrum, inv_s, 1e-8);
    r.branches.emplace_back("cluster_at_inverse_s", cluster);
    if (cluster < n) violate(r, inv_s, static_cast<double>(n - cluster), "multiplicity of 1/s >= n");
    for (const auto& z : spectrum.eigenvalues) {
        if (std::abs(z - inv_s) <= 1e-8) continue;
        ++r.checked;
        if (spectrum.is_real(z)) {
            const double m = outside(z.real(), b.real_lower, b.real_upper);
            if (m > kSlack) violate(r, z, m, "real interval");
            else add_branch(r, "real");
        } else {
            const double m1 = outside(std::abs(z), b.modulus_lower, b.modulus_upper);
            const double m2 = outside(std::abs(z - inv_s), b.annulus_lower, b.annulus_upper);
            if (m1 > kSlack) violate(r, z, m1, "modulus window");
            if (m2 > kSlack) violate(r, z, m2, "annulus around 1/s");
            if (m1 <= kSlack && m2 <= kSlack) add_branch(r, "nonreal");
        }
    }
    return r;
}

// ---- condition numbers ----

namespace {

// Largest eigenvalue of a symmetric positive operator via Lanczos with full
// reorthogonalization; Ritz value tracked by Sturm bisection on T_k.
double lanczos_largest(const LinearOperator& apply, std::size_t n) {
    std::mt19937_64 rng(20240531);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vector q(n);
    for (auto& v : q) v = uni(rng);
    double qn = norm2(q);
    for (auto& v : q) v /= qn;
    std::vector<Vector> Q{q};
    std::vector<double> alpha, beta;
    Vector w(n);
    double prev = 0.0, theta = 0.0;
    const std::size_t maxit = std::min<std::size_t>(n, 500);

    auto largest_ritz = [&](std::size_t k) {
        // bisection on the Sturm count of T_k
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double off = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < k ? std::abs(beta[i]) : 0.0);
            lo = std::min(lo, alpha[i] - off);
            hi = std::max(hi, alpha[i] + off);
        }
        auto count_below = [&](double x) {
            std::size_t c = 0;
            double d = 1.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double b2 = i > 0 ? beta[i - 1] * beta[i - 1] : 0.0;
                d = alpha[i] - x - (i > 0 ? b2 / d : 0.0);
                if (d == 0.0) d = -1e-300;
                if (d < 0.0) ++c;
            }
            return c;
        };
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(std::abs(hi), 1e-300); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (count_below(mid) >= k) hi = mid;
            else lo = mid;
        }
        return hi;
    };

    for (std::size_t k = 0; k < maxit; ++k) {
        apply(Q[k], w);
        const double a = dot(w, Q[k]);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& qj : Q) {
                const double c = dot(w, qj);
                for (std::size_t i = 0; i < n; ++i) w[i] -= c * qj[i];
            }
        const double b = norm2(w);
        theta = largest_ritz(k + 1);
        if (k > 3 && std::abs(theta - prev) <= 1e-12 * theta) break;
        if (b <= 1e-14 * std::abs(theta)) break;
        prev = theta;
        beta.push_back(b);
        for (auto& v : w) v /= b;
        Q.push_back(w);
    }
    return theta;
}

} // namespace

double condition_number_lanczos(const SaddlePointSystem& sys, const Preconditioner* precond) {
    const std::size_t N = sys.size(), n = sys.n(), m = sys.m();
    if (precond) {
        require<DimensionMismatch>(precond->size() == N, "condition_number: size mismatch");
        require<InvalidArgument>(precond->sign_symmetric(), "condition_number: preconditioner lacks P^T = D P D");
    }
    auto flip = [&](std::span<double> v) {
        for (std::size_t i = n; i < n + m; ++i) v[i] = -v[i];
    };
    auto pinv = [&](std::span<const double> x, std::span<double> y) {
        if (precond) precond->apply(x, y);
        else std::copy(x.begin(), x.end(), y.begin());
    };
    auto pfwd = [&](std::span<const double> x, std::span<double> y) {
        if (precond) precond->forward(x, y);
        else std::copy(x.begin(), x.end(), y.begin());
    };

    // sparse LU of 𝒜 for the inverse products
    const SparseMatrix S = to_sparse(sys);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(S.nnz());
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = S.row_offsets()[i]; k < S.row_offsets()[i + 1]; ++k)
            trip.emplace_back(static_cast<int>(i), static_cast<int>(S.col_indices()[k]), S.values()[k]);
    Eigen::SparseMatrix<double> E(static_cast<int>(N), static_cast<int>(N));
    E.setFromTriplets(trip.begin(), trip.end());
    E.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(E);
    require<Singular>(lu.info() == Eigen::Success, "condition_number: sparse LU of the system failed");
    auto ainv = [&](std::span<const double> x, std::span<double> y) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(N));
        Eigen::VectorXd sol = lu.solve(xv);
        std::copy(sol.data(), sol.data() + N, y.begin());
    };

    Vector t1(N), t2(N);
    // MᵀM with M = P⁻¹𝒜 and Mᵀ = D 𝒜 P⁻¹ D
    LinearOperator gram = [&](std::span<const double> x, std::span<double> y) {
        sys.apply(x, t1);
        pinv(t1, t2);
        flip(t2);
        pinv(t2, t1);
        sys.apply(t1, y);
        flip(y);
    };
    // M⁻¹M⁻ᵀ with M⁻¹ = 𝒜⁻¹P and M⁻ᵀ = D P 𝒜⁻¹ D
    LinearOperator inv_gram = [&](std::span<const double> x, std::span<double> y) {
        std::copy(x.begin(), x.end(), t1.begin());
        flip(t1);
        ainv(t1, t2);
        pfwd(t2, t1);
        flip(t1);
        pfwd(t1, t2);
        ainv(t2, y);
    };
    const double lmax = lanczos_largest(gram, N);
    const double inv_lmin = lanczos_largest(inv_gram, N);
    return std::sqrt(lmax * inv_lmin);
}

double condition_number(const SaddlePointSystem& sys, const Preconditioner* precond) {
    if (sys.size() <= kDenseConditionLimit) return cond2(densify_preconditioned(sys, precond));
    return condition_number_lanczos(sys, precond);
}

} // namespace pess
