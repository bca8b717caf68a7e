#include "pess/dense.hpp"

#include "pess/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pess {

DenseMatrix::DenseMatrix(std::size_t nrows, std::size_t ncols, std::vector<double> values)
    : nrows_(nrows), ncols_(ncols), values_(std::move(values)) {
    require<DimensionMismatch>(values_.size() == nrows_ * ncols_, "DenseMatrix: value count != nrows*ncols");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& M) {
    DenseMatrix D(M.nrows(), M.ncols());
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t k = M.row_offsets()[i]; k < M.row_offsets()[i + 1]; ++k)
            D(i, M.col_indices()[k]) = M.values()[k];
    return D;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t nr = rows.size(), nc = nr ? rows[0].size() : 0;
    DenseMatrix D(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
        require<DimensionMismatch>(rows[i].size() == nc, "from_rows: ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), D.row(i).begin());
    }
    return D;
}

DenseMatrix multiply(const DenseMatrix& X, const DenseMatrix& Y) {
    require<DimensionMismatch>(X.ncols() == Y.nrows(), "multiply: inner dimensions differ");
    DenseMatrix Z(X.nrows(), Y.ncols());
    for (std::size_t i = 0; i < X.nrows(); ++i) {
        auto zi = Z.row(i);
        for (std::size_t k = 0; k < X.ncols(); ++k) {
            const double a = X(i, k);
            if (a == 0.0) continue;
            auto yk = Y.row(k);
            for (std::size_t j = 0; j < Y.ncols(); ++j) zi[j] += a * yk[j];
        }
    }
    return Z;
}

DenseMatrix transpose(const DenseMatrix& M) {
    DenseMatrix T(M.ncols(), M.nrows());
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t j = 0; j < M.ncols(); ++j) T(j, i) = M(i, j);
    return T;
}

Vector matvec(const DenseMatrix& M, std::span<const double> x) {
    require<DimensionMismatch>(x.size() == M.ncols(), "dense matvec: dimension mismatch");
    Vector y(M.nrows());
    for (std::size_t i = 0; i < M.nrows(); ++i) y[i] = dot(M.row(i), x);
    return y;
}

double frobenius_norm(const DenseMatrix& M) {
    double s = 0.0;
    for (double v : M.values()) s += v * v;
    return std::sqrt(s);
}

double trace(const DenseMatrix& M) {
    require<DimensionMismatch>(M.nrows() == M.ncols(), "trace: matrix not square");
    double t = 0.0;
    for (std::size_t i = 0; i < M.nrows(); ++i) t += M(i, i);
    return t;
}

double asymmetry(const DenseMatrix& M) {
    require<DimensionMismatch>(M.nrows() == M.ncols(), "asymmetry: matrix not square");
    double amax = 0.0, dmax = 0.0;
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t j = 0; j < M.ncols(); ++j) {
            amax = std::max(amax, std::abs(M(i, j)));
            if (j < i) dmax = std::max(dmax, std::abs(M(i, j) - M(j, i)));
        }
    return amax == 0.0 ? 0.0 : dmax / amax;
}

CholeskyFactor cholesky(const DenseMatrix& S) {
    require<DimensionMismatch>(S.nrows() == S.ncols(), "cholesky: matrix not square");
    require<InvalidArgument>(asymmetry(S) <= 1e-12, "cholesky: matrix not symmetric");
    const std::size_t n = S.nrows();
    CholeskyFactor F{n, DenseMatrix(n, n)};
    DenseMatrix& L = F.lower;
    for (std::size_t i = 0; i < n; ++i) {
        auto li = L.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            auto lj = L.row(j);
            double s = S(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s))
                    throw NotPositiveDefinite("cholesky: non-positive pivot at row " + std::to_string(i));
                li[i] = std::sqrt(s);
            } else {
                li[j] = s / lj[j];
            }
        }
    }
    return F;
}

void forward_substitute(const CholeskyFactor& F, std::span<double> b) {
    require<DimensionMismatch>(b.size() == F.order, "forward_substitute: dimension mismatch");
    std::size_t first = 0;
    while (first < b.size() && b[first] == 0.0) ++first;
    for (std::size_t i = first; i < F.order; ++i) {
        auto li = F.lower.row(i);
        double s = b[i];
        for (std::size_t k = first; k < i; ++k) s -= li[k] * b[k];
        b[i] = s / li[i];
    }
}

void backward_substitute(const CholeskyFactor& F, std::span<double> y) {
    require<DimensionMismatch>(y.size() == F.order, "backward_substitute: dimension mismatch");
    for (std::size_t i = F.order; i-- > 0;) {
        auto li = F.lower.row(i);
        const double xi = y[i] / li[i];
        y[i] = xi;
        for (std::size_t k = 0; k < i; ++k) y[k] -= li[k] * xi;
    }
}

void cholesky_solve_inplace(const CholeskyFactor& F, std::span<double> x) {
    forward_substitute(F, x);
    backward_substitute(F, x);
}

Vector cholesky_solve(const CholeskyFactor& F, std::span<const double> rhs) {
    require<DimensionMismatch>(rhs.size() == F.order, "cholesky_solve: dimension mismatch");
    Vector x(rhs.begin(), rhs.end());
    cholesky_solve_inplace(F, x);
    return x;
}

LuFactor lu_factor(const DenseMatrix& M) {
    require<DimensionMismatch>(M.nrows() == M.ncols(), "lu_factor: matrix not square");
    const std::size_t n = M.nrows();
    LuFactor F{M, std::vector<std::size_t>(n)};
    DenseMatrix& a = F.lu;
    for (std::size_t i = 0; i < n; ++i) F.perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        if (best == 0.0) throw Singular("lu_factor: exactly singular pivot in column " + std::to_string(k));
        if (piv != k) {
            std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(piv).begin());
            std::swap(F.perm[k], F.perm[piv]);
        }
        auto ak = a.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            auto ai = a.row(i);
            const double l = ai[k] / ak[k];
            ai[k] = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) ai[j] -= l * ak[j];
        }
    }
    return F;
}

Vector lu_solve(const LuFactor& F, std::span<const double> rhs) {
    const std::size_t n = F.perm.size();
    require<DimensionMismatch>(rhs.size() == n, "lu_solve: dimension mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[F.perm[i]];
    for (std::size_t i = 0; i < n; ++i) {
        auto li = F.lu.row(i);
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        auto ui = F.lu.row(i);
        double s = x[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= ui[k] * x[k];
        x[i] = s / ui[i];
    }
    return x;
}

Vector lu_solve(const DenseMatrix& M, std::span<const double> rhs) {
    return lu_solve(lu_factor(M), rhs);
}

std::vector<double> eig_symmetric(const DenseMatrix& S) {
    require<DimensionMismatch>(S.nrows() == S.ncols(), "eig_symmetric: matrix not square");
    require<InvalidArgument>(asymmetry(S) <= 1e-12, "eig_symmetric: matrix not symmetric");
    const std::size_t n = S.nrows();
    DenseMatrix a = S;
    // work on the exactly symmetrized input
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
    const double fro = frobenius_norm(a);
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };
    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    while (fro > 0.0 && off_norm() >= 1e-12 * fro) {
        if (++sweep > kMaxSweeps) throw ConvergenceFailure("eig_symmetric: Jacobi sweeps exhausted");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p), aqq = a(q, q);
                if (sweep > 3 && std::abs(app) + 1e3 * std::abs(apq) == std::abs(app) &&
                    std::abs(aqq) + 1e3 * std::abs(apq) == std::abs(aqq)) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p), akq = a(k, q);
                    const double np = c * akp - s * akq;
                    const double nq = s * akp + c * akq;
                    a(k, p) = a(p, k) = np;
                    a(k, q) = a(q, k) = nq;
                }
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

bool ComplexSpectrum::is_real(const std::complex<double>& z) const {
    return std::abs(z.imag()) <= classification_tol * std::max(1.0, std::abs(z.real()));
}

std::vector<double> ComplexSpectrum::real_parts_of_real() const {
    std::vector<double> out;
    for (const auto& z : eigenvalues)
        if (is_real(z)) out.push_back(z.real());
    return out;
}

std::vector<std::complex<double>> ComplexSpectrum::nonreal() const {
    std::vector<std::complex<double>> out;
    for (const auto& z : eigenvalues)
        if (!is_real(z)) out.push_back(z);
    return out;
}

namespace {

// Householder reduction to upper Hessenberg form, in place.
void hessenberg(DenseMatrix& a) {
    const std::size_t n = a.nrows();
    if (n < 3) return;
    Vector v(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double alpha = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        const double x0 = a(k + 1, k);
        const double beta_sign = x0 >= 0.0 ? -alpha : alpha;  // new subdiagonal entry
        for (std::size_t i = k + 1; i < n; ++i) v[i] = a(i, k);
        v[k + 1] -= beta_sign;
        double vn2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vn2 += v[i] * v[i];
        if (vn2 == 0.0) continue;
        const double tau = 2.0 / vn2;
        // left: A[k+1:, k:] -= tau v (vᵀ A[k+1:, k:])
        std::fill(w.begin() + static_cast<std::ptrdiff_t>(k), w.end(), 0.0);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double vi = v[i];
            auto ai = a.row(i);
            for (std::size_t j = k; j < n; ++j) w[j] += vi * ai[j];
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = tau * v[i];
            auto ai = a.row(i);
            for (std::size_t j = k; j < n; ++j) ai[j] -= f * w[j];
        }
        // right: A[:, k+1:] -= tau (A[:, k+1:] v) vᵀ
        for (std::size_t i = 0; i < n; ++i) {
            auto ai = a.row(i);
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += ai[j] * v[j];
            s *= tau;
            for (std::size_t j = k + 1; j < n; ++j) ai[j] -= s * v[j];
        }
        a(k + 1, k) = beta_sign;
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

double sign_of(double magnitude, double s) {
    return s >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
std::vector<std::complex<double>> hessenberg_qr(DenseMatrix& a) {
    const int n = static_cast<int>(a.nrows());
    std::vector<std::complex<double>> ev(static_cast<std::size_t>(n));
    if (n == 0) return ev;
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
    const double eps = std::numeric_limits<double>::epsilon();
    const long total_limit = 100L * n;
    long total = 0;
    int nn = n - 1;
    double t = 0.0;
    double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
    while (nn >= 0) {
        int its = 0, l;
        do {
            for (l = nn; l >= 1; --l) {
                s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            x = a(nn, nn);
            if (l == nn) {
                ev[static_cast<std::size_t>(nn)] = {x + t, 0.0};
                --nn;
            } else {
                y = a(nn - 1, nn - 1);
                w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        double lo = x + z, hi = x + z;
                        if (z != 0.0) hi = x - w / z;
                        ev[static_cast<std::size_t>(nn - 1)] = {lo, 0.0};
                        ev[static_cast<std::size_t>(nn)] = {hi, 0.0};
                    } else {
                        ev[static_cast<std::size_t>(nn - 1)] = {x + p, z};
                        ev[static_cast<std::size_t>(nn)] = {x + p, -z};
                    }
                    nn -= 2;
                } else {
                    if (++total > total_limit)
                        throw ConvergenceFailure("eig_general: QR iteration limit reached");
                    if (its > 0 && its % 10 == 0) {
                        // exceptional shift
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m;
                    for (m = nn - 2; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = a(k + 2, k - 1);
                            if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            const int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k != nn - 1) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return ev;
}

} // namespace

ComplexSpectrum eig_general(const DenseMatrix& M) {
    require<DimensionMismatch>(M.nrows() == M.ncols(), "eig_general: matrix not square");
    for (double v : M.values()) require<InvalidArgument>(std::isfinite(v), "eig_general: non-finite entry");
    DenseMatrix a = M;
    hessenberg(a);
    ComplexSpectrum out;
    out.eigenvalues = hessenberg_qr(a);
    return out;
}

std::vector<double> gen_eig_spd(const DenseMatrix& S, const DenseMatrix& T) {
    require<DimensionMismatch>(S.nrows() == S.ncols() && T.nrows() == T.ncols() && S.nrows() == T.nrows(),
                               "gen_eig_spd: shape mismatch");
    require<InvalidArgument>(asymmetry(S) <= 1e-12, "gen_eig_spd: S not symmetric");
    const CholeskyFactor F = cholesky(T);
    const std::size_t n = S.nrows();
    // W = L⁻¹ S (columns of S solved), then L⁻¹ Wᵀ = L⁻¹ S L⁻ᵀ
    DenseMatrix W = transpose(S);
    for (std::size_t j = 0; j < n; ++j) forward_substitute(F, W.row(j));
    // W = (L⁻¹S)ᵀ; rows of its transpose are the columns of S L⁻ᵀ
    DenseMatrix R = transpose(W);
    for (std::size_t j = 0; j < n; ++j) forward_substitute(F, R.row(j));
    // row j of R is column j of L⁻¹ S L⁻ᵀ; symmetrize against rounding
    DenseMatrix K(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) K(i, j) = K(j, i) = 0.5 * (R(i, j) + R(j, i));
    return eig_symmetric(K);
}

double cond2(const DenseMatrix& M) {
    require<DimensionMismatch>(M.nrows() == M.ncols(), "cond2: matrix not square");
    const std::size_t n = M.nrows();
    const DenseMatrix Mt = transpose(M);
    DenseMatrix G(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) G(i, j) = G(j, i) = dot(Mt.row(i), Mt.row(j));
    const auto ev = eig_symmetric(G);
    if (ev.empty()) return 1.0;
    if (!(ev.front() > 0.0)) throw Singular("cond2: matrix is numerically singular");
    return std::sqrt(ev.back() / ev.front());
}

} // namespace pess
