#include "pess/gmres.hpp"

#include "pess/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pess {

namespace {

double relative_norm_diff(std::span<const double> a, std::span<const double> b, double scale) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s) / scale;
}

// Grows a column store in chunks so that long runs do not reallocate per step.
class Basis {
public:
    explicit Basis(std::size_t n) : n_(n) {}
    std::span<double> push() {
        if (count_ == capacity_) {
            capacity_ += kChunk;
            data_.resize(capacity_ * n_);
        }
        return {data_.data() + (count_++) * n_, n_};
    }
    std::span<const double> operator[](std::size_t k) const { return {data_.data() + k * n_, n_}; }
    std::span<double> operator[](std::size_t k) { return {data_.data() + k * n_, n_}; }

private:
    static constexpr std::size_t kChunk = 64;
    std::size_t n_, count_ = 0, capacity_ = 0;
    std::vector<double> data_;
};

} // namespace

SolveReport gmres(const LinearOperator& op, const Preconditioner* precond, std::span<const double> d,
                  const GmresOptions& opt) {
    require<InvalidArgument>(opt.tol > 0.0, "gmres: tol must be positive");
    require<InvalidArgument>(opt.maxit >= 1, "gmres: maxit must be at least 1");
    const std::size_t N = d.size();
    if (precond) require<DimensionMismatch>(precond->size() == N, "gmres: preconditioner size mismatch");
    const bool left = precond && opt.side == PreconditionSide::kLeft;
    auto apply_p = [&](std::span<const double> in, std::span<double> out) {
        if (precond)
            precond->apply(in, out);
        else
            std::copy(in.begin(), in.end(), out.begin());
    };

    SolveReport rep;
    Vector u(N, 0.0), tmp(N), tmp2(N);
    const double dnorm = norm2(d);
    require<InvalidArgument>(dnorm > 0.0, "gmres: right-hand side is zero");

    // initial residual of the Krylov problem (u₀ = 0)
    Vector r0(d.begin(), d.end());
    if (left) apply_p(d, r0);
    const double beta = norm2(r0);
    const double stop_scale = left ? beta : dnorm;

    auto true_res = [&](std::span<const double> x) {
        op(x, tmp);
        return relative_norm_diff(tmp, d, dnorm);
    };
    auto stop_res = [&](std::span<const double> x, double tres) {
        if (!left) return tres;
        op(x, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = d[i] - tmp[i];
        apply_p(tmp, tmp2);
        return norm2(tmp2) / stop_scale;
    };

    rep.true_res_history.push_back(1.0);
    rep.res_history.push_back(1.0);
    rep.estimate_history.push_back(1.0);

    Basis V(N);
    {
        auto v0 = V.push();
        for (std::size_t i = 0; i < N; ++i) v0[i] = r0[i] / beta;
    }
    std::vector<std::vector<double>> H;  // column k holds h(0..k+1, k)
    std::vector<double> cs, sn, g{beta};
    Vector w(N), z(N);

    auto form_solution = [&](std::size_t k, Vector& out) {
        // back substitution on the rotated (k×k) upper triangle
        std::vector<double> y(k);
        for (std::size_t i = k; i-- > 0;) {
            double s = g[i];
            for (std::size_t j = i + 1; j < k; ++j) s -= H[j][i] * y[j];
            y[i] = s / H[i][i];
        }
        Vector comb(N, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            auto vj = V[j];
            for (std::size_t i = 0; i < N; ++i) comb[i] += y[j] * vj[i];
        }
        if (left || !precond)
            out = std::move(comb);
        else
            apply_p(comb, out);
    };

    bool done = false;
    for (std::size_t k = 0; k < opt.maxit && !done; ++k) {
        // w = 𝒜 P⁻¹ v_k (right) or P⁻¹ 𝒜 v_k (left)
        if (left) {
            op(V[k], z);
            apply_p(z, w);
        } else {
            apply_p(V[k], z);
            op(z, w);
        }
        std::vector<double> h(k + 2, 0.0);
        for (std::size_t j = 0; j <= k; ++j) {
            auto vj = V[j];
            const double hj = dot(w, vj);
            h[j] = hj;
            for (std::size_t i = 0; i < N; ++i) w[i] -= hj * vj[i];
        }
        const double hnext = norm2(w);
        h[k + 1] = hnext;
        for (std::size_t j = 0; j < k; ++j) {
            const double a = cs[j] * h[j] + sn[j] * h[j + 1];
            h[j + 1] = -sn[j] * h[j] + cs[j] * h[j + 1];
            h[j] = a;
        }
        const double rr = std::hypot(h[k], h[k + 1]);
        const double c = rr == 0.0 ? 1.0 : h[k] / rr;
        const double s = rr == 0.0 ? 0.0 : h[k + 1] / rr;
        cs.push_back(c);
        sn.push_back(s);
        h[k] = rr;
        h[k + 1] = 0.0;
        g.push_back(-s * g[k]);
        g[k] = c * g[k];
        H.push_back(std::move(h));

        const std::size_t it = k + 1;
        form_solution(it, u);
        const double tres = true_res(u);
        const double sres = stop_res(u, tres);
        rep.true_res_history.push_back(tres);
        rep.res_history.push_back(sres);
        rep.estimate_history.push_back(std::abs(g[it]) / beta);
        rep.iterations = it;
        const bool breakdown = hnext <= 1e-14 * beta;
        if (sres < opt.tol || breakdown) {
            done = true;
            break;
        }
        auto vn = V.push();
        for (std::size_t i = 0; i < N; ++i) vn[i] = w[i] / hnext;
    }
    rep.final_res = rep.res_history.back();
    rep.final_true_res = rep.true_res_history.back();
    rep.converged = rep.final_res < opt.tol;
    rep.solution = BlockVector(N, 0, 0, std::move(u));
    return rep;
}

SolveReport gmres(const SaddlePointSystem& sys, const Preconditioner* precond, const BlockVector& d,
                  const GmresOptions& options) {
    require<DimensionMismatch>(d.size() == sys.size(), "gmres: right-hand side length differs from the system");
    LinearOperator op = [&sys](std::span<const double> in, std::span<double> out) { sys.apply(in, out); };
    SolveReport rep = gmres(op, precond, d.data(), options);
    rep.solution = BlockVector(sys.n(), sys.m(), sys.p(), std::move(rep.solution.data()));
    return rep;
}

double true_residual(const SaddlePointSystem& sys, const BlockVector& u, const BlockVector& d) {
    const double dn = norm2(d.data());
    require<InvalidArgument>(dn > 0.0, "true_residual: zero right-hand side");
    const BlockVector au = operator_apply(sys, u);
    return relative_norm_diff(au.data(), d.data(), dn);
}

} // namespace pess
