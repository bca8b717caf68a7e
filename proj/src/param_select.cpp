#include "pess/param_select.hpp"

#include "pess/errors.hpp"

#include <cmath>

namespace pess {

namespace {

// Frobenius inner product of two canonical CSR matrices of equal shape.
double frobenius_inner(const SparseMatrix& X, const SparseMatrix& Y) {
    require<DimensionMismatch>(X.nrows() == Y.nrows() && X.ncols() == Y.ncols(), "frobenius_inner: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < X.nrows(); ++i) {
        std::size_t a = X.row_offsets()[i], ae = X.row_offsets()[i + 1];
        std::size_t b = Y.row_offsets()[i], be = Y.row_offsets()[i + 1];
        while (a < ae && b < be) {
            const auto ca = X.col_indices()[a], cb = Y.col_indices()[b];
            if (ca == cb) s += X.values()[a++] * Y.values()[b++];
            else if (ca < cb) ++a;
            else ++b;
        }
    }
    return s;
}

double sq(double v) { return v * v; }

double frob_sq(const SparseMatrix& M) { return sq(frobenius_norm(M)); }

} // namespace

double phi(const SaddlePointSystem& sys, const GssConfig& cfg, double s) {
    const double sigma = sq(cfg.lambda1.frobenius_norm()) + sq(cfg.lambda2.frobenius_norm()) +
                         sq(cfg.lambda3.frobenius_norm());
    const double trace = cfg.lambda1.is_zero() ? 0.0 : frobenius_inner(cfg.lambda1.to_sparse(), sys.A());
    const double acal = frob_sq(sys.A()) + 2 * frob_sq(sys.B()) + 2 * frob_sq(sys.C());
    return sigma + 2 * (s - 1) * trace + sq(s - 1) * acal;
}

double phi_direct(const SaddlePointSystem& sys, const GssConfig& cfg, double s) {
    GssConfig c = cfg;
    c.s = c.t = s;
    return sq(frobenius_norm(to_dense_splitting_q(sys, c)));
}

double phi_minimizer(const SaddlePointSystem& sys, const GssConfig& cfg) {
    const double trace = cfg.lambda1.is_zero() ? 0.0 : frobenius_inner(cfg.lambda1.to_sparse(), sys.A());
    const double acal = frob_sq(sys.A()) + 2 * frob_sq(sys.B()) + 2 * frob_sq(sys.C());
    require<InvalidArgument>(acal > 0, "phi_minimizer: zero system");
    return 1.0 - trace / acal;
}

ParamEstimate estimate_params(const SaddlePointSystem& sys, const SpdOperator& lambda3) {
    require<DimensionMismatch>(lambda3.order() == sys.p(), "estimate_params: Lambda3 must be p x p");
    require<InvalidArgument>(!lambda3.is_zero(), "estimate_params: Lambda3 must be SPD");
    const SpdSolver solver(lambda3);
    const SparseMatrix& C = sys.C();
    Vector t(sys.p());
    auto coupling = [&](std::span<const double> x, std::span<double> y) {
        matvec(C, x, t);
        solver.solve_inplace(t);
        matvec_transpose(C, t, y);
    };

    ParamEstimate e;
    e.norms.a = norm2_estimate(sys.A()).value;
    e.norms.b = norm2_estimate(sys.B()).value;
    e.norms.c = norm2_estimate(C).value;
    e.norms.coupling = spsd_norm_estimate(coupling, sys.m()).value;
    require<Singular>(e.norms.a > 0 && e.norms.b > 0 && e.norms.coupling > 0,
                      "estimate_params: a required norm is zero");
    e.beta_est = std::pow(e.norms.b, 4) / (4 * e.norms.coupling * sq(e.norms.a));
    e.s_est = std::sqrt(e.beta_est / e.norms.coupling);
    return e;
}

} // namespace pess
